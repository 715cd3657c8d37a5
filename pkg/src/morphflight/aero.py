"""Strip-theory quasisteady aerodynamic loads, gravity, and propulsion.

Every lifting surface is discretized into spanwise stations at the quarter
chord. Station loads follow the quasistatic strip law

    L = rho V^2 b C_L(phi) ds,  D = rho V^2 b C_D(phi) ds,
    M = rho V^2 b^2 C_M(phi) ds,

with b the local semichord and ds the strip width (the strip width supplies
the length dimension the per-unit-span form leaves open; any constant factor
is absorbed by the coefficient model calibration). phi is the effective
angle of attack from the in-plane components of the local flow; the spanwise
component is discarded.

Sign conventions: for a station with chord axis c (forward) and span axis s,
positive phi means flow from the suction side s x c; positive C_L pushes
toward s x c; positive C_M pitches the leading edge up about the span line.
Station sums run in index order so results are bitwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .airframe import (
    AircraftState,
    AirframeConfig,
    BuiltinAirfoil,
    CONTROL_NAMES,
    ControlVector,
    WingPose,
    _pose_pair,
    wing_omega,
    wing_rotation,
)
from .frames import rate_map, rotation_from_euler

_V_EPS = 1e-12


@dataclass(frozen=True)
class AeroStation:
    parent_id: str
    parent_kind: str  # "body" | "left" | "right"
    coord: float  # spanwise coordinate, parent frame
    semichord: float
    width: float
    quarter_chord_offset: np.ndarray  # parent frame
    span_axis: np.ndarray
    chord_axis: np.ndarray
    table: str = "builtin"
    control: Optional[str] = None
    gain: float = 0.0

    @property
    def id(self) -> str:
        return f"{self.parent_id}[{self.index}]"

    index: int = 0


@dataclass(frozen=True)
class FlowSample:
    phi_eff: float  # rad, (-pi, pi]
    airspeed: float  # in-plane speed, m/s
    lift_dir: np.ndarray  # earth frame, unit
    drag_dir: np.ndarray
    moment_dir: np.ndarray


@dataclass(frozen=True)
class GeneralizedLoads:
    q_x: np.ndarray  # earth-frame generalized force on x_S
    q_theta: np.ndarray  # generalized moment conjugate to the Euler angles

    def __add__(self, other: "GeneralizedLoads") -> "GeneralizedLoads":
        return GeneralizedLoads(self.q_x + other.q_x, self.q_theta + other.q_theta)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q_x, self.q_theta])

    @staticmethod
    def zero() -> "GeneralizedLoads":
        return GeneralizedLoads(np.zeros(3), np.zeros(3))


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Piecewise-linear (phi[, delta]) lookup of (C_L, C_D, C_M)."""

    phi: np.ndarray
    cl: np.ndarray
    cd: np.ndarray
    cm: np.ndarray
    delta: Optional[np.ndarray] = None  # control-deflection samples, 2-D tables

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "phi", phi)
        for name in ("cl", "cd", "cm"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.delta is not None:
            object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))
        if np.any(np.diff(phi) <= 0):
            raise ValueError("phi grid must be strictly increasing")
        if phi[0] > -np.pi + 1e-9 or phi[-1] < np.pi - 1e-9:
            raise ValueError("phi grid must cover [-pi, pi]")
        values = np.stack([self.cl, self.cd, self.cm])
        ends = values[..., 0], values[..., -1]
        if not np.allclose(ends[0], ends[1], atol=1e-9):
            raise ValueError("coefficient values at -pi and pi must match")
        if np.any(self.cd < 0):
            raise ValueError("C_D must be non-negative")

    def lookup(self, phi, delta=0.0):
        phi = np.asarray(phi, dtype=float)
        if self.delta is None:
            return (
                np.interp(phi, self.phi, self.cl),
                np.interp(phi, self.phi, self.cd),
                np.interp(phi, self.phi, self.cm),
            )
        d = np.clip(delta, self.delta[0], self.delta[-1])
        hi = np.clip(np.searchsorted(self.delta, d, side="right"), 1, len(self.delta) - 1)
        lo = hi - 1
        t = np.where(
            self.delta[hi] > self.delta[lo],
            (d - self.delta[lo]) / (self.delta[hi] - self.delta[lo]),
            0.0,
        )
        out = []
        for tab in (self.cl, self.cd, self.cm):
            row_lo = np.array([np.interp(p, self.phi, tab[i]) for p, i in zip(np.atleast_1d(phi), np.atleast_1d(lo))])
            row_hi = np.array([np.interp(p, self.phi, tab[i]) for p, i in zip(np.atleast_1d(phi), np.atleast_1d(hi))])
            out.append(row_lo * (1 - np.atleast_1d(t)) + row_hi * np.atleast_1d(t))
        if phi.ndim == 0:
            return tuple(float(o[0]) for o in out)
        return tuple(out)


def wrap_angle(phi):
    """Wrap to (-pi, pi]."""
    out = np.mod(np.asarray(phi) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def builtin_coefficients(airfoil: BuiltinAirfoil, phi):
    """Full-range flat-plate coefficient model, vectorized over phi."""
    phi = np.asarray(phi, dtype=float)
    s2 = np.sin(2.0 * phi)
    cl_pre = np.pi * s2  # 2*pi*sin(phi)*cos(phi): thin-airfoil slope 2*pi
    cl_post = airfoil.post_stall_lift * s2
    x = (np.abs(phi) - airfoil.stall_angle) / airfoil.blend_width + 0.5
    x = np.clip(x, 0.0, 1.0)
    w = x * x * (3.0 - 2.0 * x)
    cl = (1.0 - w) * cl_pre + w * cl_post
    cd = airfoil.cd0 + airfoil.cd_cross * np.sin(phi) ** 2
    cm_pre = -airfoil.moment_factor * cl_pre
    cm_post = -airfoil.post_stall_moment * np.sin(phi)
    cm = (1.0 - w) * cm_pre + w * cm_post
    return cl, cd, cm


def eval_coefficients(model, phi, delta_eff=0.0):
    """(C_L, C_D, C_M) at effective angle phi with control shift delta_eff.

    `model` is a BuiltinAirfoil (effective-angle shift applied) or a
    CoefficientTable (2-D tables interpolate in the raw deflection).
    """
    phi = np.asarray(phi)
    if np.any(phi <= -np.pi - 1e-12) or np.any(phi > np.pi + 1e-12):
        raise ValueError("phi outside principal range (-pi, pi]")
    if isinstance(model, CoefficientTable):
        if model.delta is not None:
            return model.lookup(phi, delta_eff)
        return model.lookup(wrap_angle(phi + delta_eff))
    return builtin_coefficients(model, wrap_angle(phi + delta_eff))


# --- station construction ---------------------------------------------------


def build_stations(config: AirframeConfig, density: Optional[int] = None) -> list[AeroStation]:
    """Stations at strip midpoints for every lifting surface.

    `density` overrides the per-surface station counts when given.
    """
    stations = []
    for body in config.bodies:
        surf = body.surface
        if surf is None:
            continue
        n = density if density is not None else surf.station_count
        span = surf.span_end - surf.span_start
        if span <= 0:
            raise ValueError(f"surface on {body.id} has zero span")
        width = span / n
        coords = surf.span_start + width * (np.arange(n) + 0.5)
        kind = body.side if body.group == "wing" else "body"
        for k, coord in enumerate(coords):
            control, gain = None, 0.0
            frac = (coord - surf.span_start) / span
            for binding in surf.bindings:
                lo, hi = binding.span_fraction
                if lo - 1e-12 <= frac <= hi + 1e-12:
                    control, gain = binding.control, binding.gain
            stations.append(
                AeroStation(
                    parent_id=body.id,
                    parent_kind=kind,
                    coord=float(coord),
                    semichord=surf.chord / 2.0,
                    width=width,
                    quarter_chord_offset=surf.root_offset + coord * surf.span_axis,
                    span_axis=surf.span_axis,
                    chord_axis=surf.chord_axis,
                    table=surf.table,
                    control=control,
                    gain=gain,
                    index=k,
                )
            )
    return stations


class AeroModel:
    """Stacked station arrays for vectorized load evaluation."""

    def __init__(self, config: AirframeConfig, density: Optional[int] = None):
        self.config = config
        self.stations = build_stations(config, density)
        n = len(self.stations)
        self.ids = [s.id for s in self.stations]
        self.kind = np.array(
            [("body", "left", "right").index(s.parent_kind) for s in self.stations], dtype=int
        )
        if n:
            self.offs = np.stack([s.quarter_chord_offset for s in self.stations])
            self.chord_ax = np.stack([s.chord_axis for s in self.stations])
            self.span_ax = np.stack([s.span_axis for s in self.stations])
        else:
            self.offs = np.zeros((0, 3))
            self.chord_ax = np.zeros((0, 3))
            self.span_ax = np.zeros((0, 3))
        self.b = np.array([s.semichord for s in self.stations])
        self.ds = np.array([s.width for s in self.stations])
        self.gain = np.array([s.gain for s in self.stations])
        self.ctrl = np.array(
            [CONTROL_NAMES.index(s.control) if s.control else -1 for s in self.stations],
            dtype=int,
        )
        self.tables = [s.table for s in self.stations]
        table_ids = np.array(self.tables) if self.tables else np.empty(0)
        self._table_groups = [
            (tid, table_ids == tid) for tid in dict.fromkeys(self.tables)
        ]
        self.drag_descr = next(
            (b.drag for b in config.bodies if b.drag is not None), None
        )

    def station_geometry(self, wings):
        """Body-frame positions, chord/span axes, and morphing point velocities."""
        left, right = _pose_pair(wings)
        pos = self.offs.copy()
        cax = self.chord_ax.copy()
        sax = self.span_ax.copy()
        vex = np.zeros_like(pos)
        for kind_idx, pose in ((1, left), (2, right)):
            m = self.kind == kind_idx
            if not np.any(m):
                continue
            r_bw = wing_rotation(pose)
            ww = wing_omega(pose)
            arm = self.offs[m] @ r_bw.T
            pos[m] = self.config.wing_root + arm
            cax[m] = self.chord_ax[m] @ r_bw.T
            sax[m] = self.span_ax[m] @ r_bw.T
            vex[m] = np.cross(ww, arm)
        return pos, cax, sax, vex

    def flow_arrays(self, state: AircraftState, wings, ctx=None):
        """Per-station (phi_eff, V, in-plane velocity components, frames)."""
        r_eb, omega_map, omega0, vb = ctx or _frame_ctx(state)
        pos, cax, sax, vex = self.station_geometry(wings)
        v = vb + np.cross(np.broadcast_to(omega0, pos.shape), pos) + vex
        up = np.cross(sax, cax)
        vc = np.einsum("ni,ni->n", v, cax)
        vu = np.einsum("ni,ni->n", v, up)
        speed = np.sqrt(vc * vc + vu * vu)
        phi = np.where(speed > _V_EPS, np.arctan2(-vu, vc), 0.0)
        return phi, speed, vc, vu, pos, cax, sax, up, r_eb, omega0

    def coefficients(self, phi, controls: ControlVector):
        delta = np.where(self.ctrl >= 0, controls.values[self.ctrl], 0.0)
        if len(self._table_groups) == 1:
            tid, _ = self._table_groups[0]
            model = self.config.airfoil if tid == "builtin" else self.config.tables[tid]
            if isinstance(model, CoefficientTable) and model.delta is not None:
                return eval_coefficients(model, phi, delta)
            return eval_coefficients(model, phi, self.gain * delta)
        cl = np.empty_like(phi)
        cd = np.empty_like(phi)
        cm = np.empty_like(phi)
        for tid, m in self._table_groups:
            model = self.config.airfoil if tid == "builtin" else self.config.tables[tid]
            if isinstance(model, CoefficientTable) and model.delta is not None:
                out = eval_coefficients(model, phi[m], delta[m])
            else:
                out = eval_coefficients(model, phi[m], self.gain[m] * delta[m])
            cl[m], cd[m], cm[m] = out
        return cl, cd, cm

    def loads(self, state: AircraftState, controls: ControlVector, wings, ctx=None) -> GeneralizedLoads:
        if not self.stations:
            return GeneralizedLoads.zero()
        ctx = ctx or _frame_ctx(state)
        r_eb, omega_map = ctx[0], ctx[1]
        phi, speed, vc, vu, pos, cax, sax, up, _, _ = self.flow_arrays(state, wings, ctx)
        cl, cd, cm = self.coefficients(phi, controls)
        rho = self.config.air_density
        live = speed > _V_EPS
        inv = np.where(live, 1.0 / np.where(live, speed, 1.0), 0.0)
        drag_dir = -(vc[:, None] * cax + vu[:, None] * up) * inv[:, None]
        lift_dir = np.cross(drag_dir, sax)
        q = rho * speed * speed * self.b * self.ds
        force = q[:, None] * (cl[:, None] * lift_dir + cd[:, None] * drag_dir)
        moment = (rho * speed * speed * self.b * self.b * cm * self.ds)[:, None] * sax
        f_tot = force.sum(axis=0)
        t_tot = np.cross(pos, force).sum(axis=0) + moment.sum(axis=0)
        return GeneralizedLoads(r_eb @ f_tot, omega_map.T @ t_tot)


def _frame_ctx(state: AircraftState):
    """(R_EB, rate map, body angular velocity, body-frame velocity) bundle."""
    r_eb = rotation_from_euler(state.euler)
    omega_map = rate_map(state.euler)
    return r_eb, omega_map, omega_map @ state.euler_rates, r_eb.T @ state.vel


_aero_cache: dict[tuple, AeroModel] = {}


def get_aero_model(config: AirframeConfig, density: Optional[int] = None) -> AeroModel:
    key = (id(config), density)
    model = _aero_cache.get(key)
    if model is None:
        model = AeroModel(config, density)
        if len(_aero_cache) > 64:
            _aero_cache.clear()
        _aero_cache[key] = model
    return model


def station_flow(config: AirframeConfig, station: AeroStation, state: AircraftState, wings) -> FlowSample:
    """Flow sample at one station, earth-frame direction triad included."""
    r_eb = rotation_from_euler(state.euler)
    omega0 = rate_map(state.euler) @ state.euler_rates
    vb = r_eb.T @ state.vel
    left, right = _pose_pair(wings)
    if station.parent_kind == "body":
        pos = station.quarter_chord_offset
        cax, sax = station.chord_axis, station.span_axis
        vex = np.zeros(3)
    else:
        pose = left if station.parent_kind == "left" else right
        r_bw = wing_rotation(pose)
        arm = r_bw @ station.quarter_chord_offset
        pos = config.wing_root + arm
        cax, sax = r_bw @ station.chord_axis, r_bw @ station.span_axis
        vex = np.cross(wing_omega(pose), arm)
    v = vb + np.cross(omega0, pos) + vex
    up = np.cross(sax, cax)
    vc = float(v @ cax)
    vu = float(v @ up)
    speed = float(np.hypot(vc, vu))
    if speed > _V_EPS:
        phi = float(np.arctan2(-vu, vc))
        drag_b = -(vc * cax + vu * up) / speed
    else:
        phi = 0.0
        drag_b = -cax
    moment_b = -sax
    lift_b = np.cross(moment_b, drag_b)
    return FlowSample(
        phi_eff=phi,
        airspeed=speed,
        lift_dir=r_eb @ lift_b,
        drag_dir=r_eb @ drag_b,
        moment_dir=r_eb @ moment_b,
    )


def station_loads(flow: FlowSample, coeffs, rho: float, semichord: float, width: float = 1.0):
    """Dimensional strip loads from a flow sample and (C_L, C_D, C_M)."""
    cl, cd, cm = coeffs
    q = rho * flow.airspeed**2 * semichord * width
    lift = q * cl * flow.lift_dir
    drag = q * cd * flow.drag_dir
    # positive C_M raises the leading edge about the span line (= -moment_dir)
    moment = -(rho * flow.airspeed**2 * semichord**2 * cm * width) * flow.moment_dir
    return {"lift": lift, "drag": drag, "moment": moment}


# --- non-station loads ------------------------------------------------------


def fuselage_drag(
    config: AirframeConfig, state: AircraftState, wings=None, ctx=None
) -> GeneralizedLoads:
    """Cylindrical-fuselage strip drag: axial skin value blending to crossflow.

    Reference area per strip is radius x strip length (the half of the
    frontal diameter absorbs the conventional 1/2 dynamic-pressure factor,
    keeping the rho V^2 load form used for the lifting stations).
    """
    model = get_aero_model(config)
    d = model.drag_descr
    if d is None:
        raise ValueError("config has no fuselage drag descriptor")
    r_eb, omega_map, omega0, vb = ctx or _frame_ctx(state)
    dl = d.length / d.strips
    centers = d.start[None, :] + d.axis[None, :] * (dl * (np.arange(d.strips) + 0.5))[:, None]
    v = vb + np.cross(np.broadcast_to(omega0, centers.shape), centers)
    speed = np.linalg.norm(v, axis=1)
    axial = v @ d.axis
    cross = np.sqrt(np.maximum(speed * speed - axial * axial, 0.0))
    phi = np.arctan2(cross, axial)
    cd = d.cd0 + (d.cd_cross - d.cd0) * np.sin(phi) ** 2
    area = d.radius * dl
    live = speed > _V_EPS
    scale = np.where(live, config.air_density * speed * area * cd, 0.0)
    force = -scale[:, None] * v
    f_tot = force.sum(axis=0)
    t_tot = np.cross(centers, force).sum(axis=0)
    return GeneralizedLoads(r_eb @ f_tot, omega_map.T @ t_tot)


def gravity_loads(
    config: AirframeConfig, state: AircraftState, wings=None, ctx=None
) -> GeneralizedLoads:
    """Weight plus the attitude-conjugate gravity moment about S."""
    if wings is None:
        wings = (WingPose("left", np.zeros(3)), WingPose("right", np.zeros(3)))
    left, right = _pose_pair(wings)
    r_eb, omega_map = (ctx or _frame_ctx(state))[:2]
    g_body = config.gravity * r_eb[2, :]
    torque = np.zeros(3)
    total = 0.0
    for body in config.bodies:
        if body.group == "fuselage":
            r = body.com_offset
        else:
            pose = left if body.side == "left" else right
            r = config.wing_root + wing_rotation(pose) @ body.com_offset
        torque = torque + np.cross(r, body.mass * g_body)
        total += body.mass
    q_x = np.array([0.0, 0.0, total * config.gravity])
    return GeneralizedLoads(q_x, omega_map.T @ torque)


def propulsion_loads(
    thrust: float, config: AirframeConfig, state: AircraftState, ctx=None
) -> GeneralizedLoads:
    if thrust < 0:
        raise ValueError("thrust must be non-negative")
    r_eb, omega_map = (ctx or _frame_ctx(state))[:2]
    f_body = thrust * config.thrust_dir
    torque = np.cross(config.thrust_point, f_body)
    return GeneralizedLoads(r_eb @ f_body, omega_map.T @ torque)


def total_external_loads(
    config: AirframeConfig,
    state: AircraftState,
    controls: ControlVector,
    wings=None,
    density: Optional[int] = None,
) -> np.ndarray:
    """Aggregate aero + fuselage drag + gravity + propulsion as a 6-vector."""
    if wings is None:
        wings = controls.wing_poses()
    ctx = _frame_ctx(state)
    model = get_aero_model(config, density)
    loads = model.loads(state, controls, wings, ctx)
    if model.drag_descr is not None:
        loads = loads + fuselage_drag(config, state, wings, ctx)
    loads = loads + gravity_loads(config, state, wings, ctx)
    loads = loads + propulsion_loads(controls.thrust, config, state, ctx)
    return loads.as_vector()


def scale_station_counts(config: AirframeConfig, factor: int) -> AirframeConfig:
    """Copy of the config with every surface's station count multiplied."""
    bodies = []
    for body in config.bodies:
        if body.surface is not None:
            surf = replace(body.surface, station_count=body.surface.station_count * factor)
            bodies.append(replace(body, surface=surf))
        else:
            bodies.append(body)
    return config.replace(bodies=tuple(bodies))
