"""Multibody airframe model: configuration, state, kinematics, equations of motion.

The aircraft is a collection of rigid bodies: fuselage-group elements fixed in
the body frame (fuselage shell, balance mass, stabilizers) and two wings that
rotate about a shared root point through prescribed sweep/incidence/dihedral
angles. Generalized coordinates are q = [x_S, theta] with the reference point
S at the fuselage tail; the state vector is z = [vel_S, euler_rates, pos_S,
euler] (12 components, earth-frame translational velocity).

Equations of motion come from the kinetic energy, which is exactly quadratic
in qdot:

    K = 1/2 qdot^T M(q, tau) qdot + c(q, tau, taudot)^T qdot + k0

Polarization over basis velocity vectors recovers M and c exactly, and
complex-step differentiation supplies the time and attitude derivatives
needed by the Euler-Lagrange equations to machine precision:

    M qddot = Q + dK/dq - Mdot qdot - cdot

Wing angle conventions (per side): positive sweep sweeps the wing back,
positive incidence pitches the leading edge up, positive dihedral raises the
tip. The left wing is the exact mirror image of the right wing, so equal
angle triples give a bilaterally symmetric configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .frames import (
    Convention,
    EulerAngles,
    _rx,
    _ry,
    _rz,
    euler_from_rotation,
    rate_map,
    rate_map_batch,
    rate_map_is_singular,
    rotation_from_euler,
    rotation_matrix_batch,
)

CONTROL_NAMES = (
    "thrust",
    "elevator",
    "rudder",
    "aileron",
    "sweep_l",
    "incidence_l",
    "dihedral_l",
    "sweep_r",
    "incidence_r",
    "dihedral_r",
)

_COMPLEX_STEP = 1e-200


class SingularAttitudeError(RuntimeError):
    """Raised when the Euler rate map is singular at the requested attitude."""


@dataclass(frozen=True, eq=False)
class ControlBinding:
    control: str
    gain: float  # effective-angle shift per rad of deflection
    span_fraction: tuple[float, float] = (0.0, 1.0)


@dataclass(frozen=True, eq=False)
class AeroSurfaceDescriptor:
    span_start: float
    span_end: float
    chord: float
    station_count: int
    span_axis: np.ndarray  # unit, parent frame
    chord_axis: np.ndarray  # unit, parent frame
    root_offset: np.ndarray  # quarter-chord line origin, parent frame
    table: str = "builtin"
    bindings: tuple[ControlBinding, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "span_axis", np.asarray(self.span_axis, dtype=float))
        object.__setattr__(self, "chord_axis", np.asarray(self.chord_axis, dtype=float))
        object.__setattr__(self, "root_offset", np.asarray(self.root_offset, dtype=float))
        if self.span_end <= self.span_start:
            raise ValueError("surface span must have positive extent")
        if self.station_count < 1:
            raise ValueError("station_count must be >= 1")


@dataclass(frozen=True, eq=False)
class FuselageDragDescriptor:
    cd0: float = 0.05
    cd_cross: float = 1.1
    radius: float = 0.10
    length: float = 1.2
    strips: int = 8
    start: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float))


@dataclass(frozen=True, eq=False)
class RigidBodyElement:
    id: str
    group: str  # "fuselage" | "wing"
    mass: float
    inertia: np.ndarray  # 3x3, local frame
    com_offset: np.ndarray  # from S (fuselage group) or wing root H (wing group)
    side: Optional[str] = None  # "left"/"right" for wings
    point: bool = False  # point masses may carry a zero inertia tensor
    surface: Optional[AeroSurfaceDescriptor] = None
    drag: Optional[FuselageDragDescriptor] = None

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        object.__setattr__(self, "com_offset", np.asarray(self.com_offset, dtype=float))
        if self.mass <= 0:
            raise ValueError(f"body {self.id}: mass must be positive")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ValueError(f"body {self.id}: inertia must be symmetric")
        eig = np.linalg.eigvalsh(self.inertia)
        if self.point:
            if np.any(eig < -1e-12):
                raise ValueError(f"body {self.id}: point-mass inertia must be PSD")
        elif np.any(eig <= 0):
            raise ValueError(f"body {self.id}: inertia must be positive definite")
        if self.group not in ("fuselage", "wing"):
            raise ValueError(f"body {self.id}: unknown group {self.group!r}")
        if self.group == "wing" and self.side not in ("left", "right"):
            raise ValueError(f"wing body {self.id}: side must be 'left' or 'right'")


@dataclass(frozen=True, eq=False)
class BuiltinAirfoil:
    stall_angle: float = np.deg2rad(12.0)
    blend_width: float = np.deg2rad(5.0)
    cd0: float = 0.02
    cd_cross: float = 1.1
    post_stall_lift: float = 1.1
    moment_factor: float = 0.25  # pre-stall: C_M = -moment_factor * C_L
    post_stall_moment: float = 0.55


@dataclass(frozen=True, eq=False)
class AirframeConfig:
    bodies: tuple[RigidBodyElement, ...]
    wing_root: np.ndarray  # H relative to S, body frame
    control_limits: dict
    gravity: float = 9.81
    air_density: float = 1.225
    thrust_dir: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    thrust_point: np.ndarray = field(default_factory=lambda: np.array([0.6, 0.0, 0.0]))
    airfoil: BuiltinAirfoil = field(default_factory=BuiltinAirfoil)
    tables: dict = field(default_factory=dict)
    name: str = "airframe"

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        object.__setattr__(self, "wing_root", np.asarray(self.wing_root, dtype=float))
        object.__setattr__(self, "thrust_dir", np.asarray(self.thrust_dir, dtype=float))
        object.__setattr__(self, "thrust_point", np.asarray(self.thrust_point, dtype=float))
        wings = [b for b in self.bodies if b.group == "wing"]
        if len(wings) != 2 or {w.side for w in wings} != {"left", "right"}:
            raise ValueError("config needs exactly one left and one right wing")
        for name, (lo, hi) in self.control_limits.items():
            if not lo < hi:
                raise ValueError(f"control limit {name}: min must be < max")

    @property
    def total_mass(self) -> float:
        return float(sum(b.mass for b in self.bodies))

    def wing(self, side: str) -> RigidBodyElement:
        return next(b for b in self.bodies if b.group == "wing" and b.side == side)

    def fuselage_bodies(self) -> list[RigidBodyElement]:
        return [b for b in self.bodies if b.group == "fuselage"]

    def limits_for(self, control: str) -> tuple[float, float]:
        base = control
        if control.endswith("_l") or control.endswith("_r"):
            base = control[:-2]
        return self.control_limits[base]

    def replace(self, **kw) -> "AirframeConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class AircraftState:
    vel: np.ndarray  # earth-frame velocity of S, m/s
    euler_rates: np.ndarray  # [pitch, yaw, roll] rates, rad/s
    pos: np.ndarray  # earth-frame position of S, m
    euler: EulerAngles

    def __post_init__(self):
        object.__setattr__(self, "vel", np.asarray(self.vel, dtype=float))
        object.__setattr__(self, "euler_rates", np.asarray(self.euler_rates, dtype=float))
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float))

    @property
    def convention(self) -> Convention:
        return self.euler.convention

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.vel, self.euler_rates, self.pos, self.euler.as_array()])

    @staticmethod
    def from_vector(z, convention: Convention = Convention.ZYX_321) -> "AircraftState":
        z = np.asarray(z, dtype=float)
        return AircraftState(
            z[0:3], z[3:6], z[6:9], EulerAngles.from_array(z[9:12], convention)
        )

    @staticmethod
    def zero(convention: Convention = Convention.ZYX_321) -> "AircraftState":
        return AircraftState.from_vector(np.zeros(12), convention)


@dataclass(frozen=True)
class WingPose:
    side: str
    angles: np.ndarray  # [sweep, incidence, dihedral]
    rates: np.ndarray = field(default_factory=lambda: np.zeros(3))
    accels: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=float))
        object.__setattr__(self, "rates", np.asarray(self.rates, dtype=float))
        object.__setattr__(self, "accels", np.asarray(self.accels, dtype=float))


@dataclass(frozen=True)
class EomCoefficients:
    b1: np.ndarray  # 6x6 generalized mass matrix
    b0z: np.ndarray  # velocity-dependent bias, 6-vector
    f0: np.ndarray  # morphing-induced inertial forcing, 6-vector


@dataclass(frozen=True)
class ControlVector:
    """Thrust, surface deflections, and the six wing angles, as a flat vector.

    Entry order follows CONTROL_NAMES. `free_mask` marks entries a trim solver
    may adjust; frozen entries are never modified.
    """

    values: np.ndarray
    free_mask: np.ndarray = field(default_factory=lambda: np.zeros(10, dtype=bool))

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "free_mask", np.asarray(self.free_mask, dtype=bool))
        if self.values.shape != (10,):
            raise ValueError("control vector must have 10 entries")

    def __getattr__(self, name):
        if name in CONTROL_NAMES:
            return float(self.values[CONTROL_NAMES.index(name)])
        raise AttributeError(name)

    def get(self, name: str) -> float:
        return float(self.values[CONTROL_NAMES.index(name)])

    def with_values(self, **kw) -> "ControlVector":
        v = self.values.copy()
        for name, val in kw.items():
            v[CONTROL_NAMES.index(name)] = val
        return ControlVector(v, self.free_mask)

    def wing_pose(self, side: str) -> WingPose:
        s = side[0]
        return WingPose(
            side,
            np.array([self.get(f"sweep_{s}"), self.get(f"incidence_{s}"), self.get(f"dihedral_{s}")]),
        )

    def wing_poses(self) -> tuple[WingPose, WingPose]:
        return self.wing_pose("left"), self.wing_pose("right")

    @staticmethod
    def zero() -> "ControlVector":
        return ControlVector(np.zeros(10))


# --- wing kinematics --------------------------------------------------------

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])


def _wing_signs(side: str) -> tuple[float, float]:
    # (sweep sign about z, dihedral sign about x) realizing the mirror pair
    return (1.0, -1.0) if side == "right" else (-1.0, 1.0)


def wing_rotation_batch(tau, side: str) -> np.ndarray:
    """Wing-to-body rotation matrices for angle triples [sweep, inc, dihedral]."""
    tau = np.asarray(tau)
    sz, sx = _wing_signs(side)
    return _rz(sz * tau[..., 0]) @ _ry(tau[..., 1]) @ _rx(sx * tau[..., 2])


def wing_rotation(pose: WingPose) -> np.ndarray:
    return wing_rotation_batch(pose.angles[None, :], pose.side)[0]


def wing_omega_batch(tau, tau_rate, side: str) -> np.ndarray:
    """Wing angular velocity relative to the body, body frame, for a batch."""
    tau = np.asarray(tau)
    tau_rate = np.asarray(tau_rate)
    sz, sx = _wing_signs(side)
    rz = _rz(sz * tau[..., 0])
    rzy = rz @ _ry(tau[..., 1])
    w = (
        (sz * tau_rate[..., 0])[..., None] * _EZ
        + tau_rate[..., 1][..., None] * (rz @ _EY)
        + (sx * tau_rate[..., 2])[..., None] * (rzy @ _EX)
    )
    return w


def wing_omega(pose: WingPose) -> np.ndarray:
    return wing_omega_batch(pose.angles[None, :], pose.rates[None, :], pose.side)[0]


def _pose_pair(wings: Sequence[WingPose]) -> tuple[WingPose, WingPose]:
    left = next(w for w in wings if w.side == "left")
    right = next(w for w in wings if w.side == "right")
    return left, right


# --- per-body kinematics ----------------------------------------------------


def body_kinematics(config: AirframeConfig, state: AircraftState, wings) -> dict:
    """Earth-frame position, velocity, and angular velocity of every body."""
    left, right = _pose_pair(wings)
    r_eb = rotation_from_euler(state.euler)
    omega0 = rate_map(state.euler) @ state.euler_rates
    vb = r_eb.T @ state.vel
    out = {}
    for body in config.bodies:
        if body.group == "fuselage":
            r = body.com_offset
            x = state.pos + r_eb @ r
            v = r_eb @ (vb + np.cross(omega0, r))
            w = r_eb @ omega0
        else:
            pose = left if body.side == "left" else right
            r_bw = wing_rotation(pose)
            ww = wing_omega(pose)
            r = config.wing_root + r_bw @ body.com_offset
            x = state.pos + r_eb @ r
            v = r_eb @ (vb + np.cross(omega0, r) + np.cross(ww, r_bw @ body.com_offset))
            w = r_eb @ (omega0 + ww)
        out[body.id] = {"pos": x, "vel": v, "omega": w}
    return out


# --- kinetic energy and EOM assembly ----------------------------------------


class _KineticModel:
    """Stacked body data for fast batched kinetic-energy evaluation."""

    def __init__(self, config: AirframeConfig):
        fus = config.fuselage_bodies()
        self.m_f = np.array([b.mass for b in fus])
        self.r_f = np.stack([b.com_offset for b in fus])
        self.i_f = np.stack([b.inertia for b in fus])
        self.l_h = config.wing_root
        self.wings = {}
        for side in ("left", "right"):
            b = config.wing(side)
            self.wings[side] = (b.mass, b.com_offset, b.inertia)

    def energy_batch(self, qdot, theta, convention, tau_l, tau_r, rate_l, rate_r):
        """Kinetic energy for a batch of samples; complex-safe.

        qdot: (n, 6) [earth-frame vel of S, euler rates]; theta: (n, 3);
        tau_*: (n, 3) wing angles; rate_*: (n, 3) wing angle rates.
        """
        r_eb = rotation_matrix_batch(theta, convention)
        omega_map = rate_map_batch(theta, convention)
        vb = np.einsum("nji,nj->ni", r_eb, qdot[:, 0:3])
        w0 = np.einsum("nij,nj->ni", omega_map, qdot[:, 3:6])

        # fuselage-group bodies
        u = vb[:, None, :] + np.cross(w0[:, None, :], self.r_f[None, :, :])
        ke = 0.5 * np.einsum("m,nmi,nmi->n", self.m_f, u, u)
        ke = ke + 0.5 * np.einsum("ni,mij,nj->n", w0, self.i_f, w0)

        # wings
        for side, tau, rate in (("left", tau_l, rate_l), ("right", tau_r, rate_r)):
            mass, l_i, inertia = self.wings[side]
            r_bw = wing_rotation_batch(tau, side)
            ww = wing_omega_batch(tau, rate, side)
            arm = np.einsum("nij,j->ni", r_bw, l_i)
            r = self.l_h[None, :] + arm
            u = vb + np.cross(w0, r) + np.cross(ww, arm)
            ke = ke + 0.5 * mass * np.einsum("ni,ni->n", u, u)
            w_tot = np.einsum("nji,nj->ni", r_bw, w0 + ww)
            ke = ke + 0.5 * np.einsum("ni,ij,nj->n", w_tot, inertia, w_tot)
        return ke


_kinetic_cache: dict[int, _KineticModel] = {}


def _kinetic_model(config: AirframeConfig) -> _KineticModel:
    key = id(config)
    model = _kinetic_cache.get(key)
    if model is None:
        model = _KineticModel(config)
        if len(_kinetic_cache) > 64:
            _kinetic_cache.clear()
        _kinetic_cache[key] = model
    return model


def kinetic_energy(config: AirframeConfig, state: AircraftState, wings) -> float:
    left, right = _pose_pair(wings)
    model = _kinetic_model(config)
    qdot = np.concatenate([state.vel, state.euler_rates])[None, :]
    k = model.energy_batch(
        qdot,
        state.euler.as_array()[None, :],
        state.convention,
        left.angles[None, :],
        right.angles[None, :],
        left.rates[None, :],
        right.rates[None, :],
    )
    return float(k[0])


_PAIR_IJ = [(i, j) for i in range(6) for j in range(i + 1, 6)]


def _mass_and_bias(config, state, wings, frozen_morph=False):
    """Generalized mass matrix and Euler-Lagrange bias at the given state.

    Returns (M, bias) with M qddot = Q_external + bias. With frozen_morph the
    wing rates/accelerations are treated as zero, isolating the part of the
    bias that survives without morphing motion.
    """
    left, right = _pose_pair(wings)
    model = _kinetic_model(config)
    h = _COMPLEX_STEP
    theta = state.euler.as_array()
    qdot = np.concatenate([state.vel, state.euler_rates])
    if frozen_morph:
        rates = {"left": np.zeros(3), "right": np.zeros(3)}
        accels = {"left": np.zeros(3), "right": np.zeros(3)}
    else:
        rates = {"left": left.rates, "right": right.rates}
        accels = {"left": left.accels, "right": right.accels}

    n = 31
    qd = np.zeros((n, 6))
    qd[1:7] = np.eye(6)
    qd[7:13] = -np.eye(6)
    for k, (i, j) in enumerate(_PAIR_IJ):
        qd[13 + k, i] = 1.0
        qd[13 + k, j] = 1.0
    qd[28:31] = qdot

    th = np.repeat(theta[None, :], n, axis=0).astype(complex)
    th[:28] += 1j * h * theta_dot(state)
    th[28:31] += 1j * h * np.eye(3)

    taus = {}
    for side, pose in (("left", left), ("right", right)):
        t = np.repeat(pose.angles[None, :], n, axis=0).astype(complex)
        t[:28] += 1j * h * rates[side]
        r = np.repeat(rates[side][None, :], n, axis=0).astype(complex)
        r[:28] += 1j * h * accels[side]
        taus[side] = (t, r)

    ke = model.energy_batch(
        qd.astype(complex),
        th,
        state.convention,
        taus["left"][0],
        taus["right"][0],
        taus["left"][1],
        taus["right"][1],
    )
    a = ke.real
    ad = ke.imag / h

    def unpack(vals):
        k0 = vals[0]
        c = 0.5 * (vals[1:7] - vals[7:13])
        m = np.empty((6, 6))
        diag = 2.0 * (vals[1:7] - c - k0)
        np.fill_diagonal(m, diag)
        for k, (i, j) in enumerate(_PAIR_IJ):
            mij = vals[13 + k] - vals[1 + i] - vals[1 + j] + k0
            m[i, j] = mij
            m[j, i] = mij
        return m, c

    m, _ = unpack(a)
    mdot, cdot = unpack(ad)
    dk_dtheta = ke[28:31].imag / h
    dk_dq = np.concatenate([np.zeros(3), dk_dtheta])
    bias = dk_dq - mdot @ qdot - cdot
    return m, bias


def theta_dot(state: AircraftState) -> np.ndarray:
    return state.euler_rates


def assemble_eom(config: AirframeConfig, state: AircraftState, wings) -> EomCoefficients:
    """Generalized mass matrix and forcing decomposition at the given state."""
    if rate_map_is_singular(state.euler):
        raise SingularAttitudeError(
            "Euler rate map singular; switch conventions before assembling"
        )
    b1, bias_full = _mass_and_bias(config, state, wings, frozen_morph=False)
    _, bias_frozen = _mass_and_bias(config, state, wings, frozen_morph=True)
    return EomCoefficients(b1=b1, b0z=-bias_frozen, f0=bias_full - bias_frozen)


def convention_switch(state: AircraftState) -> AircraftState:
    """Re-express the state in the other Euler sequence.

    The rotation matrix, earth-frame angular velocity, velocity, and position
    are preserved exactly; the Euler rates are re-derived through the new
    sequence's rate map.
    """
    r = rotation_from_euler(state.euler)
    omega_b = rate_map(state.euler) @ state.euler_rates
    target = state.convention.other
    euler_new = euler_from_rotation(r, target)
    omega_map = rate_map(euler_new)
    det = np.linalg.det(omega_map)
    # the two singular axes are orthogonal, so this cannot trip for states
    # switched away from a pole
    assert abs(det) > 1e-12, "both Euler sequences singular at this attitude"
    rates_new = np.linalg.solve(omega_map, omega_b)
    return AircraftState(state.vel.copy(), rates_new, state.pos.copy(), euler_new)
