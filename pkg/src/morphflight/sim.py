"""Adaptive Dormand-Prince 4(5) time integration with Euler-pole switching.

The integrator advances the 12-state vector with an embedded 4th/5th order
pair and a classic step-size controller. After each *accepted* step the
active Euler sequence's singular angle is checked against a threshold; when
it exceeds the threshold the state is re-expressed in the other sequence, so
no derivative evaluation ever bridges a representation change.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .aero import get_aero_model
from .airframe import AircraftState, AirframeConfig, ControlVector, WingPose
from .dynamics import state_derivative
from .frames import Convention

# Dormand-Prince 4(5) coefficients
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_C = [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

H_MIN = 1e-12
H_INIT = 1e-3
POLE_THRESHOLD = 1.047  # rad, switch Euler sequences beyond this


class StepUnderflowError(RuntimeError):
    """Raised when the adaptive step size falls below the floor."""


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = np.inf
    pole_threshold: float = POLE_THRESHOLD
    probe_ids: tuple = ()

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


def rk45_step(derivative: Callable, z: np.ndarray, t: float, h: float, options: IntegratorOptions):
    """One embedded 4(5) attempt. Returns (z_next, error_norm, h_next, accepted).

    The 5th-order solution propagates; the 4th-order one supplies the error
    estimate. Accepted iff the mixed error norm is <= 1.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    k = np.empty((7, z.size))
    k[0] = derivative(t, z)
    for i in range(1, 7):
        zi = z + h * (np.array(_A[i]) @ k[:i])
        k[i] = derivative(t + _C[i] * h, zi)
    z5 = z + h * (_B5 @ k)
    z4 = z + h * (_B4 @ k)
    scale = options.abs_tol + options.rel_tol * np.maximum(np.abs(z), np.abs(z5))
    err = float(np.sqrt(np.mean(((z5 - z4) / scale) ** 2)))
    factor = 0.9 * err ** -0.2 if err > 0 else 5.0
    h_next = h * min(5.0, max(0.2, factor))
    return z5, err, h_next, err <= 1.0


@dataclass
class Trajectory:
    """Accepted-step samples plus per-station flow probes and event log."""

    t: np.ndarray
    states: list  # AircraftState per sample
    controls: np.ndarray  # (n, 10) control values per sample
    probes: dict  # id -> {"phi": array, "v": array}
    events: list = field(default_factory=list)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory time stamps must be strictly increasing")

    def state_array(self) -> np.ndarray:
        return np.stack([s.as_vector() for s in self.states])

    def conventions(self) -> list:
        return [s.convention for s in self.states]

    def write_csv(self, path, probe_dir=None):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                "t,x,y,z,pitch,yaw,roll,u,v,w,p_rate,q_rate,r_rate,convention".split(",")
            )
            for t, s in zip(self.t, self.states):
                w.writerow(
                    [f"{t:.9g}"]
                    + [f"{v:.12g}" for v in s.pos]
                    + [f"{v:.12g}" for v in s.euler.as_array()]
                    + [f"{v:.12g}" for v in s.vel]
                    + [f"{v:.12g}" for v in s.euler_rates]
                    + [s.convention.value]
                )
        if probe_dir is not None:
            import os

            for pid, rec in self.probes.items():
                safe = pid.replace("[", "_").replace("]", "")
                with open(os.path.join(probe_dir, f"probe_{safe}.csv"), "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["t", "phi_eff", "airspeed"])
                    for t, p, v in zip(self.t, rec["phi"], rec["v"]):
                        w.writerow([f"{t:.9g}", f"{p:.12g}", f"{v:.12g}"])


class ConstantSchedule:
    """Holds one control vector (and its implied static wing poses) for all t."""

    def __init__(self, controls: ControlVector):
        self.controls = controls
        self._wings = controls.wing_poses()

    def sample(self, t: float):
        return self.controls, self._wings


def _as_schedule(schedule):
    if isinstance(schedule, ControlVector):
        return ConstantSchedule(schedule)
    if hasattr(schedule, "sample"):
        return schedule
    raise TypeError("schedule must be a ControlVector or provide .sample(t)")


def _pole_angle(state: AircraftState) -> float:
    return abs(state.euler.as_array()[state.convention.pole_index])


def simulate(
    config: AirframeConfig,
    schedule,
    state0: AircraftState,
    t_span: tuple[float, float],
    options: Optional[IntegratorOptions] = None,
) -> Trajectory:
    """Integrate the equations of motion over t_span under a control schedule."""
    options = options or IntegratorOptions()
    sched = _as_schedule(schedule)
    t0, t1 = t_span
    if t1 <= t0:
        raise ValueError("t_span must have positive duration")

    probe_idx = None
    model = get_aero_model(config)
    if options.probe_ids:
        probe_idx = [model.ids.index(pid) for pid in options.probe_ids]

    events: list = []
    times = [t0]
    states = [state0]
    ctrl_samples = []
    probe_phi: list = []
    probe_v: list = []

    def record_probes(state, wings):
        if probe_idx is None:
            return
        phi, speed = model.flow_arrays(state, wings)[:2]
        probe_phi.append(phi[probe_idx])
        probe_v.append(speed[probe_idx])

    state = state0
    c0, w0 = sched.sample(t0)
    ctrl_samples.append(c0.values.copy())
    record_probes(state, w0)

    t = t0
    h = min(H_INIT, options.max_step, t1 - t0)
    convention = state.convention

    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        while t < t1 - 1e-14:
            h = min(h, options.max_step, t1 - t)

            def deriv(ti, zi, _conv=convention):
                st = AircraftState.from_vector(zi, _conv)
                ctrl, wings = sched.sample(ti)
                return state_derivative(config, st, ctrl, wings)

            z = state.as_vector()
            z_next, err, h_next, accepted = rk45_step(deriv, z, t, h, options)
            if not np.all(np.isfinite(z_next)):
                raise RuntimeError(f"non-finite state at t = {t + h:.6g} s")
            if accepted:
                t = t + h
                state = AircraftState.from_vector(z_next, convention)
                ctrl, wings = sched.sample(t)
                if _pole_angle(state) > options.pole_threshold:
                    from .airframe import convention_switch

                    state = convention_switch(state)
                    convention = state.convention
                    events.append(
                        {"t": t, "type": "pole_switch", "info": convention.value}
                    )
                times.append(t)
                states.append(state)
                ctrl_samples.append(ctrl.values.copy())
                record_probes(state, wings)
                for warn in wlist:
                    events.append(
                        {"t": t, "type": "warning", "info": str(warn.message)}
                    )
                wlist.clear()
            h = h_next
            if h < H_MIN:
                raise StepUnderflowError(f"step size underflow at t = {t:.6g} s")

    probes = {}
    if probe_idx is not None:
        phi_arr = np.stack(probe_phi)
        v_arr = np.stack(probe_v)
        for j, pid in enumerate(options.probe_ids):
            probes[pid] = {"phi": phi_arr[:, j], "v": v_arr[:, j]}

    return Trajectory(
        t=np.array(times),
        states=states,
        controls=np.stack(ctrl_samples),
        probes=probes,
        events=events,
    )
