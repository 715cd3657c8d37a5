"""Stability characterization of trim points.

Three views: static acceleration gradients (restoring-moment signs), the
12x12 Jacobian of the state derivative with its flight-dynamic eigenmodes,
and a nonlinear yaw-perturbation simulation yielding endpoint deviation
metrics (spiral-divergence surrogate).

State ordering everywhere: z = [u, v, w, pitch_rate, yaw_rate, roll_rate,
x, y, z, pitch, yaw, roll] with earth-frame translational velocity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .airframe import AircraftState, AirframeConfig
from .dynamics import state_derivative
from .frames import Convention, euler_from_rotation, rotation_from_euler
from .sim import IntegratorOptions, simulate
from .trim import TrimPoint, trim_residual, trim_state

FD_STEP_VEL = 1e-6  # velocities and angle rates
FD_STEP_ANG = 1e-7  # angles and positions
OFF_TRIM_TOL = 1e-6

LONGITUDINAL_IDX = np.array([0, 2, 3, 6, 8, 9])  # u, w, pitch rate, x, z, pitch
LATERAL_IDX = np.array([1, 4, 5, 7, 10, 11])  # v, yaw rate, roll rate, y, yaw, roll

DOMINANCE_RATIO = 0.6
FAST_SLOW_SPLIT = 1.0  # rad/s, separates roll/short-period from spiral/phugoid


class ModeLabel(enum.Enum):
    Phugoid = "Phugoid"
    ShortPeriod = "ShortPeriod"
    DutchRoll = "DutchRoll"
    Roll = "Roll"
    Spiral = "Spiral"
    Unclassified = "Unclassified"


@dataclass(frozen=True)
class Mode:
    eigenvalue: complex
    damping_ratio: float
    natural_frequency: float  # rad/s, |lambda|
    eigenvector: np.ndarray
    label: ModeLabel


@dataclass(frozen=True)
class ModalSet:
    modes: tuple

    def __post_init__(self):
        if len(self.modes) != 12:
            raise ValueError("modal set must carry 12 eigenvalues")

    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    def labeled(self, label: ModeLabel) -> list:
        return [m for m in self.modes if m.label is label]

    @property
    def max_real(self) -> float:
        return float(np.max(self.eigenvalues().real))


@dataclass(frozen=True)
class DeviationMetrics:
    delta_psi: float
    delta_phi: float
    t_end: float
    delta_psi_0: float  # applied yaw perturbation, rad

    def __post_init__(self):
        if self.delta_psi < 0 or self.delta_phi < 0:
            raise ValueError("deviation metrics must be non-negative")


def _require_on_trim(config: AirframeConfig, point: TrimPoint):
    res = float(np.max(np.abs(trim_residual(config, point.target, point.controls))))
    if res > OFF_TRIM_TOL:
        raise ValueError(
            f"refusing to analyze off-trim point: residual {res:.3e} > {OFF_TRIM_TOL:.0e}"
        )


def linearize(config: AirframeConfig, point: TrimPoint) -> np.ndarray:
    """Central-difference 12x12 Jacobian of the state derivative at trim."""
    _require_on_trim(config, point)
    z0 = trim_state(point.target).as_vector()
    controls = point.controls
    steps = np.concatenate([np.full(6, FD_STEP_VEL), np.full(6, FD_STEP_ANG)])
    jac = np.empty((12, 12))
    for j in range(12):
        zp, zm = z0.copy(), z0.copy()
        zp[j] += steps[j]
        zm[j] -= steps[j]
        fp = state_derivative(config, AircraftState.from_vector(zp), controls)
        fm = state_derivative(config, AircraftState.from_vector(zm), controls)
        jac[:, j] = (fp - fm) / (2.0 * steps[j])
    return jac


def _subspace_power(v: np.ndarray, idx: np.ndarray, airspeed: float) -> float:
    w = v.copy()
    w[0:3] = w[0:3] / airspeed  # nondimensionalize translational velocities
    w = w / np.linalg.norm(w)
    return float(np.sum(np.abs(w[idx]) ** 2))


def modal_analysis(jac: np.ndarray, airspeed: float = 25.0) -> ModalSet:
    """Eigen-decomposition with heuristic flight-dynamic mode labels.

    A mode is longitudinal/lateral when its (velocity-scaled) eigenvector
    concentrates at least DOMINANCE_RATIO of its power in that subspace;
    otherwise Unclassified. Oscillatory lateral modes are Dutch roll; fast
    real roll-rate-dominant modes are roll subsidence; slow real lateral
    modes are spiral. Longitudinal oscillatory pairs split fast/slow into
    short period and phugoid.
    """
    vals, vecs = np.linalg.eig(np.asarray(jac, dtype=float))
    labels = [ModeLabel.Unclassified] * 12

    long_pairs = []  # (representative index, |lambda|) of longitudinal osc. pairs
    for i in range(12):
        lam = vals[i]
        v = vecs[:, i]
        p_long = _subspace_power(v, LONGITUDINAL_IDX, airspeed)
        p_lat = _subspace_power(v, LATERAL_IDX, airspeed)
        if abs(lam) < 1e-6:
            continue  # kinematic zero modes (position/heading invariance, FD noise)
        if p_lat >= DOMINANCE_RATIO:
            if abs(lam.imag) > 1e-8:
                labels[i] = ModeLabel.DutchRoll
            elif abs(lam) >= FAST_SLOW_SPLIT:
                w = v.copy()
                w[0:3] /= airspeed
                if np.argmax(np.abs(w)) == 5:  # roll-rate state
                    labels[i] = ModeLabel.Roll
            else:
                labels[i] = ModeLabel.Spiral
        elif p_long >= DOMINANCE_RATIO and abs(lam.imag) > 1e-8:
            if lam.imag > 0:
                long_pairs.append((i, abs(lam)))

    if len(long_pairs) == 1:
        i, mag = long_pairs[0]
        labels[i] = ModeLabel.ShortPeriod if mag >= 2.0 else ModeLabel.Phugoid
    elif len(long_pairs) >= 2:
        long_pairs.sort(key=lambda t: t[1])
        labels[long_pairs[0][0]] = ModeLabel.Phugoid
        labels[long_pairs[-1][0]] = ModeLabel.ShortPeriod
    # propagate longitudinal labels to the conjugate partners
    for i in range(12):
        if labels[i] in (ModeLabel.Phugoid, ModeLabel.ShortPeriod):
            for k in range(12):
                if k != i and np.isclose(vals[k], np.conj(vals[i])):
                    labels[k] = labels[i]

    modes = []
    for i in range(12):
        lam = vals[i]
        mag = abs(lam)
        zeta = float(-lam.real / mag) if mag > 0 else 0.0
        modes.append(
            Mode(
                eigenvalue=complex(lam),
                damping_ratio=zeta,
                natural_frequency=float(mag),
                eigenvector=vecs[:, i],
                label=labels[i],
            )
        )
    return ModalSet(tuple(modes))


def static_gradients(config: AirframeConfig, point: TrimPoint) -> dict:
    """Central-difference pitch/yaw restoring gradients at trim.

    Returns d(pitch accel)/d(alpha) and d(yaw accel)/d(beta); negative
    values indicate static stability.
    """
    _require_on_trim(config, point)
    z0 = trim_state(point.target).as_vector()
    controls = point.controls
    h = 1e-6
    out = {}
    for name, state_idx, accel_idx in (("dalpha", 9, 3), ("dbeta", 10, 4)):
        zp, zm = z0.copy(), z0.copy()
        zp[state_idx] += h
        zm[state_idx] -= h
        fp = state_derivative(config, AircraftState.from_vector(zp), controls)
        fm = state_derivative(config, AircraftState.from_vector(zm), controls)
        out[name] = float((fp[accel_idx] - fm[accel_idx]) / (2.0 * h))
    return out


def perturbation_metrics(
    config: AirframeConfig,
    point: TrimPoint,
    delta_psi: float = 0.05,
    t_end: float = 15.0,
    options: Optional[IntegratorOptions] = None,
) -> DeviationMetrics:
    """Endpoint yaw/roll deviation after a yaw kick, controls frozen at trim."""
    _require_on_trim(config, point)
    options = options or IntegratorOptions(rel_tol=1e-7, abs_tol=1e-9)
    st = trim_state(point.target)
    kicked = AircraftState(
        st.vel,
        st.euler_rates,
        st.pos,
        type(st.euler)(st.euler.pitch, st.euler.yaw + delta_psi, st.euler.roll, st.euler.convention),
    )
    traj = simulate(config, point.controls, kicked, (0.0, t_end), options)
    final = traj.states[-1]
    # express the endpoint attitude in the trim-state sequence regardless of
    # any pole switches along the way
    eul = euler_from_rotation(rotation_from_euler(final.euler), Convention.ZYX_321)
    dpsi = abs(eul.yaw - point.target.beta) / delta_psi
    dphi = abs(eul.roll - point.target.roll) / delta_psi
    return DeviationMetrics(
        delta_psi=float(dpsi), delta_phi=float(dphi), t_end=t_end, delta_psi_0=delta_psi
    )
