"""Trim solving and trim-space continuation.

A trim state pins the aircraft at z_tr = [U, 0, ..., 0, alpha, beta, roll]
(earth-frame velocity along earth x, fuselage orientation prescribed) and
solves for the control configuration that zeroes the six generalized
accelerations. Two channel sets are supported:

* pitch (3-DOF, symmetric): thrust, elevator, symmetric wing incidence —
  residuals are the axial, vertical, and pitch accelerations;
* general (6-DOF): thrust, elevator, rudder, left/right incidence, and one
  proxy morph angle (dihedral or sweep) on the actuated wing — all six
  accelerations.

The non-actuated wing holds the dihedral constraint Gamma; which wing that
is follows the constraint policy, resolved by the sign of the target
sideslip (at beta = 0 the right wing is frozen, an arbitrary documented
tie-break that the mirror symmetry makes observationally irrelevant).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .airframe import AircraftState, AirframeConfig, ControlVector, CONTROL_NAMES
from .dynamics import state_derivative
from .frames import Convention, EulerAngles

RESIDUAL_TOL = 1e-8
MAX_ITER = 50
FD_STEP = 1e-6
MAX_DAMPING = 8
JACOBIAN_COND_LIMIT = 1e12

_PITCH_RESIDUAL_IDX = np.array([0, 2, 3])  # axial, vertical, pitch accelerations
_GENERAL_RESIDUAL_IDX = np.arange(6)


class ConstraintPolicy(enum.Enum):
    InboardFrozen = "InboardFrozen"
    OutboardFrozen = "OutboardFrozen"
    LeftFrozen = "LeftFrozen"
    RightFrozen = "RightFrozen"


class MorphChannel(enum.Enum):
    Dihedral = "Dihedral"
    Sweep = "Sweep"


@dataclass(frozen=True)
class TrimTarget:
    alpha: float
    beta: float
    airspeed: float
    roll: float = 0.0
    gamma: float = 0.0
    policy: ConstraintPolicy = ConstraintPolicy.InboardFrozen
    channel: MorphChannel = MorphChannel.Dihedral

    def __post_init__(self):
        if self.airspeed <= 0:
            raise ValueError("trim airspeed must be positive")

    def frozen_side(self) -> str:
        """Which wing holds the dihedral constraint for this target."""
        if self.policy is ConstraintPolicy.LeftFrozen:
            return "left"
        if self.policy is ConstraintPolicy.RightFrozen:
            return "right"
        if self.beta == 0.0:
            return "right"  # documented tie-break
        # rightwards yaw (beta > 0): the left wing is inboard
        inboard = "left" if self.beta > 0 else "right"
        if self.policy is ConstraintPolicy.InboardFrozen:
            return inboard
        return "right" if inboard == "left" else "left"


@dataclass(frozen=True)
class TrimPoint:
    target: TrimTarget
    controls: ControlVector
    residual_norm: float
    converged: bool
    active_limits: tuple = ()
    iterations: int = 0


def trim_state(target: TrimTarget, convention: Convention = Convention.ZYX_321) -> AircraftState:
    return AircraftState(
        vel=np.array([target.airspeed, 0.0, 0.0]),
        euler_rates=np.zeros(3),
        pos=np.zeros(3),
        euler=EulerAngles(target.alpha, target.beta, target.roll, convention),
    )


@dataclass(frozen=True)
class _Channel:
    """One free trim variable mapped onto one or more control entries."""

    name: str
    controls: tuple  # control names receiving this variable's value

    def value(self, cv: ControlVector) -> float:
        return cv.get(self.controls[0])

    def limits(self, config: AirframeConfig) -> tuple[float, float]:
        return config.limits_for(self.controls[0])


def trim_channels(target: TrimTarget, mode: str) -> list[_Channel]:
    if mode == "pitch":
        return [
            _Channel("thrust", ("thrust",)),
            _Channel("elevator", ("elevator",)),
            _Channel("incidence_sym", ("incidence_l", "incidence_r")),
        ]
    side = "l" if target.frozen_side() == "right" else "r"  # actuated wing
    morph = "dihedral" if target.channel is MorphChannel.Dihedral else "sweep"
    return [
        _Channel("thrust", ("thrust",)),
        _Channel("elevator", ("elevator",)),
        _Channel("rudder", ("rudder",)),
        _Channel("incidence_l", ("incidence_l",)),
        _Channel("incidence_r", ("incidence_r",)),
        _Channel(f"{morph}_{side}", (f"{morph}_{side}",)),
    ]


def base_controls(target: TrimTarget) -> ControlVector:
    """Frozen-entry baseline: both dihedrals at Gamma, everything else zero."""
    return ControlVector.zero().with_values(
        dihedral_l=target.gamma, dihedral_r=target.gamma
    )


def _apply(channels, base: ControlVector, x) -> ControlVector:
    kw = {}
    for ch, v in zip(channels, x):
        for name in ch.controls:
            kw[name] = v
    cv = base.with_values(**kw)
    mask = np.zeros(10, dtype=bool)
    for ch in channels:
        for name in ch.controls:
            mask[CONTROL_NAMES.index(name)] = True
    return ControlVector(cv.values, mask)


def trim_residual(
    config: AirframeConfig, target: TrimTarget, controls: ControlVector
) -> np.ndarray:
    """Six generalized accelerations at the target trim state."""
    zdot = state_derivative(config, trim_state(target), controls)
    return zdot[:6]


def _default_mode(target: TrimTarget) -> str:
    return "pitch" if target.beta == 0.0 and target.roll == 0.0 else "general"


def solve_trim(
    config: AirframeConfig,
    target: TrimTarget,
    guess: Optional[ControlVector] = None,
    mode: Optional[str] = None,
) -> TrimPoint:
    """Damped Newton solve of the trim residual over the free channels."""
    mode = mode or _default_mode(target)
    channels = trim_channels(target, mode)
    idx = _PITCH_RESIDUAL_IDX if mode == "pitch" else _GENERAL_RESIDUAL_IDX
    base = base_controls(target)
    lims = np.array([ch.limits(config) for ch in channels])
    if guess is not None:
        x = np.array([guess.get(ch.controls[0]) for ch in channels])
    else:
        x = np.array([ch.value(base) for ch in channels])
    x = np.clip(x, lims[:, 0], lims[:, 1])

    def residual(xv):
        return trim_residual(config, target, _apply(channels, base, xv))[idx]

    f = residual(x)
    norm = np.max(np.abs(f))
    it = 0
    converged = norm < RESIDUAL_TOL
    failed = False
    while not converged and it < MAX_ITER:
        it += 1
        jac = np.empty((len(idx), len(channels)))
        for j in range(len(channels)):
            xp = x.copy()
            xp[j] += FD_STEP
            jac[:, j] = (residual(xp) - f) / FD_STEP
        if np.linalg.cond(jac) > JACOBIAN_COND_LIMIT:
            failed = True
            break
        step = np.linalg.solve(jac, -f)
        scale = 1.0
        for _ in range(MAX_DAMPING + 1):
            x_new = np.clip(x + scale * step, lims[:, 0], lims[:, 1])
            f_new = residual(x_new)
            norm_new = np.max(np.abs(f_new))
            if norm_new < norm or norm_new < RESIDUAL_TOL:
                break
            scale *= 0.5
        else:
            failed = True
            break
        if norm_new >= norm and norm_new >= RESIDUAL_TOL:
            failed = True
            break
        x, f, norm = x_new, f_new, norm_new
        converged = norm < RESIDUAL_TOL
    active = tuple(
        ch.name
        for j, ch in enumerate(channels)
        if np.isclose(x[j], lims[j, 0]) or np.isclose(x[j], lims[j, 1])
    )
    if failed or (not converged):
        converged = False
    cv = _apply(channels, base, x)
    return TrimPoint(
        target=target,
        controls=cv,
        residual_norm=float(norm),
        converged=converged,
        active_limits=active,
        iterations=it,
    )


def continue_path(
    config: AirframeConfig,
    targets: Sequence[TrimTarget],
    guess: Optional[ControlVector] = None,
    mode: Optional[str] = None,
) -> list[TrimPoint]:
    """Natural continuation: each solve seeded by the previous solution.

    Halts at the first non-converged point (which is included in the returned
    list as the boundary marker).
    """
    points: list[TrimPoint] = []
    for i, target in enumerate(targets):
        tp = solve_trim(config, target, guess=guess, mode=mode)
        points.append(tp)
        if not tp.converged:
            if i == 0:
                raise RuntimeError(
                    f"continuation seed failed: residual {tp.residual_norm:.3e}, "
                    f"active limits {tp.active_limits}"
                )
            break
        guess = tp.controls
    return points


def mirror_point(tp: TrimPoint) -> TrimPoint:
    """The beta -> -beta mirror image of a trim point.

    Longitudinal controls are unchanged; rudder and aileron negate; wing
    morph angles swap sides.
    """
    t = tp.target
    pol = {
        ConstraintPolicy.LeftFrozen: ConstraintPolicy.RightFrozen,
        ConstraintPolicy.RightFrozen: ConstraintPolicy.LeftFrozen,
    }.get(t.policy, t.policy)
    target = replace(t, beta=-t.beta, policy=pol)
    cv = tp.controls
    mirrored = ControlVector.zero().with_values(
        thrust=cv.thrust,
        elevator=cv.elevator,
        rudder=-cv.rudder,
        aileron=-cv.aileron,
        sweep_l=cv.sweep_r,
        incidence_l=cv.incidence_r,
        dihedral_l=cv.dihedral_r,
        sweep_r=cv.sweep_l,
        incidence_r=cv.incidence_l,
        dihedral_r=cv.dihedral_l,
    )
    return TrimPoint(
        target=target,
        controls=ControlVector(mirrored.values, cv.free_mask.copy()),
        residual_norm=tp.residual_norm,
        converged=tp.converged,
        active_limits=tp.active_limits,
        iterations=tp.iterations,
    )


@dataclass
class TrimSpaceGrid:
    alphas: np.ndarray
    betas: np.ndarray
    points: dict  # (i, j) -> TrimPoint; absent cells were never reached
    gamma: float
    policy: ConstraintPolicy
    channel: MorphChannel
    airspeed: float

    def converged_mask(self) -> np.ndarray:
        m = np.zeros((len(self.alphas), len(self.betas)), dtype=bool)
        for (i, j), tp in self.points.items():
            m[i, j] = tp.converged
        return m

    def area(self) -> float:
        """Converged-region area in rad^2 (cell counting)."""
        da = float(self.alphas[1] - self.alphas[0]) if len(self.alphas) > 1 else 1.0
        db = float(self.betas[1] - self.betas[0]) if len(self.betas) > 1 else 1.0
        return float(self.converged_mask().sum()) * da * db

    def write_csv(self, path):
        cols = "alpha,beta,converged,thrust,elevator,rudder,inc_L,inc_R,sweep_L,sweep_R,dih_L,dih_R,active_limits"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols.split(","))
            for i, a in enumerate(self.alphas):
                for j, b in enumerate(self.betas):
                    tp = self.points.get((i, j))
                    if tp is None:
                        continue
                    cv = tp.controls
                    w.writerow(
                        [f"{a:.10g}", f"{b:.10g}", int(tp.converged)]
                        + [
                            f"{v:.10g}"
                            for v in (
                                cv.thrust,
                                cv.elevator,
                                cv.rudder,
                                cv.incidence_l,
                                cv.incidence_r,
                                cv.sweep_l,
                                cv.sweep_r,
                                cv.dihedral_l,
                                cv.dihedral_r,
                            )
                        ]
                        + [";".join(tp.active_limits)]
                    )


def _ray(config, make_target, indices, seed_guess, out, key):
    """Continue outward along one grid ray, stopping at the boundary."""
    guess = seed_guess
    for k in indices:
        target = make_target(k)
        tp = solve_trim(config, target, guess=guess, mode="general")
        out[key(k)] = tp
        if not tp.converged:
            break
        guess = tp.controls


def sweep_trim_space(
    config: AirframeConfig,
    alpha_range: tuple[float, float],
    beta_range: tuple[float, float],
    gamma: float = 0.0,
    policy: ConstraintPolicy = ConstraintPolicy.InboardFrozen,
    channel: MorphChannel = MorphChannel.Dihedral,
    airspeed: float = 25.0,
    step: float = np.deg2rad(2.0),
) -> TrimSpaceGrid:
    """Flood-fill the (alpha, beta) lattice by continuation rays from (0, 0).

    The beta = 0 row is continued first in both alpha directions; each
    converged row point then seeds beta rays in both directions.
    """
    n_neg = int(np.floor((0.0 - alpha_range[0]) / step + 1e-9))
    n_pos = int(np.floor((alpha_range[1] - 0.0) / step + 1e-9))
    alphas = step * np.arange(-n_neg, n_pos + 1)
    i0 = n_neg
    m_neg = int(np.floor((0.0 - beta_range[0]) / step + 1e-9))
    m_pos = int(np.floor((beta_range[1] - 0.0) / step + 1e-9))
    betas = step * np.arange(-m_neg, m_pos + 1)
    j0 = m_neg

    def target_at(i, j):
        return TrimTarget(
            alpha=float(alphas[i]),
            beta=float(betas[j]),
            airspeed=airspeed,
            gamma=gamma,
            policy=policy,
            channel=channel,
        )

    points: dict = {}
    seed = solve_trim(config, target_at(i0, j0), mode="general")
    if not seed.converged:
        raise RuntimeError(
            f"trim-space seed failed at alpha=beta=0: residual {seed.residual_norm:.3e}"
        )
    points[(i0, j0)] = seed

    # beta = 0 row, both alpha directions
    _ray(config, lambda i: target_at(i, j0), range(i0 + 1, len(alphas)), seed.controls, points, lambda i: (i, j0))
    _ray(config, lambda i: target_at(i, j0), range(i0 - 1, -1, -1), seed.controls, points, lambda i: (i, j0))

    # beta rays from every converged row point
    for i in range(len(alphas)):
        row = points.get((i, j0))
        if row is None or not row.converged:
            continue
        _ray(config, lambda j: target_at(i, j), range(j0 + 1, len(betas)), row.controls, points, lambda j: (i, j))
        _ray(config, lambda j: target_at(i, j), range(j0 - 1, -1, -1), row.controls, points, lambda j: (i, j))

    return TrimSpaceGrid(
        alphas=alphas,
        betas=betas,
        points=points,
        gamma=gamma,
        policy=policy,
        channel=channel,
        airspeed=airspeed,
    )
