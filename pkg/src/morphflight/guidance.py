"""Open-loop nose-pointing control schedules from trim continuation.

A target path prescribes fuselage orientation (alpha, beta, roll) over time;
the schedule builder solves a trim point at every knot time, seeding each
solve with the previous knot's solution, and the resulting knot controls are
played back with piecewise-linear interpolation. Because knots are placed at
fixed phase fractions of the path period, the knot control sequence is
exactly independent of the period.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .airframe import AirframeConfig, ControlVector, WingPose, CONTROL_NAMES
from .frames import Convention, EulerAngles, euler_from_rotation, rotation_from_euler
from .trim import ConstraintPolicy, MorphChannel, TrimTarget, solve_trim

KNOTS_PER_PERIOD = 200

_MORPH_IDX = [CONTROL_NAMES.index(n) for n in
              ("sweep_l", "incidence_l", "dihedral_l", "sweep_r", "incidence_r", "dihedral_r")]


@dataclass(frozen=True)
class TargetPoint:
    alpha: float
    beta: float
    roll: float
    airspeed: float


@dataclass(frozen=True)
class ScrollPath:
    period: float
    alpha_amp: float
    beta_amp: float
    alpha_center: float = 0.0
    beta_center: float = 0.0
    airspeed: float = 25.0
    roll: float = 0.0

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("scroll period must be positive")


def scroll_target(path: ScrollPath, t: float) -> TargetPoint:
    """Spiral-out orientation target: ramped circle in the (alpha, beta) plane."""
    if t < 0:
        raise ValueError("t must be non-negative")
    phase = 2.0 * np.pi * t / path.period
    r = 0.5 * (1.0 - np.cos(phase)) if t <= path.period / 2.0 else 1.0
    return TargetPoint(
        alpha=r * (path.alpha_amp * np.cos(phase) + path.alpha_center),
        beta=r * (path.beta_amp * np.sin(phase) + path.beta_center),
        roll=path.roll,
        airspeed=path.airspeed,
    )


@dataclass(frozen=True)
class RectPath:
    """Rectangular orientation path: beta in [left, right], alpha in [lower, upper].

    An initialization leg runs from (alpha, beta) = (0, 0) to (upper, 0) at
    the perimeter traversal speed; the perimeter itself then takes one period
    per lap, corners kept sharp.
    """

    left: float
    right: float
    lower: float
    upper: float
    period: float
    airspeed: float = 25.0
    roll: float = 0.0

    def __post_init__(self):
        if not (self.left < self.right and self.lower < self.upper):
            raise ValueError("rect bounds must satisfy left < right and lower < upper")
        if self.period <= 0:
            raise ValueError("rect period must be positive")

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.upper - self.lower) + 2.0 * (self.right - self.left)

    @property
    def init_duration(self) -> float:
        return self.upper / (self.perimeter / self.period) if self.upper > 0 else 0.0


def rect_target(path: RectPath, t: float) -> TargetPoint:
    if t < 0:
        raise ValueError("t must be non-negative")
    speed = path.perimeter / path.period
    s_init = path.upper
    s = speed * t
    if s < s_init:
        return TargetPoint(alpha=s, beta=0.0, roll=path.roll, airspeed=path.airspeed)
    # perimeter arc length from the (upper, 0) entry point, rightwards first
    s = (s - s_init) % path.perimeter
    legs = [
        (path.right - 0.0, lambda u: (path.upper, u)),  # (upper,0) -> (upper,right)
        (path.upper - path.lower, lambda u: (path.upper - u, path.right)),
        (path.right - path.left, lambda u: (path.lower, path.right - u)),
        (path.upper - path.lower, lambda u: (path.lower + u, path.left)),
        (0.0 - path.left, lambda u: (path.upper, path.left + u)),
    ]
    for i, (length, point) in enumerate(legs):
        if s <= length or i == len(legs) - 1:
            a, b = point(min(s, length))
            return TargetPoint(alpha=a, beta=b, roll=path.roll, airspeed=path.airspeed)
        s -= length
    raise AssertionError("unreachable")


@dataclass
class ControlSchedule:
    """Piecewise-linear control playback through verified trim knots."""

    times: np.ndarray
    knots: list  # ControlVector per knot
    targets: list  # TargetPoint per knot
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        if len(self.knots) != len(self.times):
            raise ValueError("one control vector per knot time required")
        self._values = np.stack([k.values for k in self.knots])

    def values(self) -> np.ndarray:
        return self._values

    def controls_at(self, t: float) -> ControlVector:
        return self.sample(t)[0]

    def sample(self, t: float):
        """Interpolated controls plus wing poses carrying the interpolation rates."""
        times = self.times
        vals = self._values
        t = float(np.clip(t, times[0], times[-1]))
        k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2))
        dt = times[k + 1] - times[k]
        w = (t - times[k]) / dt
        v = (1 - w) * vals[k] + w * vals[k + 1]
        slope = (vals[k + 1] - vals[k]) / dt
        cv = ControlVector(v)
        wings = tuple(
            WingPose(
                side,
                np.array([v[i] for i in idx]),
                np.array([slope[i] for i in idx]),
            )
            for side, idx in (
                ("left", _MORPH_IDX[0:3]),
                ("right", _MORPH_IDX[3:6]),
            )
        )
        return cv, wings

    def peak_thrust(self) -> float:
        return float(np.max(self.values()[:, CONTROL_NAMES.index("thrust")]))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "alpha_tg", "beta_tg"] + list(CONTROL_NAMES))
            for t, tg, kv in zip(self.times, self.targets, self.knots):
                w.writerow(
                    [f"{t:.9g}", f"{tg.alpha:.10g}", f"{tg.beta:.10g}"]
                    + [f"{v:.10g}" for v in kv.values]
                )


class ScheduleError(RuntimeError):
    def __init__(self, msg, knot_index=None, active_limits=()):
        super().__init__(msg)
        self.knot_index = knot_index
        self.active_limits = active_limits


def build_schedule(
    config: AirframeConfig,
    target_fn: Callable[[float], TargetPoint],
    duration: float,
    knot_spacing: float,
    gamma: float = 0.0,
    policy: ConstraintPolicy = ConstraintPolicy.InboardFrozen,
    channel: MorphChannel = MorphChannel.Dihedral,
) -> ControlSchedule:
    """Trim-continuation schedule along a target path.

    The actuated-wing choice is re-resolved at every knot from the sign of
    that knot's *target* sideslip (not the simulated response).
    """
    n = int(round(duration / knot_spacing))
    times = knot_spacing * np.arange(n + 1)
    knots = []
    targets = []
    guess: Optional[ControlVector] = None
    for k, t in enumerate(times):
        tg = target_fn(float(t))
        trim_tg = TrimTarget(
            alpha=tg.alpha,
            beta=tg.beta,
            airspeed=tg.airspeed,
            roll=tg.roll,
            gamma=gamma,
            policy=policy,
            channel=channel,
        )
        tp = solve_trim(config, trim_tg, guess=guess, mode="general")
        if not tp.converged:
            raise ScheduleError(
                f"trim continuation failed at knot {k} (t = {t:.4g} s, "
                f"alpha = {tg.alpha:.4g}, beta = {tg.beta:.4g}); "
                f"active limits: {tp.active_limits}",
                knot_index=k,
                active_limits=tp.active_limits,
            )
        knots.append(tp.controls)
        targets.append(tg)
        guess = tp.controls
    return ControlSchedule(
        times=times,
        knots=knots,
        targets=targets,
        provenance={
            "gamma": gamma,
            "policy": policy.value,
            "channel": channel.value,
            "knot_spacing": knot_spacing,
        },
    )


def fuselage_orientation(state) -> tuple[float, float, float]:
    """(pitch, yaw, roll) in the primary sequence regardless of the stored tag."""
    eul = euler_from_rotation(rotation_from_euler(state.euler), Convention.ZYX_321)
    return eul.pitch, eul.yaw, eul.roll


def flow_relative_orientation(state) -> tuple[float, float, float]:
    """(alpha, beta, roll): fuselage orientation relative to the velocity direction.

    Angle of attack and sideslip are the pitch and yaw of the fuselage
    measured against a path frame whose x-axis follows the flight velocity
    (zero path roll). At a trim state with velocity along earth x this
    coincides with the earth-frame Euler angles.
    """
    v = state.vel
    speed = float(np.linalg.norm(v))
    if speed < 1e-9:
        return fuselage_orientation(state)
    chi = float(np.arctan2(v[1], v[0]))
    gam = float(np.arcsin(np.clip(-v[2] / speed, -1.0, 1.0)))
    r_path = rotation_from_euler(EulerAngles(gam, chi, 0.0, Convention.ZYX_321))
    rel = euler_from_rotation(r_path.T @ rotation_from_euler(state.euler), Convention.ZYX_321)
    return rel.pitch, rel.yaw, rel.roll


def evaluate_tracking(trajectory, target_fn) -> dict:
    """Per-axis RMS and max orientation-tracking errors of a flown trajectory.

    Errors are measured in flow-relative angles (alpha, beta, roll), matching
    the orientation definition the trim targets use.
    """
    errs = {"alpha": [], "beta": [], "roll": []}
    for t, st in zip(trajectory.t, trajectory.states):
        tg = target_fn(float(t))
        pitch, yaw, roll = flow_relative_orientation(st)
        errs["alpha"].append(pitch - tg.alpha)
        errs["beta"].append(yaw - tg.beta)
        errs["roll"].append(roll - tg.roll)
    out = {}
    for axis, e in errs.items():
        e = np.asarray(e)
        out[f"rms_{axis}"] = float(np.sqrt(np.mean(e**2)))
        out[f"max_{axis}"] = float(np.max(np.abs(e)))
    return out
