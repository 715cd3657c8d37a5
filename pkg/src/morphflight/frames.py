"""Attitude representations: Euler angle conventions, rate maps, quaternions.

Axes: earth frame is NED-like (x forward, y right, z down, gravity along +z).
Body frame is x forward, y starboard, z down.

Two Euler sequences are supported. The angle triple is always stored as
[pitch, yaw, roll]; the sequence determines which rotation is applied when:

* ZYX_321: R = Rz(yaw) Ry(pitch) Rx(roll), singular at |pitch| = pi/2
* YZX_231: R = Ry(pitch) Rz(yaw) Rx(roll), singular at |yaw| = pi/2

The singular (second) axes of the two sequences are orthogonal, so one
convention is always usable for any proper rotation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

PITCH, YAW, ROLL = 0, 1, 2

SINGULARITY_DET_TOL = 1e-6


class Convention(enum.Enum):
    ZYX_321 = "ZYX_321"
    YZX_231 = "YZX_231"

    @property
    def pole_index(self) -> int:
        """Index (in the stored [pitch, yaw, roll] triple) of the singular angle."""
        return PITCH if self is Convention.ZYX_321 else YAW

    @property
    def other(self) -> "Convention":
        return Convention.YZX_231 if self is Convention.ZYX_321 else Convention.ZYX_321


@dataclass(frozen=True)
class EulerAngles:
    pitch: float
    yaw: float
    roll: float
    convention: Convention = Convention.ZYX_321

    def as_array(self) -> np.ndarray:
        return np.array([self.pitch, self.yaw, self.roll], dtype=float)

    @staticmethod
    def from_array(a, convention: Convention = Convention.ZYX_321) -> "EulerAngles":
        return EulerAngles(float(a[0]), float(a[1]), float(a[2]), convention)

    def near_pole(self, margin: float = 0.2) -> bool:
        """True when the singular angle is within `margin` rad of +-pi/2."""
        a = (self.pitch, self.yaw, self.roll)[self.convention.pole_index]
        return abs(abs(a) - np.pi / 2.0) < margin


def _axis_rotations(angles: np.ndarray, convention: Convention):
    """Per-axis rotation matrices for a batch of angle triples (n, 3).

    Returns (R_first, R_second, R_third) applied as R = R1 @ R2 @ R3,
    complex-safe for complex-step differentiation.
    """
    angles = np.asarray(angles)
    th, ps, ph = angles[..., PITCH], angles[..., YAW], angles[..., ROLL]
    if convention is Convention.ZYX_321:
        return _rz(ps), _ry(th), _rx(ph)
    return _ry(th), _rz(ps), _rx(ph)


def _rx(a):
    a = np.asarray(a)
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(a.shape + (3, 3), dtype=c.dtype)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def _ry(a):
    a = np.asarray(a)
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(a.shape + (3, 3), dtype=c.dtype)
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 1, 1] = 1.0
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    return out


def _rz(a):
    a = np.asarray(a)
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(a.shape + (3, 3), dtype=c.dtype)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1.0
    return out


def rotation_matrix_batch(angles, convention: Convention) -> np.ndarray:
    """Body-to-earth rotation matrices for a batch of angle triples (n, 3)."""
    r1, r2, r3 = _axis_rotations(angles, convention)
    return r1 @ r2 @ r3


def rotation_from_euler(angles: EulerAngles) -> np.ndarray:
    """Body-to-earth rotation matrix R such that v_earth = R @ v_body."""
    return rotation_matrix_batch(angles.as_array()[None, :], angles.convention)[0]


def rate_map_batch(angles, convention: Convention) -> np.ndarray:
    """Matrices mapping stored-order Euler angle rates to body angular velocity.

    omega_body = Omega @ [pitch_rate, yaw_rate, roll_rate]. Columns are the
    body-frame directions of each elementary rotation axis: the k-th rotation
    axis is carried through the rotations applied after it.
    """
    angles = np.asarray(angles)
    r1, r2, r3 = _axis_rotations(angles, convention)
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    r23 = r2 @ r3
    if convention is Convention.ZYX_321:
        first_axis, second_axis = ez, ey  # yaw about z, then pitch about y
        col_yaw = np.swapaxes(r23, -1, -2) @ first_axis
        col_pitch = np.swapaxes(r3, -1, -2) @ second_axis
    else:
        first_axis, second_axis = ey, ez  # pitch about y, then yaw about z
        col_pitch = np.swapaxes(r23, -1, -2) @ first_axis
        col_yaw = np.swapaxes(r3, -1, -2) @ second_axis
    col_roll = np.broadcast_to(ex, col_yaw.shape)
    return np.stack([col_pitch, col_yaw, col_roll], axis=-1)


def rate_map(angles: EulerAngles) -> np.ndarray:
    """Rate-to-body-angular-velocity map Omega for a single attitude."""
    return rate_map_batch(angles.as_array()[None, :], angles.convention)[0]


def rate_map_is_singular(angles: EulerAngles) -> bool:
    return abs(np.linalg.det(rate_map(angles))) < SINGULARITY_DET_TOL


def euler_from_rotation(r: np.ndarray, convention: Convention) -> EulerAngles:
    """Extract stored-order Euler angles from a body-to-earth rotation matrix."""
    if convention is Convention.ZYX_321:
        pitch = np.arcsin(np.clip(-r[2, 0], -1.0, 1.0))
        yaw = np.arctan2(r[1, 0], r[0, 0])
        roll = np.arctan2(r[2, 1], r[2, 2])
    else:
        yaw = np.arcsin(np.clip(r[1, 0], -1.0, 1.0))
        pitch = np.arctan2(-r[2, 0], r[0, 0])
        roll = np.arctan2(-r[1, 2], r[1, 1])
    return EulerAngles(float(pitch), float(yaw), float(roll), convention)


def skew(v) -> np.ndarray:
    v = np.asarray(v)
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]],
        dtype=v.dtype if np.iscomplexobj(v) else float,
    )


# --- quaternions (scalar-first, unit) ---------------------------------------


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    h = 0.5 * angle
    return np.concatenate([[np.cos(h)], np.sin(h) * axis])


def quat_multiply(q1, q2) -> np.ndarray:
    w1, v1 = q1[0], np.asarray(q1[1:])
    w2, v2 = q2[0], np.asarray(q2[1:])
    w = w1 * w2 - v1 @ v2
    v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    return np.concatenate([[w], v])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    t = np.trace(r)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(1.0 + r[i, i] - r[j, j] - r[k, k]) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    return q / np.linalg.norm(q)


def quat_rotate(q, v) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def rotation_angle_between(r1: np.ndarray, r2: np.ndarray) -> float:
    """Geodesic angle (rad) between two rotation matrices."""
    c = 0.5 * (np.trace(r1 @ r2.T) - 1.0)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))
