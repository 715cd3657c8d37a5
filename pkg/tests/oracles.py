"""Independent reference implementations used to validate the package.

Everything here is deliberately written with different numerics than the
package itself: finite differences instead of complex-step/polarization for
the Euler-Lagrange terms, a quaternion Newton-Euler integrator (scipy DOP853)
instead of the Euler-angle multibody formulation, direct potential-energy
gradients for gravity, and least-squares sinusoid fits for spectral
amplitudes.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from morphflight.airframe import (
    AircraftState,
    AirframeConfig,
    RigidBodyElement,
    WingPose,
    kinetic_energy,
    wing_rotation,
)
from morphflight.frames import (
    quat_from_matrix,
    quat_multiply,
    quat_to_matrix,
    rate_map,
    rotation_from_euler,
)


def make_eom_config() -> AirframeConfig:
    """Small surface-free airframe for equation-of-motion checks."""
    bodies = [
        RigidBodyElement(
            "fus", "fuselage", 4.5, np.diag([0.02, 0.55, 0.55]), np.array([0.6, 0.0, 0.0])
        ),
        RigidBodyElement(
            "bal", "fuselage", 1.0, np.zeros((3, 3)), np.array([0.48, 0.0, 0.02]), point=True
        ),
        RigidBodyElement(
            "wl", "wing", 1.0, np.diag([0.05, 0.002, 0.052]), np.array([0.0, -0.4, 0.0]), side="left"
        ),
        RigidBodyElement(
            "wr", "wing", 1.0, np.diag([0.05, 0.002, 0.052]), np.array([0.0, 0.4, 0.0]), side="right"
        ),
    ]
    return AirframeConfig(
        bodies=tuple(bodies),
        wing_root=np.array([0.8, 0.0, 0.0]),
        control_limits={"thrust": (0.0, 100.0)},
    )


def lagrangian_force_oracle(config, state, wings, qddot, hv=1e-3, ht=1e-3):
    """Generalized force required by d/dt(dK/dqdot) - dK/dq = Q, all by FD.

    The momentum dK/dqdot is evaluated by central velocity differences at
    three time points along a trajectory with the prescribed acceleration
    qddot, and differentiated in time by a second central difference.
    """
    from morphflight.frames import EulerAngles

    conv = state.convention
    theta = state.euler.as_array()
    qdot = np.concatenate([state.vel, state.euler_rates])

    def ke(qd, th, wat):
        st = AircraftState(qd[:3], qd[3:], np.zeros(3), EulerAngles(*th, conv))
        return kinetic_energy(config, st, wat)

    def momentum(t):
        th = theta + t * state.euler_rates + 0.5 * t * t * qddot[3:]
        qd = qdot + t * qddot
        wat = [
            WingPose(
                w.side,
                w.angles + t * w.rates + 0.5 * t * t * w.accels,
                w.rates + t * w.accels,
                w.accels,
            )
            for w in wings
        ]
        p = np.zeros(6)
        for i in range(6):
            e = np.zeros(6)
            e[i] = hv
            p[i] = (ke(qd + e, th, wat) - ke(qd - e, th, wat)) / (2 * hv)
        return p

    dpdt = (momentum(ht) - momentum(-ht)) / (2 * ht)
    dk_dq = np.zeros(6)
    for i in range(3):
        e = np.zeros(3)
        e[i] = ht
        dk_dq[3 + i] = (ke(qdot, theta + e, wings) - ke(qdot, theta - e, wings)) / (2 * ht)
    return dpdt - dk_dq


# --- composite rigid body (frozen wings) -------------------------------------


def composite_body(config: AirframeConfig, wing_angles=None):
    """(mass, com wrt S, inertia about com) of the frozen-wing aggregate."""
    if wing_angles is None:
        wing_angles = np.zeros(3)
    total = 0.0
    first = np.zeros(3)
    for b in config.bodies:
        r = _body_com(config, b, wing_angles)
        total += b.mass
        first += b.mass * r
    com = first / total
    inertia = np.zeros((3, 3))
    for b in config.bodies:
        r = _body_com(config, b, wing_angles) - com
        rot = np.eye(3)
        if b.group == "wing":
            rot = wing_rotation(WingPose(b.side, wing_angles))
        i_local = rot @ b.inertia @ rot.T
        inertia += i_local + b.mass * ((r @ r) * np.eye(3) - np.outer(r, r))
    return total, com, inertia


def _body_com(config, body, wing_angles):
    if body.group == "fuselage":
        return body.com_offset
    pose = WingPose(body.side, wing_angles)
    return config.wing_root + wing_rotation(pose) @ body.com_offset


def angular_momentum(config: AirframeConfig, state: AircraftState, wing_angles=None):
    """Earth-frame angular momentum of the frozen-wing aggregate about its com."""
    _, com, inertia = composite_body(config, wing_angles)
    r_eb = rotation_from_euler(state.euler)
    omega_b = rate_map(state.euler) @ state.euler_rates
    return r_eb @ (inertia @ omega_b)


def quaternion_reference(config, state0, t_eval, wing_angles=None, rtol=1e-12, atol=1e-13):
    """Force-free rigid-body attitude reference: Newton-Euler + quaternions.

    Returns body-to-earth rotation matrices at t_eval, integrated with scipy
    DOP853 completely independently of the Euler-angle formulation.
    """
    _, _, inertia = composite_body(config, wing_angles)
    i_inv = np.linalg.inv(inertia)
    r0 = rotation_from_euler(state0.euler)
    q0 = quat_from_matrix(r0)
    w0 = rate_map(state0.euler) @ state0.euler_rates

    def rhs(_t, y):
        q = y[:4] / np.linalg.norm(y[:4])
        w = y[4:]
        qdot = 0.5 * quat_multiply(q, np.concatenate([[0.0], w]))
        wdot = i_inv @ (-np.cross(w, inertia @ w))
        return np.concatenate([qdot, wdot])

    sol = solve_ivp(
        rhs,
        (t_eval[0], t_eval[-1]),
        np.concatenate([q0, w0]),
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    assert sol.success, sol.message
    mats = []
    for k in range(sol.y.shape[1]):
        q = sol.y[:4, k]
        mats.append(quat_to_matrix(q / np.linalg.norm(q)))
    return mats


# --- gravity potential --------------------------------------------------------


def gravity_force_oracle(config, state, wings, h=1e-6):
    """Generalized gravity load from -dU/dq by central differences.

    With z measured downward, U = -g * sum(m_i z_i); q = [x_S, theta].
    """
    from morphflight.airframe import body_kinematics
    from morphflight.frames import EulerAngles

    def potential(pos, theta):
        st = AircraftState(state.vel, state.euler_rates, pos, EulerAngles(*theta, state.convention))
        kin = body_kinematics(config, st, wings)
        u = 0.0
        for b in config.bodies:
            u -= b.mass * config.gravity * kin[b.id]["pos"][2]
        return u

    q0 = np.concatenate([state.pos, state.euler.as_array()])
    out = np.zeros(6)
    for i in range(6):
        qp, qm = q0.copy(), q0.copy()
        qp[i] += h
        qm[i] -= h
        out[i] = -(potential(qp[:3], qp[3:]) - potential(qm[:3], qm[3:])) / (2 * h)
    return out


# --- sinusoid amplitude -------------------------------------------------------


def sinusoid_amplitude_fit(t, x, omega):
    """Least-squares amplitude of a sinusoid at a known frequency."""
    t = np.asarray(t, dtype=float)
    a = np.column_stack([np.sin(omega * t), np.cos(omega * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(a, np.asarray(x, dtype=float), rcond=None)
    return float(np.hypot(coef[0], coef[1]))
