"""State derivative assembly: multibody mass matrix plus external loads."""

from __future__ import annotations

import warnings

import numpy as np

from .aero import total_external_loads
from .airframe import (
    AircraftState,
    AirframeConfig,
    ControlVector,
    SingularAttitudeError,
    _mass_and_bias,
)
from .frames import rate_map_is_singular

CONDITION_LIMIT = 1e12


class IllConditionedMassMatrix(UserWarning):
    pass


def state_derivative(
    config: AirframeConfig,
    state: AircraftState,
    controls: ControlVector,
    wings=None,
) -> np.ndarray:
    """Time derivative of z = [vel_S, euler_rates, pos_S, euler].

    Wing poses default to the angles in `controls` with zero rates; pass
    `wings` explicitly when the morphing degrees of freedom are moving.
    """
    if rate_map_is_singular(state.euler):
        raise SingularAttitudeError(
            f"rate map singular at euler={state.euler}; switch conventions first"
        )
    if wings is None:
        wings = controls.wing_poses()
    m, bias = _mass_and_bias(config, state, wings)
    q = total_external_loads(config, state, controls, wings)
    cond = np.linalg.cond(m)
    if cond > CONDITION_LIMIT:
        warnings.warn(
            f"generalized mass matrix condition number {cond:.3e} exceeds "
            f"{CONDITION_LIMIT:.0e}",
            IllConditionedMassMatrix,
        )
    qddot = np.linalg.solve(m, q + bias)
    return np.concatenate([qddot, state.vel, state.euler_rates])
