"""Flight-dynamics workbench for asymmetric morphing-wing aircraft.

Multibody equations of motion with moving-wing inertial coupling, strip-theory
quasisteady aerodynamics, adaptive time integration with Euler-sequence
switching, trim continuation over the orientation space, linearized stability
analysis, open-loop nose-pointing guidance, and reduced-frequency certification
of maneuver unsteadiness.
"""

__version__ = "0.1.0"

from .airframe import (
    AircraftState,
    AirframeConfig,
    BuiltinAirfoil,
    CONTROL_NAMES,
    ControlVector,
    EomCoefficients,
    RigidBodyElement,
    SingularAttitudeError,
    WingPose,
    assemble_eom,
    convention_switch,
    kinetic_energy,
)
from .aero import (
    CoefficientTable,
    GeneralizedLoads,
    build_stations,
    station_flow,
    station_loads,
    total_external_loads,
)
from .configio import (
    ConfigError,
    ManeuverSpec,
    default_config,
    load_config,
    load_maneuver,
    load_table,
    save_config,
)
from .dynamics import IllConditionedMassMatrix, state_derivative
from .frames import Convention, EulerAngles, euler_from_rotation, rotation_from_euler
from .guidance import (
    ControlSchedule,
    RectPath,
    ScheduleError,
    ScrollPath,
    TargetPoint,
    build_schedule,
    evaluate_tracking,
    rect_target,
    scroll_target,
)
from .sim import IntegratorOptions, StepUnderflowError, Trajectory, simulate
from .spectral import (
    ProbeSpectrum,
    UnsteadinessReport,
    amplitude_spectrum,
    probe_spectrum,
    unsteadiness_report,
)
from .stability import (
    DeviationMetrics,
    ModalSet,
    Mode,
    ModeLabel,
    linearize,
    modal_analysis,
    perturbation_metrics,
    static_gradients,
)
from .trim import (
    ConstraintPolicy,
    MorphChannel,
    TrimPoint,
    TrimSpaceGrid,
    TrimTarget,
    continue_path,
    mirror_point,
    solve_trim,
    sweep_trim_space,
    trim_state,
)

__all__ = [
    "__version__",
    "AircraftState",
    "AirframeConfig",
    "BuiltinAirfoil",
    "CONTROL_NAMES",
    "ControlVector",
    "EomCoefficients",
    "RigidBodyElement",
    "SingularAttitudeError",
    "WingPose",
    "assemble_eom",
    "convention_switch",
    "kinetic_energy",
    "CoefficientTable",
    "GeneralizedLoads",
    "build_stations",
    "station_flow",
    "station_loads",
    "total_external_loads",
    "ConfigError",
    "ManeuverSpec",
    "default_config",
    "load_config",
    "load_maneuver",
    "load_table",
    "save_config",
    "IllConditionedMassMatrix",
    "state_derivative",
    "Convention",
    "EulerAngles",
    "euler_from_rotation",
    "rotation_from_euler",
    "ControlSchedule",
    "RectPath",
    "ScheduleError",
    "ScrollPath",
    "TargetPoint",
    "build_schedule",
    "evaluate_tracking",
    "rect_target",
    "scroll_target",
    "IntegratorOptions",
    "StepUnderflowError",
    "Trajectory",
    "simulate",
    "ProbeSpectrum",
    "UnsteadinessReport",
    "amplitude_spectrum",
    "probe_spectrum",
    "unsteadiness_report",
    "DeviationMetrics",
    "ModalSet",
    "Mode",
    "ModeLabel",
    "linearize",
    "modal_analysis",
    "perturbation_metrics",
    "static_gradients",
    "ConstraintPolicy",
    "MorphChannel",
    "TrimPoint",
    "TrimSpaceGrid",
    "TrimTarget",
    "continue_path",
    "mirror_point",
    "solve_trim",
    "sweep_trim_space",
    "trim_state",
]
