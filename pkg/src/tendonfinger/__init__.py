"""Simulation toolkit for a synchronously coupled tendon-driven finger."""

__version__ = "0.1.0"

from .config import FingerConfig, SolverSettings, default_config_path, load_finger_config
from .energy import (
    EnergyLandscapeSample,
    EquilibriumResult,
    equilibrium_report,
    find_equilibrium,
    potential_gradient,
    total_potential,
)
from .errors import (
    BoundaryMinimum,
    ConfigError,
    EmptyCloud,
    GeometryInfeasible,
    NoConvergence,
    RangeExceeded,
    ResolutionTooLow,
    TendonFingerError,
    TensionInfeasible,
)
from .model import (
    Configuration,
    ExternalLoad,
    FingerGeometry,
    FingertipState,
    TendonGroup,
    TendonSpec,
    coupling_angles,
    fingertip_from_displacement,
    forward_kinematics,
    jacobian,
)
from .statics import (
    StaticSolution,
    TensionSet,
    WrapGeometry,
    elongate_tendons,
    solve_static,
    solve_tensions,
    stiffness_sweep,
    update_configuration,
    wrap_angles,
    wrap_moment,
)
from .workspace import (
    OccupancyGrid,
    WorkspaceCloud,
    occupancy_grid,
    sweep_workspace,
)

__all__ = [
    "__version__",
    "BoundaryMinimum",
    "ConfigError",
    "Configuration",
    "EmptyCloud",
    "EnergyLandscapeSample",
    "EquilibriumResult",
    "ExternalLoad",
    "FingerConfig",
    "FingerGeometry",
    "FingertipState",
    "GeometryInfeasible",
    "NoConvergence",
    "OccupancyGrid",
    "RangeExceeded",
    "ResolutionTooLow",
    "SolverSettings",
    "StaticSolution",
    "TendonFingerError",
    "TendonGroup",
    "TendonSpec",
    "TensionInfeasible",
    "TensionSet",
    "WorkspaceCloud",
    "WrapGeometry",
    "coupling_angles",
    "default_config_path",
    "elongate_tendons",
    "equilibrium_report",
    "find_equilibrium",
    "fingertip_from_displacement",
    "forward_kinematics",
    "jacobian",
    "load_finger_config",
    "occupancy_grid",
    "potential_gradient",
    "solve_static",
    "solve_tensions",
    "stiffness_sweep",
    "sweep_workspace",
    "total_potential",
    "update_configuration",
    "wrap_angles",
    "wrap_moment",
]
