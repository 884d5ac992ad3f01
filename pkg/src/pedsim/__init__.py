"""Social force simulation of pedestrian bottleneck flow."""

from .engine import RunResult, SimulationState, reference_step, run, step
from .errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateFitError,
    DegenerateGeometryError,
    DensityInfeasibleError,
    IncompleteRunError,
    InputError,
    IntegrationDivergedError,
    ParseError,
    PedsimError,
    UndefinedFluxError,
)
from .forces import ForceBreakdown, PedestrianState, WallSegment, total_acceleration
from .harness import SweepConfig, run_matrix, scaling_report
from .measurement import AggregateRow, FlowRecord, aggregate, flux, linear_fit, specific_flux, total_time
from .params import ModelParams, ParameterSetId, SidePreference, builtin_parameter_set, validate_params
from .scenario import GeometryConfig, Scenario, build_bottleneck_scenario, spawn_pedestrians

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "ConfigurationError",
    "ContractViolation",
    "DegenerateFitError",
    "DegenerateGeometryError",
    "DensityInfeasibleError",
    "FlowRecord",
    "ForceBreakdown",
    "GeometryConfig",
    "IncompleteRunError",
    "InputError",
    "IntegrationDivergedError",
    "ModelParams",
    "ParameterSetId",
    "ParseError",
    "PedestrianState",
    "PedsimError",
    "RunResult",
    "Scenario",
    "SidePreference",
    "SimulationState",
    "SweepConfig",
    "UndefinedFluxError",
    "WallSegment",
    "aggregate",
    "build_bottleneck_scenario",
    "builtin_parameter_set",
    "flux",
    "linear_fit",
    "reference_step",
    "run",
    "run_matrix",
    "scaling_report",
    "spawn_pedestrians",
    "specific_flux",
    "step",
    "total_acceleration",
    "total_time",
    "validate_params",
]
