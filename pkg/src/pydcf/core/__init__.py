"""Core transport-independent models and shared mapping utilities."""

from .errors import DegenerateInputError, NonConvergenceError, ReducibleChainError, ScenarioValidationError
from .models import (
    ChannelConfig,
    MacOverhead,
    Metrics,
    PhyTimings,
    ProtocolConfig,
    Scenario,
    SimConfig,
    SimMetrics,
    Solution,
    SolverOptions,
    SteadyState,
    SweepSpec,
    TrafficConfig,
)
from .presets import available_presets, build_scenario, validate_scenario
from .request_mapper import apply_overrides, load_config_file, parse_config_text, parse_scenario_payload

__all__ = [
    "ChannelConfig",
    "DegenerateInputError",
    "MacOverhead",
    "Metrics",
    "NonConvergenceError",
    "PhyTimings",
    "ProtocolConfig",
    "ReducibleChainError",
    "Scenario",
    "ScenarioValidationError",
    "SimConfig",
    "SimMetrics",
    "Solution",
    "SolverOptions",
    "SteadyState",
    "SweepSpec",
    "TrafficConfig",
    "apply_overrides",
    "available_presets",
    "build_scenario",
    "load_config_file",
    "parse_config_text",
    "parse_scenario_payload",
    "validate_scenario",
]
