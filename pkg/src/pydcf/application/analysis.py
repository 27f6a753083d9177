"""Transport-agnostic single-point use cases."""

from __future__ import annotations

from typing import Any, Mapping

from pydcf.core.models import Scenario, SimConfig, SimMetrics, Solution, SolverOptions
from pydcf.core.presets import available_presets
from pydcf.core.request_mapper import parse_scenario_payload
from pydcf.methods.dcf.simulator import run
from pydcf.methods.dcf.solver import solve


def run_analysis(scenario: Scenario, opts: SolverOptions | None = None) -> Solution:
    """Solve the analytic model for one scenario."""

    return solve(scenario, opts)


def run_analysis_from_payload(payload: Mapping[str, Any], opts: SolverOptions | None = None) -> Solution:
    """Solve the analytic model for a scenario given as a flat payload."""

    return run_analysis(parse_scenario_payload(payload), opts)


def run_simulation(scenario: Scenario, cfg: SimConfig | None = None) -> SimMetrics:
    """Simulate one scenario."""

    return run(scenario, cfg)


def analysis_report(scenario: Scenario, solution: Solution, opts: SolverOptions) -> dict[str, Any]:
    """Return the JSON document printed by ``pydcf analyze``."""

    report = solution.to_dict()
    report["scenario"] = scenario.name
    report["mode"] = opts.mode
    report["collision_model"] = opts.collision_model
    return report


def simulation_report(scenario: Scenario, metrics: SimMetrics, cfg: SimConfig) -> dict[str, Any]:
    """Return the JSON document printed by ``pydcf simulate``."""

    report = metrics.to_dict()
    report["scenario"] = scenario.name
    report["duration"] = cfg.sim_duration
    report["warmup"] = cfg.warmup
    return report


def list_presets() -> list[Scenario]:
    """Return available preset scenarios as typed domain objects."""

    return available_presets()


def list_preset_dicts() -> list[dict[str, Any]]:
    """Return preset scenarios in JSON-serializable dictionary form."""

    return [scenario.to_dict() for scenario in list_presets()]
