"""Command-line adapter for pyDCF.

Exit codes: 0 success, 2 invalid scenario or configuration, 3 solver failure
on a single-point ``analyze``. Sweeps and comparisons flag failed points in
their ``converged`` column and still exit 0.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from pydcf.application.analysis import (
    analysis_report,
    list_preset_dicts,
    run_analysis,
    run_simulation,
    simulation_report,
)
from pydcf.application.sweep import (
    METRIC_NAMES,
    SWEEP_AXES,
    parse_values,
    run_comparison,
    run_sweep,
    write_comparison_csv,
    write_sweep_csv,
)
from pydcf.core.errors import DegenerateInputError, NonConvergenceError, ScenarioValidationError
from pydcf.core.models import Scenario, SimConfig, SolverOptions, SweepSpec
from pydcf.core.request_mapper import (
    MICROSECOND_KEYS,
    SCENARIO_KEYS,
    apply_overrides,
    load_config_file,
    parse_scenario_payload,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


def _add_scenario_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario")
    group.add_argument("--preset", default=None, help="Preset scenario (default dot11b-dsss; 'none' for plain defaults)")
    group.add_argument("--config", type=Path, default=None, help="Flat 'key = value' scenario file")
    group.add_argument("--access", choices=["basic", "rtscts"], default=None, help="Access mode")
    group.add_argument("--payload-bytes", type=int, default=None, help="Payload size in bytes (sets payload_bits)")
    for key in SCENARIO_KEYS:
        unit = " in microseconds" if key in MICROSECOND_KEYS else ""
        group.add_argument(
            f"--{key.replace('_', '-')}",
            dest=key,
            default=None,
            metavar="VALUE",
            help=f"Override scenario field '{key}'{unit}",
        )


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--mode", choices=["unsaturated", "saturated"], default="unsaturated", help="Solver mode")
    group.add_argument(
        "--collision-model",
        choices=["conditional", "per_station"],
        default="conditional",
        help="p_C as the ratio over busy slots (conditional) or 1-(1-tau)^(n-1) (per_station)",
    )
    group.add_argument("--tol", type=float, default=1e-10, help="Convergence threshold on the defects")
    group.add_argument("--max-iter", type=int, default=10_000, help="Total inner sweep budget")
    group.add_argument("--damping", type=float, default=0.5, help="Damping factor in (0, 1]")
    group.add_argument("--tau-seed", type=float, default=None, help="Initial tau (default 2/(W+1))")


def _add_simulation_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("simulation")
    group.add_argument("--seed", type=int, default=1, help="Root random seed")
    group.add_argument("--duration", type=float, default=2000.0, help="Simulated seconds")
    group.add_argument("--warmup", type=float, default=100.0, help="Seconds discarded before measuring")
    group.add_argument("--batches", type=int, default=10, help="Batch count for confidence intervals")


def _add_axis_arguments(parser: argparse.ArgumentParser, default_outputs: str) -> None:
    parser.add_argument("--axis", required=True, choices=list(SWEEP_AXES), help="Scenario field to sweep")
    parser.add_argument("--values", required=True, help="Comma list and/or inclusive start:stop:step ranges")
    parser.add_argument(
        "--outputs",
        default=default_outputs,
        help=f"Comma list of metrics ({', '.join(METRIC_NAMES)})",
    )
    parser.add_argument("--workers", type=int, default=1, help="Process pool size for independent points")


def build_parser() -> argparse.ArgumentParser:
    """Create the top-level CLI parser with subcommands."""

    parser = argparse.ArgumentParser(description="Unsaturated m-retry IEEE 802.11 DCF model and simulator")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (logs go to stderr)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    analyze_cmd = subparsers.add_parser("analyze", help="Solve the analytic model at one point (JSON)")
    _add_scenario_arguments(analyze_cmd)
    _add_solver_arguments(analyze_cmd)
    analyze_cmd.add_argument("--out", type=Path, default=None, help="Write JSON here instead of stdout")

    sweep_cmd = subparsers.add_parser("sweep", help="Solve along one parameter axis (CSV)")
    _add_scenario_arguments(sweep_cmd)
    _add_solver_arguments(sweep_cmd)
    _add_axis_arguments(sweep_cmd, "throughput,access_delay")
    _add_simulation_arguments(sweep_cmd)
    sweep_cmd.add_argument("--simulate", action="store_true", help="Also simulate every point")
    sweep_cmd.add_argument("--out", type=Path, default=None, help="Write CSV here instead of stdout")

    simulate_cmd = subparsers.add_parser("simulate", help="Run the slot simulator at one point (JSON)")
    _add_scenario_arguments(simulate_cmd)
    _add_simulation_arguments(simulate_cmd)
    simulate_cmd.add_argument("--trace", type=Path, default=None, help="Write a per-event CSV trace")
    simulate_cmd.add_argument("--out", type=Path, default=None, help="Write JSON here instead of stdout")

    compare_cmd = subparsers.add_parser("compare", help="Analytic vs simulated values along one axis (CSV)")
    _add_scenario_arguments(compare_cmd)
    _add_solver_arguments(compare_cmd)
    _add_axis_arguments(compare_cmd, "throughput,access_delay")
    _add_simulation_arguments(compare_cmd)
    compare_cmd.add_argument("--out", type=Path, default=None, help="Write CSV here instead of stdout")

    subparsers.add_parser("presets", help="List bundled presets (JSON)")
    return parser


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    """Resolve preset < config file < command-line flags into one validated Scenario."""

    file_values: dict[str, Any] = dict(load_config_file(args.config)) if args.config is not None else {}
    file_preset = file_values.pop("preset", None)
    preset = args.preset or file_preset or "dot11b-dsss"
    scenario = parse_scenario_payload({"preset": preset, **file_values})

    overrides: dict[str, Any] = {key: getattr(args, key) for key in SCENARIO_KEYS}
    if args.access is not None:
        overrides["access_mode"] = args.access
    if args.payload_bytes is not None:
        overrides["payload_bits"] = args.payload_bytes * 8
    return apply_overrides(scenario, overrides)


def solver_options_from_args(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        tol=args.tol,
        max_iter=args.max_iter,
        damping=args.damping,
        mode=args.mode,
        tau_seed=args.tau_seed,
        collision_model=args.collision_model,
    )


def sim_config_from_args(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        seed=args.seed,
        sim_duration=args.duration,
        warmup=args.warmup,
        batch_count=args.batches,
        trace_path=getattr(args, "trace", None),
    )


def sweep_spec_from_args(args: argparse.Namespace, scenario: Scenario) -> SweepSpec:
    try:
        values = parse_values(args.values)
    except ValueError as exc:
        raise ScenarioValidationError("values", str(exc)) from exc
    outputs = [name.strip() for name in args.outputs.split(",") if name.strip()]
    return SweepSpec(base=scenario, axis=args.axis, values=values, outputs=outputs)


def _emit_json(payload: dict[str, Any] | list[Any], target: Path | None) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if target is None:
        print(text)
    else:
        target.write_text(text + "\n", encoding="utf-8")


def _open_output(target: Path | None) -> TextIO:
    if target is None:
        return sys.stdout
    target.parent.mkdir(parents=True, exist_ok=True)
    return target.open("w", newline="", encoding="utf-8")


def _run_analyze(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    opts = solver_options_from_args(args)
    try:
        solution = run_analysis(scenario, opts)
    except NonConvergenceError as exc:
        residual = exc.residual
        print(
            f"error: {exc} (residuals tau={residual.tau:.3e} p_f={residual.p_f:.3e} p_q={residual.p_q:.3e})",
            file=sys.stderr,
        )
        return EXIT_NOT_CONVERGED
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    _emit_json(analysis_report(scenario, solution, opts), args.out)
    return EXIT_OK


def _run_sweep(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    spec = sweep_spec_from_args(args, scenario)
    sim_config = sim_config_from_args(args) if args.simulate else None
    rows = run_sweep(spec, solver_options_from_args(args), sim_config, workers=args.workers)

    stream = _open_output(args.out)
    try:
        write_sweep_csv(spec, rows, stream, simulate=args.simulate)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def _run_simulate(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    cfg = sim_config_from_args(args)
    metrics = run_simulation(scenario, cfg)
    _emit_json(simulation_report(scenario, metrics, cfg), args.out)
    return EXIT_OK


def _run_compare(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    spec = sweep_spec_from_args(args, scenario)
    rows = run_comparison(spec, solver_options_from_args(args), sim_config_from_args(args), workers=args.workers)

    stream = _open_output(args.out)
    try:
        write_comparison_csv(spec.axis, rows, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


_COMMANDS = {
    "analyze": _run_analyze,
    "sweep": _run_sweep,
    "simulate": _run_simulate,
    "compare": _run_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entrypoint used by `pydcf`, `pydcf-cli` and `python -m pydcf`."""

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    if args.command == "presets":
        _emit_json(list_preset_dicts(), None)
        return EXIT_OK

    try:
        return _COMMANDS[args.command](args)
    except ScenarioValidationError as exc:
        print(f"error: {exc.field}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
