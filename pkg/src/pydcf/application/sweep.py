"""One-axis sweeps and analytic-vs-simulation comparisons, written as CSV.

Points are independent. With ``workers > 1`` they run in a process pool;
rows always come back in axis order.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, TextIO

from pydcf.core.errors import DegenerateInputError, NonConvergenceError, ScenarioValidationError
from pydcf.core.models import ComparisonRow, Scenario, SimConfig, Solution, SolverOptions, SweepSpec
from pydcf.core.request_mapper import apply_overrides
from pydcf.methods.dcf.simulator import run
from pydcf.methods.dcf.solver import solve

logger = logging.getLogger(__name__)

SWEEP_AXES: tuple[str, ...] = ("lambda", "n", "w0", "m", "m_prime", "p_e", "payload_bits", "queue_len")
INTEGER_AXES = frozenset({"n", "w0", "m", "m_prime", "payload_bits", "queue_len"})

STATE_METRICS = ("tau", "p_b", "p_c", "p_p", "p_f", "p_s", "p_q", "b00", "b_e")
PERFORMANCE_METRICS = (
    "throughput",
    "access_delay",
    "network_loss",
    "queue_loss",
    "hoq_slots",
    "slot_time",
    "load_factor",
)
METRIC_NAMES: tuple[str, ...] = STATE_METRICS + PERFORMANCE_METRICS

METRIC_UNITS = {
    "throughput": "bit/s",
    "access_delay": "s",
    "slot_time": "s",
    "hoq_slots": "slots",
    "load_factor": "1",
}

# analytic metric -> (SimMetrics value field, SimMetrics CI field or None)
SIMULATED_COUNTERPARTS: dict[str, tuple[str, str | None]] = {
    "throughput": ("throughput", "throughput_ci"),
    "access_delay": ("mean_access_delay", "access_delay_ci"),
    "network_loss": ("network_loss_rate", None),
    "queue_loss": ("queue_loss_rate", None),
    "tau": ("empirical_tau", None),
    "p_c": ("empirical_p_c", None),
}

RELATIVE_ERROR_FLOOR = 1e-12

# Durations are written to nanosecond precision.
DURATION_METRICS = frozenset({"access_delay", "slot_time"})
DURATION_DIGITS = 9


@dataclass(slots=True)
class SweepRow:
    """Values for one axis point; ``analytic``/``simulated``/``ci`` are keyed by metric name."""

    axis_value: float
    analytic: dict[str, float] = field(default_factory=dict)
    simulated: dict[str, float] = field(default_factory=dict)
    ci: dict[str, float] = field(default_factory=dict)
    converged: bool = True
    note: str = ""


def parse_values(text: str) -> list[float]:
    """Parse ``"1,2,5"`` and inclusive ``"start:stop:step"`` ranges (mixable)."""

    values: list[float] = []
    for token in (part.strip() for part in text.split(",")):
        if not token:
            continue
        if ":" not in token:
            values.append(float(token))
            continue

        pieces = token.split(":")
        if len(pieces) != 3:
            raise ValueError(f"range '{token}' must be start:stop:step")
        start, stop, step = (float(piece) for piece in pieces)
        if step == 0 or (stop - start) * step < 0:
            raise ValueError(f"range '{token}' never reaches its stop value")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values.extend(start + index * step for index in range(count))

    if not values:
        raise ValueError("no sweep values given")
    return values


def validate_sweep(spec: SweepSpec) -> SweepSpec:
    if spec.axis not in SWEEP_AXES:
        raise ScenarioValidationError("axis", f"axis must be one of {', '.join(SWEEP_AXES)}, got '{spec.axis}'")
    if not spec.values:
        raise ScenarioValidationError("values", "sweep values must be nonempty")
    unknown = [name for name in spec.outputs if name not in METRIC_NAMES]
    if unknown:
        raise ScenarioValidationError("outputs", f"unknown metric name(s): {', '.join(unknown)}")
    for value in spec.values:
        scenario_at(spec.base, spec.axis, value)
    return spec


def scenario_at(base: Scenario, axis: str, value: float) -> Scenario:
    """Return a validated copy of ``base`` with ``axis`` set to ``value``.

    Sweeping ``m`` caps ``m_prime`` at the swept retry limit so small limits stay valid.
    """

    overrides: dict[str, Any] = {axis: value}
    if axis == "m":
        overrides["m_prime"] = min(base.protocol.m_prime, int(round(value)))
    return apply_overrides(base, overrides)


def metric_value(solution: Solution, name: str) -> float:
    if name in STATE_METRICS:
        return float(getattr(solution.state, name))
    return float(getattr(solution.metrics, name))


def _solve_point(
    base: Scenario,
    axis: str,
    value: float,
    outputs: list[str],
    opts: SolverOptions,
    sim_config: SimConfig | None,
) -> SweepRow:
    row = SweepRow(axis_value=value)
    scenario = scenario_at(base, axis, value)

    try:
        solution = solve(scenario, opts)
        row.analytic = {name: metric_value(solution, name) for name in outputs}
        row.converged = solution.converged
        if solution.multiple_roots:
            row.note = "multiple tau roots"
    except (NonConvergenceError, DegenerateInputError) as exc:
        logger.warning("%s=%g: %s", axis, value, exc)
        row.analytic = {name: math.nan for name in outputs}
        row.converged = False
        row.note = str(exc)

    if sim_config is not None:
        metrics = run(scenario, sim_config)
        for name in outputs:
            if name in SIMULATED_COUNTERPARTS:
                value_field, ci_field = SIMULATED_COUNTERPARTS[name]
                row.simulated[name] = float(getattr(metrics, value_field))
                row.ci[name] = float(getattr(metrics, ci_field)) if ci_field else math.nan

    logger.info("%s=%g done (converged=%s)", axis, value, row.converged)
    return row


def _map_points(
    spec: SweepSpec,
    opts: SolverOptions,
    sim_config: SimConfig | None,
    workers: int,
) -> list[SweepRow]:
    arguments = [(spec.base, spec.axis, value, list(spec.outputs), opts, sim_config) for value in spec.values]
    if workers <= 1 or len(arguments) == 1:
        return [_solve_point(*args) for args in arguments]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_point, *zip(*arguments)))


def run_sweep(
    spec: SweepSpec,
    opts: SolverOptions | None = None,
    sim_config: SimConfig | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Solve (and optionally simulate) every axis point; failed points are flagged, not raised."""

    validate_sweep(spec)
    return _map_points(spec, opts or SolverOptions(), sim_config, workers)


def sweep_columns(axis: str, outputs: Iterable[str], simulate: bool) -> list[str]:
    """Column order: axis, analytic metrics, simulated metrics, CI half-widths, converged."""

    outputs = list(outputs)
    columns = [axis] + [f"analytic_{name}" for name in outputs]
    if simulate:
        simulated = [name for name in outputs if name in SIMULATED_COUNTERPARTS]
        columns += [f"sim_{name}" for name in simulated]
        columns += [f"ci_{name}" for name in simulated]
    columns.append("converged")
    return columns


def _format(value: float, metric: str = "") -> str:
    if isinstance(value, float) and math.isnan(value):
        return ""
    if metric in DURATION_METRICS:
        return repr(round(float(value), DURATION_DIGITS))
    return repr(value)


def _axis_text(axis: str, value: float) -> str:
    if axis in INTEGER_AXES:
        return str(int(round(value)))
    return repr(float(value))


def units_comment(axis: str, outputs: Iterable[str]) -> str:
    """Return the leading ``#`` line naming the unit of every column."""

    axis_units = {"lambda": "pkt/s", "payload_bits": "bit"}
    parts = [f"{axis}[{axis_units.get(axis, '1')}]"]
    parts += [f"{name}[{METRIC_UNITS.get(name, '1')}]" for name in outputs]
    return "# units: " + " ".join(parts)


def write_sweep_csv(spec: SweepSpec, rows: list[SweepRow], stream: TextIO, simulate: bool = False) -> None:
    outputs = list(spec.outputs)
    stream.write(units_comment(spec.axis, outputs) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(sweep_columns(spec.axis, outputs, simulate))

    simulated = [name for name in outputs if name in SIMULATED_COUNTERPARTS] if simulate else []
    for row in rows:
        record = [_axis_text(spec.axis, row.axis_value)]
        record += [_format(row.analytic.get(name, math.nan), name) for name in outputs]
        record += [_format(row.simulated.get(name, math.nan), name) for name in simulated]
        record += [_format(row.ci.get(name, math.nan), name) for name in simulated]
        record.append("true" if row.converged else "false")
        writer.writerow(record)


def relative_error(analytic: float, simulated: float) -> float:
    """Return |analytic - simulated| / max(|simulated|, 1e-12)."""

    return abs(analytic - simulated) / max(abs(simulated), RELATIVE_ERROR_FLOOR)


def run_comparison(
    spec: SweepSpec,
    opts: SolverOptions | None = None,
    sim_config: SimConfig | None = None,
    workers: int = 1,
) -> list[ComparisonRow]:
    """Pair analytic and simulated values of every comparable metric at each axis point."""

    validate_sweep(spec)
    metrics = [name for name in spec.outputs if name in SIMULATED_COUNTERPARTS]
    if not metrics:
        raise ScenarioValidationError("outputs", "none of the requested metrics has a simulated counterpart")

    rows = _map_points(spec, opts or SolverOptions(), sim_config or SimConfig(), workers)
    comparison: list[ComparisonRow] = []
    for row in rows:
        for name in metrics:
            analytic = row.analytic[name]
            simulated = row.simulated[name]
            comparison.append(
                ComparisonRow(
                    axis_value=row.axis_value,
                    metric=name,
                    analytic=analytic,
                    simulated=simulated,
                    ci=row.ci[name],
                    relative_error=relative_error(analytic, simulated),
                    converged=row.converged,
                )
            )
    return comparison


COMPARISON_COLUMNS = ["axis", "metric", "analytic", "simulated", "ci", "relative_error", "converged"]


def comparison_summary(rows: list[ComparisonRow]) -> dict[str, Any]:
    errors = [row.relative_error for row in rows if math.isfinite(row.relative_error)]
    if not errors:
        return {"max_rel_error": math.nan, "mean_rel_error": math.nan}
    return {"max_rel_error": max(errors), "mean_rel_error": sum(errors) / len(errors)}


def write_comparison_csv(axis: str, rows: list[ComparisonRow], stream: TextIO) -> None:
    metrics = list(dict.fromkeys(row.metric for row in rows))
    stream.write(units_comment(axis, metrics) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([axis] + COMPARISON_COLUMNS[1:])
    for row in rows:
        writer.writerow(
            [
                _axis_text(axis, row.axis_value),
                row.metric,
                _format(row.analytic, row.metric),
                _format(row.simulated, row.metric),
                _format(row.ci, row.metric),
                _format(row.relative_error),
                "true" if row.converged else "false",
            ]
        )
    summary = comparison_summary(rows)
    stream.write(
        f"# summary max_rel_error={summary['max_rel_error']!r} mean_rel_error={summary['mean_rel_error']!r}\n"
    )
