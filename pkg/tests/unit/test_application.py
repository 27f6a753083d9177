from __future__ import annotations

import io
import math

import pytest

import pydcf.application.sweep as sweep_module
from pydcf.application.analysis import (
    analysis_report,
    list_preset_dicts,
    run_analysis_from_payload,
    simulation_report,
)
from pydcf.application.sweep import (
    parse_values,
    relative_error,
    run_comparison,
    SweepRow,
    run_sweep,
    scenario_at,
    sweep_columns,
    validate_sweep,
    write_comparison_csv,
    write_sweep_csv,
)
from pydcf.core.errors import DegenerateInputError, ScenarioValidationError
from pydcf.core.models import SimConfig, SimMetrics, SolverOptions, SweepSpec
from pydcf.core.presets import build_scenario
from pydcf.core.request_mapper import apply_overrides


def _spec(axis: str = "lambda", values: list[float] | None = None, outputs: list[str] | None = None) -> SweepSpec:
    return SweepSpec(
        base=build_scenario(n=5),
        axis=axis,
        values=values if values is not None else [0.0, 2.0, 5.0],
        outputs=outputs if outputs is not None else ["throughput", "access_delay"],
    )


def test_run_analysis_from_payload_returns_solution() -> None:
    solution = run_analysis_from_payload({"n": 1, "lambda": 2})

    assert solution.converged
    assert solution.state.p_c == 0.0
    assert solution.metrics.throughput > 0


def test_reports_carry_run_context() -> None:
    scenario = build_scenario(n=2)
    opts = SolverOptions(mode="saturated", collision_model="per_station")
    report = analysis_report(scenario, sweep_module.solve(scenario, opts), opts)

    assert report["scenario"] == "dot11b-dsss"
    assert report["mode"] == "saturated"
    assert report["collision_model"] == "per_station"
    assert report["state"]["p_q"] == 1.0

    metrics = SimMetrics(0.0, 0.0, math.nan, math.nan, 0.0, 0.0, 0.0, 0.0)
    sim = simulation_report(scenario, metrics, SimConfig(sim_duration=50.0, warmup=5.0))
    assert sim["mean_access_delay"] is None
    assert sim["duration"] == 50.0


def test_list_preset_dicts_contains_the_dsss_table() -> None:
    names = {item["name"] for item in list_preset_dicts()}
    assert "dot11b-dsss" in names


def test_parse_values_lists_and_ranges() -> None:
    assert parse_values("1,2,5") == [1.0, 2.0, 5.0]
    assert parse_values("0:1:0.25") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert parse_values("1:3:1, 10") == [1.0, 2.0, 3.0, 10.0]
    assert parse_values("5:1:-2") == [5.0, 3.0, 1.0]


@pytest.mark.parametrize("text", ["", "1:2", "1:0:1", "1:5:0", "a,b"])
def test_parse_values_rejects_bad_input(text: str) -> None:
    with pytest.raises(ValueError):
        parse_values(text)


@pytest.mark.parametrize(
    ("spec", "field"),
    [
        (_spec(axis="sifs"), "axis"),
        (_spec(values=[]), "values"),
        (_spec(outputs=["goodput"]), "outputs"),
        (_spec(axis="n", values=[3, 0]), "n"),
    ],
)
def test_validate_sweep_names_the_problem(spec: SweepSpec, field: str) -> None:
    with pytest.raises(ScenarioValidationError) as excinfo:
        validate_sweep(spec)
    assert excinfo.value.field == field


def test_sweep_solves_each_point_once(monkeypatch: pytest.MonkeyPatch) -> None:
    calls: list[float] = []
    real_solve = sweep_module.solve

    def counting_solve(scenario, opts=None):
        calls.append(scenario.traffic.arrival_rate)
        return real_solve(scenario, opts)

    monkeypatch.setattr(sweep_module, "solve", counting_solve)
    rows = run_sweep(_spec())

    assert calls == [0.0, 2.0, 5.0]
    assert [row.axis_value for row in rows] == [0.0, 2.0, 5.0]
    assert rows[0].analytic["throughput"] == 0.0
    assert rows[2].analytic["throughput"] > rows[1].analytic["throughput"] > 0


def test_failed_points_are_flagged_and_the_sweep_goes_on(monkeypatch: pytest.MonkeyPatch) -> None:
    real_solve = sweep_module.solve

    def flaky_solve(scenario, opts=None):
        if scenario.traffic.arrival_rate == 2.0:
            raise DegenerateInputError("forced")
        return real_solve(scenario, opts)

    monkeypatch.setattr(sweep_module, "solve", flaky_solve)
    rows = run_sweep(_spec())

    assert [row.converged for row in rows] == [True, False, True]
    assert math.isnan(rows[1].analytic["throughput"])
    assert rows[1].note == "forced"


def test_certain_channel_errors_are_flagged_in_a_sweep() -> None:
    rows = run_sweep(_spec(axis="p_e", values=[0.0, 1.0], outputs=["p_f"]))

    assert rows[0].converged
    assert not rows[1].converged


def test_sweep_csv_layout() -> None:
    spec = _spec(values=[0.0, 2.0])
    stream = io.StringIO()

    write_sweep_csv(spec, run_sweep(spec), stream)
    lines = stream.getvalue().splitlines()

    assert lines[0] == "# units: lambda[pkt/s] throughput[bit/s] access_delay[s]"
    assert lines[1] == "lambda,analytic_throughput,analytic_access_delay,converged"
    assert lines[2].startswith("0.0,0.0,")
    assert lines[2].endswith(",true")
    assert len(lines) == 4


def test_integer_axes_print_as_integers() -> None:
    spec = _spec(axis="n", values=[1.0, 2.0], outputs=["tau"])
    stream = io.StringIO()

    write_sweep_csv(spec, run_sweep(spec), stream)
    rows = stream.getvalue().splitlines()[2:]

    assert [row.split(",")[0] for row in rows] == ["1", "2"]


def test_sweep_columns_add_simulated_counterparts_only() -> None:
    assert sweep_columns("n", ["throughput", "p_b"], simulate=True) == [
        "n",
        "analytic_throughput",
        "analytic_p_b",
        "sim_throughput",
        "ci_throughput",
        "converged",
    ]


def test_relative_error_floor() -> None:
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1e-3, 0.0) == pytest.approx(1e9)


def test_comparison_pairs_comparable_metrics() -> None:
    base = apply_overrides(build_scenario(), {"lambda": 5.0})
    spec = SweepSpec(base=base, axis="n", values=[1.0, 2.0], outputs=["throughput", "tau", "hoq_slots"])

    rows = run_comparison(spec, sim_config=SimConfig(seed=4, sim_duration=30.0, warmup=3.0))

    assert [(row.axis_value, row.metric) for row in rows] == [
        (1.0, "throughput"),
        (1.0, "tau"),
        (2.0, "throughput"),
        (2.0, "tau"),
    ]
    assert all(row.simulated > 0 for row in rows)

    stream = io.StringIO()
    write_comparison_csv("n", rows, stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "# units: n[1] throughput[bit/s] tau[1]"
    assert lines[1] == "n,metric,analytic,simulated,ci,relative_error,converged"
    assert lines[-1].startswith("# summary max_rel_error=")


def test_comparison_needs_a_simulated_metric() -> None:
    with pytest.raises(ScenarioValidationError):
        run_comparison(_spec(outputs=["hoq_slots"]))


def test_retry_limit_axis_caps_the_doubling_stages() -> None:
    base = build_scenario(n=5)

    assert scenario_at(base, "m", 0).protocol.m_prime == 0
    assert scenario_at(base, "m", 2).protocol.m_prime == 2
    assert scenario_at(base, "m", 10).protocol.m_prime == base.protocol.m_prime
    assert base.protocol.m_prime == 5


def test_retry_limit_sweep_from_zero_runs_every_point() -> None:
    rows = run_sweep(_spec(axis="m", values=[float(m) for m in range(11)], outputs=["network_loss"]))

    assert [row.axis_value for row in rows] == [float(m) for m in range(11)]


def test_parallel_sweep_matches_sequential_run() -> None:
    spec = _spec(values=[1.0, 2.0, 5.0, 10.0], outputs=["throughput", "tau", "p_q"])

    sequential = run_sweep(spec)
    parallel = run_sweep(spec, workers=2)

    assert [row.axis_value for row in parallel] == [row.axis_value for row in sequential]
    assert [row.analytic for row in parallel] == [row.analytic for row in sequential]
    assert [row.converged for row in parallel] == [row.converged for row in sequential]


def test_durations_are_written_to_nanoseconds() -> None:
    spec = _spec(values=[1.0], outputs=["access_delay", "slot_time", "throughput"])
    row = SweepRow(
        axis_value=1.0,
        analytic={"access_delay": 0.0123456789123, "slot_time": 2.00000049e-5, "throughput": 123456.789012345},
    )
    stream = io.StringIO()

    write_sweep_csv(spec, [row], stream)
    cells = stream.getvalue().splitlines()[2].split(",")

    assert cells[1:4] == ["0.012345679", "2e-05", "123456.789012345"]
