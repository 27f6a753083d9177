from __future__ import annotations

import io
import json
from contextlib import redirect_stdout
from pathlib import Path

import pytest

from pydcf.application.analysis import analysis_report, run_analysis, run_analysis_from_payload
from pydcf.cli import build_parser, main, scenario_from_args, solver_options_from_args
from pydcf.core.models import SolverOptions


def test_cli_and_application_paths_are_consistent() -> None:
    stdout = io.StringIO()
    with redirect_stdout(stdout):
        code = main(["analyze", "--n", "4", "--lambda", "3", "--w0", "16", "--collision-model", "per_station"])
    assert code == 0
    via_cli = json.loads(stdout.getvalue())

    opts = SolverOptions(collision_model="per_station")
    direct = run_analysis_from_payload({"n": 4, "lambda": 3, "w0": 16}, opts)
    expected = json.loads(json.dumps(analysis_report(_scenario(4, 3, 16), direct, opts)))

    assert via_cli["state"] == pytest.approx(expected["state"], rel=1e-12)
    assert via_cli["metrics"] == pytest.approx(expected["metrics"], rel=1e-12)
    assert via_cli["iterations"] == expected["iterations"]


def _scenario(n: int, arrival_rate: float, w0: int):
    args = build_parser().parse_args(["analyze", "--n", str(n), "--lambda", str(arrival_rate), "--w0", str(w0)])
    return scenario_from_args(args)


def test_flags_override_config_file_which_overrides_preset(tmp_path: Path) -> None:
    config = tmp_path / "net.conf"
    config.write_text("n = 4\nw0 = 16\nsifs = 12\n", encoding="utf-8")

    args = build_parser().parse_args(["analyze", "--config", str(config), "--n", "6", "--payload-bytes", "500"])
    scenario = scenario_from_args(args)

    assert scenario.n == 6
    assert scenario.protocol.w0 == 16
    assert scenario.phy.sifs == pytest.approx(12e-6)
    assert scenario.traffic.payload_bits == 4000
    assert scenario.protocol.m == 7


def test_solver_flags_map_onto_options() -> None:
    args = build_parser().parse_args(
        ["analyze", "--mode", "saturated", "--tol", "1e-8", "--damping", "0.7", "--tau-seed", "0.1"]
    )
    opts = solver_options_from_args(args)

    assert opts == SolverOptions(mode="saturated", tol=1e-8, damping=0.7, tau_seed=0.1)
    assert run_analysis(scenario_from_args(args), opts).state.p_q == 1.0
