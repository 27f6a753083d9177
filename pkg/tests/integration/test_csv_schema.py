"""Golden layouts of the CSV files downstream plotting scripts read."""

from __future__ import annotations

import csv
import io

from pydcf.application.sweep import run_sweep, write_sweep_csv
from pydcf.core.models import SimConfig, SweepSpec
from pydcf.core.presets import build_scenario
from pydcf.core.request_mapper import apply_overrides

SIMULATED_SWEEP_HEADER = [
    "n",
    "analytic_throughput",
    "analytic_access_delay",
    "analytic_p_b",
    "sim_throughput",
    "sim_access_delay",
    "ci_throughput",
    "ci_access_delay",
    "converged",
]


def test_simulated_sweep_layout() -> None:
    spec = SweepSpec(
        base=apply_overrides(build_scenario(), {"lambda": 5.0}),
        axis="n",
        values=[1.0, 3.0],
        outputs=["throughput", "access_delay", "p_b"],
    )
    rows = run_sweep(spec, sim_config=SimConfig(seed=8, sim_duration=20.0, warmup=2.0, batch_count=4))

    stream = io.StringIO()
    write_sweep_csv(spec, rows, stream, simulate=True)
    lines = stream.getvalue().splitlines()

    assert lines[0] == "# units: n[1] throughput[bit/s] access_delay[s] p_b[1]"
    records = list(csv.reader(lines[1:]))
    assert records[0] == SIMULATED_SWEEP_HEADER
    assert [record[0] for record in records[1:]] == ["1", "3"]
    for record in records[1:]:
        assert len(record) == len(SIMULATED_SWEEP_HEADER)
        assert record[-1] == "true"
        float(record[4])
        float(record[6])
