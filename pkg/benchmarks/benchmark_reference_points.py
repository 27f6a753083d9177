"""Print the analytic model at the reference operating points of the 802.11b DSSS table.

References used:
- One station at 2 pkt/s: throughput 260.027 kbps, access delay 462 us.
- Saturated throughput for n = 5..15 reported between 0.81 and 0.99 Mbps.
"""

from __future__ import annotations

import argparse

from pydcf.application.sweep import comparison_summary, run_comparison
from pydcf.core.models import SimConfig, SolverOptions, SweepSpec
from pydcf.core.presets import build_scenario
from pydcf.core.request_mapper import apply_overrides
from pydcf.methods.dcf.solver import solve

STATION_COUNTS = (1, 5, 10, 15)
ARRIVAL_RATES = (0.5, 1.0, 2.0, 5.0, 9.0)


def light_station_point() -> tuple[float, float]:
    solution = solve(apply_overrides(build_scenario(n=1), {"lambda": 2.0}))
    return solution.metrics.throughput, solution.metrics.access_delay


def saturated_throughput(n: int, collision_model: str) -> float:
    opts = SolverOptions(mode="saturated", collision_model=collision_model)  # type: ignore[arg-type]
    return solve(build_scenario(n=n), opts).metrics.throughput


def unsaturated_grid(collision_model: str) -> list[tuple[int, float, float, float]]:
    """Return (n, lambda, throughput, access delay) over the reference grid."""

    opts = SolverOptions(collision_model=collision_model)  # type: ignore[arg-type]
    rows = []
    for n in STATION_COUNTS:
        for rate in ARRIVAL_RATES:
            solution = solve(apply_overrides(build_scenario(n=n), {"lambda": rate}), opts)
            rows.append((n, rate, solution.metrics.throughput, solution.metrics.access_delay))
    return rows


def saturation_onset(n: int, collision_model: str, rates: tuple[float, ...] = tuple(range(1, 61))) -> float | None:
    """Return the smallest arrival rate whose throughput reaches 95% of the saturated value."""

    opts = SolverOptions(collision_model=collision_model)  # type: ignore[arg-type]
    ceiling = saturated_throughput(n, collision_model)
    for rate in rates:
        solution = solve(apply_overrides(build_scenario(n=n), {"lambda": float(rate)}), opts)
        if solution.metrics.throughput >= 0.95 * ceiling:
            return float(rate)
    return None


def error_sensitivity(n: int, rate: float, collision_model: str) -> float:
    """Return the relative throughput change when p_e goes from 0 to 0.1."""

    opts = SolverOptions(collision_model=collision_model)  # type: ignore[arg-type]
    clean = solve(apply_overrides(build_scenario(n=n), {"lambda": rate}), opts).metrics.throughput
    noisy = solve(apply_overrides(build_scenario(n=n), {"lambda": rate, "p_e": 0.1}), opts).metrics.throughput
    return abs(noisy - clean) / clean


def simulation_agreement(collision_model: str, duration: float = 2000.0) -> list[tuple[int, float, dict]]:
    """Return (n, p_e, summary) of analytic-vs-simulated relative errors over the lambda grid."""

    opts = SolverOptions(collision_model=collision_model)  # type: ignore[arg-type]
    results = []
    for n in (4, 10):
        for p_e in (0.0, 0.1):
            base = apply_overrides(build_scenario(n=n), {"p_e": p_e})
            spec = SweepSpec(
                base=base,
                axis="lambda",
                values=[2.0, 10.0, 30.0, 60.0],
                outputs=["throughput", "access_delay"],
            )
            rows = run_comparison(spec, opts, SimConfig(sim_duration=duration))
            results.append((n, p_e, comparison_summary(rows)))
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--simulate", action="store_true", help="Also run the 2000 s simulation grid (minutes)")
    args = parser.parse_args()

    throughput, delay = light_station_point()

    print("Benchmark summary (n=1, lambda=2 pkt/s):")
    print("----------------------------------------------")
    print(f"Throughput reference [kbps]   : {260.027: .3f}")
    print(f"Throughput computed  [kbps]   : {throughput / 1e3: .3f}")
    print(f"Access delay reference [us]   : {462.0: .1f}")
    print(f"Access delay computed  [us]   : {delay * 1e6: .1f}")

    for model in ("conditional", "per_station"):
        print("----------------------------------------------")
        print(f"Saturated throughput [Mbps], {model} collisions:")
        for n in STATION_COUNTS:
            print(f"  n={n:2d} : {saturated_throughput(n, model) / 1e6: .4f}")

        print(f"Unsaturated grid, {model} collisions:")
        print("   n  lambda  throughput[kbps]  delay[ms]")
        for n, rate, value, access in unsaturated_grid(model):
            print(f"  {n:2d}  {rate:6.1f}  {value / 1e3:16.3f}  {access * 1e3:9.3f}")

        print(f"Saturation onset (95%), {model} collisions:")
        for n in (4, 15):
            onset = saturation_onset(n, model)
            print(f"  n={n:2d} : " + ("not reached by 60 pkt/s" if onset is None else f"{onset:.0f} pkt/s"))

        print(f"Throughput change for p_e 0 -> 0.1 at n=10, {model} collisions:")
        for rate in (2.0, 60.0):
            print(f"  lambda={rate:4.0f} : {error_sensitivity(10, rate, model):.2%}")

        if args.simulate:
            print(f"Analytic vs simulation, {model} collisions:")
            for n, p_e, summary in simulation_agreement(model):
                print(
                    f"  n={n:2d} p_e={p_e:.1f} : max rel error {summary['max_rel_error']:.3f}, "
                    f"mean {summary['mean_rel_error']:.3f}"
                )


if __name__ == "__main__":
    main()
