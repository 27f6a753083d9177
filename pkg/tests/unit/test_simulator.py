from __future__ import annotations

import csv
import math
from collections import Counter, deque
from pathlib import Path

import pytest

from pydcf.core.errors import ScenarioValidationError
from pydcf.core.models import Scenario, SimConfig
from pydcf.core.presets import build_scenario
from pydcf.core.request_mapper import apply_overrides
from pydcf.methods.dcf.simulator import TRACE_HEADER, World, advance_slot, build_world, run, validate_sim_config

T_BASIC = 9006e-6
SIGMA = 20e-6
WINDOW = SimConfig(seed=7, sim_duration=10.0, warmup=0.0, batch_count=2)


def _scenario(n: int, arrival_rate: float = 0.0, **overrides) -> Scenario:
    return apply_overrides(build_scenario(n=n), {"lambda": arrival_rate, **overrides})


def _world(scenario: Scenario, counters: list[int], stage: int = 0) -> World:
    world = build_world(scenario, WINDOW)
    for station, counter in zip(world.stations, counters):
        station.queue = deque([0.0])
        station.phase = "backoff"
        station.backoff_counter = counter
        station.retry_stage = stage
        station.hoq_start = 0.0
    return world


def test_idle_slot_decrements_every_counter() -> None:
    world = advance_slot(_world(_scenario(2), [3, 5]))

    assert [station.backoff_counter for station in world.stations] == [2, 4]
    assert world.time == pytest.approx(SIGMA)
    assert world.slots == 1


def test_fast_forward_matches_single_steps() -> None:
    stepped = _world(_scenario(2), [3, 7])
    for _ in range(3):
        advance_slot(stepped)
    jumped = advance_slot(_world(_scenario(2), [3, 7]), max_idle_slots=100)

    assert [s.backoff_counter for s in jumped.stations] == [s.backoff_counter for s in stepped.stations] == [0, 4]
    assert jumped.time == pytest.approx(stepped.time)
    assert jumped.slots == stepped.slots == 3
    assert jumped.tally.post_slots == stepped.tally.post_slots == 3


def test_lone_transmitter_succeeds_and_records_its_delay() -> None:
    world = advance_slot(_world(_scenario(1), [0]))
    station = world.stations[0]

    assert world.time == pytest.approx(T_BASIC)
    assert world.tally.delivered == 1
    assert world.tally.delay_sum == pytest.approx(T_BASIC)
    assert station.phase == "empty_idle"
    assert not station.queue


def test_channel_error_sends_a_lone_transmitter_to_the_next_stage() -> None:
    world = advance_slot(_world(_scenario(1, p_e=1.0), [0]))
    station = world.stations[0]

    assert world.time == pytest.approx(T_BASIC)
    assert world.tally.delivered == 0
    assert station.retry_stage == 1
    assert station.phase == "backoff"
    assert 0 <= station.backoff_counter < 64


def test_failure_at_the_retry_limit_drops_the_packet() -> None:
    scenario = _scenario(1, p_e=1.0, m=2, m_prime=1)
    world = advance_slot(_world(scenario, [0], stage=2))
    station = world.stations[0]

    assert world.tally.network_drops == 1
    assert world.tally.post_network_drops == 1
    assert station.phase == "empty_idle"
    assert station.retry_stage == 0
    assert not station.queue


def test_dropped_packets_add_nothing_to_the_delay_tally() -> None:
    scenario = _scenario(1, p_e=1.0, m=2, m_prime=1)
    world = advance_slot(_world(scenario, [0], stage=2))

    assert world.tally.network_drops == 1
    assert world.tally.post_delivered == 0
    assert world.tally.delay_sum == 0.0
    assert world.tally.batch_delay_count.sum() == 0


def test_mean_delay_counts_delivered_packets_only() -> None:
    world = advance_slot(_world(_scenario(1), [0]))
    delivered_delay = world.tally.delay_sum

    world.scenario = _scenario(1, p_e=1.0, m=0, m_prime=0)
    station = world.stations[0]
    station.queue = deque([world.time])
    station.phase = "backoff"
    station.backoff_counter = 0
    station.hoq_start = world.time
    advance_slot(world)

    assert world.tally.delivered == 1
    assert world.tally.network_drops == 1
    assert world.tally.delay_sum == pytest.approx(delivered_delay)


def test_simultaneous_transmitters_all_fail_without_capture() -> None:
    world = advance_slot(_world(_scenario(3), [0, 0, 4]))

    assert world.time == pytest.approx(T_BASIC)
    assert [s.retry_stage for s in world.stations] == [1, 1, 0]
    assert world.stations[2].backoff_counter == 4
    assert world.tally.post_attempts == 2
    assert world.tally.post_collided_attempts == 2
    assert world.tally.delivered == 0


def test_strong_capture_lets_one_frame_through() -> None:
    scenario = _scenario(2, capture_enabled=True, z=1e-9)
    world = advance_slot(_world(scenario, [0, 0]))

    assert world.tally.delivered == 1
    assert world.time == pytest.approx(T_BASIC)
    assert sorted(s.phase for s in world.stations) == ["backoff", "empty_idle"]
    assert sorted(s.retry_stage for s in world.stations) == [0, 1]


def test_world_without_traffic_finishes() -> None:
    world = advance_slot(build_world(_scenario(3), WINDOW))

    assert world.finished
    assert world.time == 0.0


def test_zero_arrivals_give_an_empty_run() -> None:
    metrics = run(_scenario(4), SimConfig(sim_duration=50.0, warmup=5.0))

    assert metrics.arrivals == 0
    assert metrics.slots == 0
    assert metrics.throughput == 0.0
    assert math.isnan(metrics.mean_access_delay)
    assert metrics.to_dict()["mean_access_delay"] is None


def test_packets_are_conserved() -> None:
    metrics = run(_scenario(5, arrival_rate=40.0, queue_len=5), SimConfig(seed=3, sim_duration=30.0, warmup=5.0))

    assert metrics.arrivals == metrics.delivered + metrics.network_drops + metrics.queue_drops + metrics.backlog
    assert metrics.queue_drops > 0
    assert 0.0 <= metrics.queue_loss_rate <= 1.0


def test_same_seed_same_run() -> None:
    scenario = _scenario(4, arrival_rate=20.0)
    cfg = SimConfig(seed=11, sim_duration=20.0, warmup=2.0)

    assert run(scenario, cfg).to_dict() == run(scenario, cfg).to_dict()
    assert run(scenario, cfg).arrivals != run(scenario, SimConfig(seed=12, sim_duration=20.0, warmup=2.0)).arrivals


def test_single_light_station_waits_half_the_window() -> None:
    metrics = run(_scenario(1, arrival_rate=1.0), SimConfig(seed=5, sim_duration=600.0, warmup=10.0))

    assert metrics.empirical_p_c == 0.0
    assert metrics.network_drops == 0
    assert metrics.mean_access_delay == pytest.approx(15.5 * SIGMA + T_BASIC, rel=0.02)


def test_single_saturated_station_attempts_at_the_zero_contention_rate() -> None:
    metrics = run(_scenario(1, arrival_rate=2000.0), SimConfig(seed=9, sim_duration=100.0, warmup=5.0))

    assert metrics.empirical_tau == pytest.approx(2.0 / 33.0, rel=0.03)
    assert metrics.queue_loss_rate > 0.9


def test_trace_pairs_every_transmission_with_its_outcome(tmp_path: Path) -> None:
    trace = tmp_path / "trace.csv"
    run(_scenario(5, arrival_rate=50.0), SimConfig(seed=2, sim_duration=5.0, warmup=1.0, trace_path=trace))

    with trace.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == TRACE_HEADER

    groups = Counter(row[0] for row in rows[1:] if row[2] == "transmit")
    events = Counter(row[2] for row in rows[1:])
    assert sum(1 for size in groups.values() if size == 1) == events["success"]
    assert sum(size for size in groups.values() if size > 1) == events["failure"]
    assert events["failure"] > 0


@pytest.mark.parametrize(
    ("cfg", "field"),
    [
        (SimConfig(warmup=-1.0), "warmup"),
        (SimConfig(sim_duration=5.0, warmup=10.0), "duration"),
        (SimConfig(batch_count=1), "batches"),
    ],
)
def test_invalid_run_control_is_rejected(cfg: SimConfig, field: str) -> None:
    with pytest.raises(ScenarioValidationError) as excinfo:
        validate_sim_config(cfg)
    assert excinfo.value.field == field
