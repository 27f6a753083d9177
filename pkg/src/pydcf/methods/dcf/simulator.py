"""Slot-synchronous simulation of n homogeneous DCF stations.

Each station owns a finite FIFO fed by Poisson arrivals, an m-retry binary
exponential backoff and its own random stream. A step of :func:`advance_slot`
is either a run of idle slots (every backoff counter decrements) or one busy
period of length t_S or t_F during which all counters freeze.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from collections import deque
from contextlib import ExitStack
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from pydcf.core.errors import ScenarioValidationError
from pydcf.core.models import Scenario, SimConfig, SimMetrics

from .analytic import processing_gain_inverse
from .statistics import batch_means_ci
from .timing import failure_duration, payload_total_bits, success_duration, window_at_stage

logger = logging.getLogger(__name__)

StationPhase = Literal["empty_idle", "backoff", "transmitting"]
TRACE_HEADER = ["time", "station", "event", "stage", "counter", "queue_len"]
PROGRESS_INTERVAL = 100.0


@dataclass(slots=True)
class StationState:
    """One station: its queue of arrival timestamps and its backoff position."""

    rng: np.random.Generator
    queue: deque[float] = field(default_factory=deque)
    retry_stage: int = 0
    backoff_counter: int = 0
    phase: StationPhase = "empty_idle"
    hoq_start: float = 0.0
    next_arrival: float = math.inf


@dataclass(slots=True)
class SimTally:
    """Run counters. Totals cover the whole run; ``post_*`` and batches only the measured window."""

    window_start: float
    window_end: float
    batch_count: int
    arrivals: int = 0
    delivered: int = 0
    network_drops: int = 0
    queue_drops: int = 0
    post_arrivals: int = 0
    post_delivered: int = 0
    post_network_drops: int = 0
    post_queue_drops: int = 0
    post_slots: int = 0
    post_attempts: int = 0
    post_collided_attempts: int = 0
    delay_sum: float = 0.0
    batch_deliveries: np.ndarray = field(default_factory=lambda: np.zeros(0))
    batch_delay_sum: np.ndarray = field(default_factory=lambda: np.zeros(0))
    batch_delay_count: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        self.batch_deliveries = np.zeros(self.batch_count)
        self.batch_delay_sum = np.zeros(self.batch_count)
        self.batch_delay_count = np.zeros(self.batch_count)

    def measured(self, at: float) -> bool:
        return self.window_start <= at <= self.window_end

    def batch_of(self, at: float) -> int:
        width = (self.window_end - self.window_start) / self.batch_count
        return min(int((at - self.window_start) / width), self.batch_count - 1)


@dataclass(slots=True)
class World:
    """Complete simulator state advanced by :func:`advance_slot`."""

    scenario: Scenario
    stations: list[StationState]
    channel_rng: np.random.Generator
    windows: list[int]
    t_success: float
    t_failure: float
    tally: SimTally
    time: float = 0.0
    slots: int = 0
    finished: bool = False
    trace: Any = None


def validate_sim_config(cfg: SimConfig) -> SimConfig:
    if cfg.warmup < 0:
        raise ScenarioValidationError("warmup", "warmup must be >= 0")
    if cfg.sim_duration <= cfg.warmup:
        raise ScenarioValidationError("duration", "duration must exceed warmup")
    if cfg.batch_count < 2:
        raise ScenarioValidationError("batches", "batch_count must be >= 2")
    return cfg


def build_world(scenario: Scenario, cfg: SimConfig) -> World:
    """Create the initial world: every queue empty, first arrivals drawn.

    Streams come from ``SeedSequence(seed).spawn(n + 1)``: one per station, the
    last for channel errors and capture.
    """

    validate_sim_config(cfg)
    children = np.random.SeedSequence(cfg.seed).spawn(scenario.n + 1)
    rate = scenario.traffic.arrival_rate

    stations = []
    for child in children[:-1]:
        station = StationState(rng=np.random.default_rng(child))
        if rate > 0:
            station.next_arrival = float(station.rng.exponential(1.0 / rate))
        stations.append(station)

    protocol = scenario.protocol
    return World(
        scenario=scenario,
        stations=stations,
        channel_rng=np.random.default_rng(children[-1]),
        windows=[window_at_stage(stage, protocol) for stage in range(protocol.m + 1)],
        t_success=success_duration(scenario),
        t_failure=failure_duration(scenario),
        tally=SimTally(window_start=cfg.warmup, window_end=cfg.sim_duration, batch_count=cfg.batch_count),
    )


def _trace(world: World, at: float, index: int, event: str) -> None:
    if world.trace is None:
        return
    station = world.stations[index]
    world.trace.writerow(
        [f"{at:.9f}", index, event, station.retry_stage, station.backoff_counter, len(station.queue)]
    )


def _start_backoff(world: World, station: StationState) -> None:
    station.phase = "backoff"
    station.backoff_counter = int(station.rng.integers(0, world.windows[station.retry_stage]))


def _process_arrivals(world: World, until: float) -> None:
    """Admit every arrival with timestamp <= ``until``, in time order per station."""

    rate = world.scenario.traffic.arrival_rate
    capacity = world.scenario.traffic.queue_len
    tally = world.tally

    for index, station in enumerate(world.stations):
        while station.next_arrival <= until:
            at = station.next_arrival
            station.next_arrival = at + float(station.rng.exponential(1.0 / rate))
            tally.arrivals += 1
            measured = tally.measured(at)
            if measured:
                tally.post_arrivals += 1

            if len(station.queue) >= capacity:
                tally.queue_drops += 1
                if measured:
                    tally.post_queue_drops += 1
                _trace(world, at, index, "queue_drop")
                continue

            station.queue.append(at)
            if station.phase == "empty_idle":
                station.retry_stage = 0
                station.hoq_start = at
                _start_backoff(world, station)
            _trace(world, at, index, "arrival")


def _finish_hoq(world: World, index: int, at: float) -> None:
    """Remove the head-of-queue packet and move on to the next one (or to E)."""

    station = world.stations[index]
    station.queue.popleft()
    station.retry_stage = 0
    if station.queue:
        station.hoq_start = at
        _start_backoff(world, station)
    else:
        station.phase = "empty_idle"
        station.backoff_counter = 0


def _deliver(world: World, index: int, at: float) -> None:
    station = world.stations[index]
    tally = world.tally
    delay = at - station.hoq_start

    tally.delivered += 1
    if tally.measured(at):
        batch = tally.batch_of(at)
        tally.post_delivered += 1
        tally.delay_sum += delay
        tally.batch_deliveries[batch] += 1
        tally.batch_delay_sum[batch] += delay
        tally.batch_delay_count[batch] += 1
    _trace(world, at, index, "success")
    _finish_hoq(world, index, at)


def _fail(world: World, index: int, at: float) -> None:
    station = world.stations[index]
    tally = world.tally
    _trace(world, at, index, "failure")

    if station.retry_stage >= world.scenario.protocol.m:
        tally.network_drops += 1
        if tally.measured(at):
            tally.post_network_drops += 1
        _trace(world, at, index, "retry_drop")
        _finish_hoq(world, index, at)
        return

    station.retry_stage += 1
    _start_backoff(world, station)


def _idle_run_length(world: World, backoff: list[StationState], max_idle_slots: int) -> float:
    sigma = world.scenario.phy.idle_slot
    bound = float(max_idle_slots)
    if backoff:
        bound = min(bound, float(min(station.backoff_counter for station in backoff)))
    next_arrival = min(station.next_arrival for station in world.stations)
    if math.isfinite(next_arrival):
        bound = min(bound, float(max(math.ceil((next_arrival - world.time) / sigma), 1)))
    elif not backoff:
        return math.inf
    return bound


def advance_slot(world: World, max_idle_slots: int = 1) -> World:
    """Advance the world by one step and return it (mutated in place).

    Idle step: up to ``max_idle_slots`` slots pass, bounded by the smallest
    backoff counter and the slot boundary at which the next arrival falls.
    Busy step: every station whose counter is 0 transmits; one transmitter
    fails with p_E; among j >= 2, one uniformly chosen frame is captured with
    probability (1 + z g)^-(j-1) when capture is enabled and still fails with
    p_E; everything else fails. The clock moves by t_S if a frame got through,
    else t_F. A world with no traffic left is marked ``finished``.
    """

    if max_idle_slots < 1:
        raise ValueError("max_idle_slots must be >= 1")

    _process_arrivals(world, world.time)
    tally = world.tally
    backoff = [station for station in world.stations if station.phase == "backoff"]
    transmitters = [
        index
        for index, station in enumerate(world.stations)
        if station.phase == "backoff" and station.backoff_counter == 0
    ]

    if not transmitters:
        run = _idle_run_length(world, backoff, max_idle_slots)
        if math.isinf(run):
            world.finished = True
            return world
        slots = int(run)
        for station in backoff:
            station.backoff_counter -= slots
        if tally.measured(world.time):
            tally.post_slots += slots
        world.slots += slots
        world.time += slots * world.scenario.phy.idle_slot
        return world

    channel = world.scenario.channel
    start = world.time
    for index in transmitters:
        world.stations[index].phase = "transmitting"
        _trace(world, start, index, "transmit")

    winner: int | None = None
    if len(transmitters) == 1:
        if world.channel_rng.random() >= channel.p_e:
            winner = transmitters[0]
    elif channel.capture_enabled:
        candidate = transmitters[int(world.channel_rng.integers(0, len(transmitters)))]
        g = processing_gain_inverse(channel.s)
        if world.channel_rng.random() < (1.0 + channel.z * g) ** (-(len(transmitters) - 1)):
            if world.channel_rng.random() >= channel.p_e:
                winner = candidate

    end = start + (world.t_success if winner is not None else world.t_failure)

    if tally.measured(start):
        tally.post_slots += 1
        tally.post_attempts += len(transmitters)
        if len(transmitters) > 1:
            tally.post_collided_attempts += len(transmitters)
    world.slots += 1

    # Arrivals during the busy period queue behind the frame in flight.
    _process_arrivals(world, end)
    world.time = end

    for index in transmitters:
        if index == winner:
            _deliver(world, index, end)
        else:
            _fail(world, index, end)
    return world


def _summarize(world: World, cfg: SimConfig) -> SimMetrics:
    tally = world.tally
    window = cfg.sim_duration - cfg.warmup
    batch_width = window / cfg.batch_count
    bits = payload_total_bits(world.scenario)

    batch_throughput = tally.batch_deliveries * bits / batch_width
    throughput, throughput_ci = batch_means_ci(batch_throughput)
    if tally.post_delivered == 0:
        throughput, throughput_ci = 0.0, 0.0

    with np.errstate(invalid="ignore", divide="ignore"):
        batch_delay = np.where(
            tally.batch_delay_count > 0,
            tally.batch_delay_sum / np.maximum(tally.batch_delay_count, 1),
            np.nan,
        )
    _batch_mean_delay, delay_ci = batch_means_ci(batch_delay)
    mean_delay = tally.delay_sum / tally.post_delivered if tally.post_delivered else math.nan

    resolved = tally.post_delivered + tally.post_network_drops
    backlog = sum(len(station.queue) for station in world.stations)
    slot_opportunities = tally.post_slots * world.scenario.n

    return SimMetrics(
        throughput=float(throughput),
        throughput_ci=float(throughput_ci),
        mean_access_delay=float(mean_delay),
        access_delay_ci=float(delay_ci),
        network_loss_rate=tally.post_network_drops / resolved if resolved else 0.0,
        queue_loss_rate=tally.post_queue_drops / tally.post_arrivals if tally.post_arrivals else 0.0,
        empirical_tau=tally.post_attempts / slot_opportunities if slot_opportunities else 0.0,
        empirical_p_c=tally.post_collided_attempts / tally.post_attempts if tally.post_attempts else 0.0,
        arrivals=tally.arrivals,
        delivered=tally.delivered,
        network_drops=tally.network_drops,
        queue_drops=tally.queue_drops,
        backlog=backlog,
        slots=world.slots,
        seed=cfg.seed,
        batch_count=cfg.batch_count,
    )


def run(scenario: Scenario, cfg: SimConfig | None = None) -> SimMetrics:
    """Simulate ``cfg.sim_duration`` seconds and report post-warmup measures.

    Deterministic for a fixed seed. With ``cfg.trace_path`` set, every event is
    written as a CSV row ``time,station,event,stage,counter,queue_len``.
    """

    settings = validate_sim_config(cfg or SimConfig())
    world = build_world(scenario, settings)
    started = time.perf_counter()
    logger.info(
        "simulation start: n=%d lambda=%.3f seed=%d duration=%.1fs warmup=%.1fs",
        scenario.n,
        scenario.traffic.arrival_rate,
        settings.seed,
        settings.sim_duration,
        settings.warmup,
    )

    with ExitStack() as stack:
        if settings.trace_path is not None:
            settings.trace_path.parent.mkdir(parents=True, exist_ok=True)
            handle = stack.enter_context(settings.trace_path.open("w", newline="", encoding="utf-8"))
            world.trace = csv.writer(handle)
            world.trace.writerow(TRACE_HEADER)

        next_progress = PROGRESS_INTERVAL
        while world.time < settings.sim_duration and not world.finished:
            advance_slot(world, max_idle_slots=2**31)
            if world.time >= next_progress:
                logger.debug("t=%.1fs slots=%d delivered=%d", world.time, world.slots, world.tally.delivered)
                next_progress += PROGRESS_INTERVAL

    metrics = _summarize(world, settings)
    logger.info(
        "simulation end: %d slots, %d delivered, %d dropped, %.2fs wall clock",
        world.slots,
        metrics.delivered,
        metrics.network_drops + metrics.queue_drops,
        time.perf_counter() - started,
    )
    return metrics
