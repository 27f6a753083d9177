"""Data models used by the analytic, simulation, and CLI layers.

Units are SI throughout: seconds, bits, bits/second and packets/second.
Configuration files express durations in microseconds; the request mapper
converts them on load.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

AccessMode = Literal["basic", "rtscts"]
FrameKind = Literal["data", "ack", "rts", "cts"]
SolverMode = Literal["unsaturated", "saturated"]
CollisionModel = Literal["conditional", "per_station"]


@dataclass(slots=True)
class PhyTimings:
    """PHY timing and rate parameters (defaults follow 802.11b DSSS)."""

    idle_slot: float = 20e-6
    sifs: float = 10e-6
    difs: float = 50e-6
    prop_delay: float = 1e-6
    plcp_header_bits: int = 144
    preamble_bits: int = 48
    data_rate: float = 1e6
    basic_rate: float = 1e6
    plcp_rate: float = 1e6


@dataclass(slots=True)
class ProtocolConfig:
    """Backoff configuration.

    Attributes:
        w0: Initial contention window W.
        m: Retry limit; a packet is dropped after m + 1 failed attempts.
        m_prime: Number of window-doubling stages m'.
        access_mode: ``"basic"`` or ``"rtscts"``.
    """

    w0: int = 32
    m: int = 7
    m_prime: int = 5
    access_mode: AccessMode = "basic"


@dataclass(slots=True)
class TrafficConfig:
    """Offered load and queue sizing for every station."""

    arrival_rate: float = 10.0
    payload_bits: int = 8000
    ip_header_bits: int = 160
    transport_header_bits: int = 64
    queue_len: int = 50


@dataclass(slots=True)
class ChannelConfig:
    """Imperfect-channel and power-capture settings."""

    p_e: float = 0.0
    capture_enabled: bool = False
    z: float = 1.0
    s: int = 11


@dataclass(slots=True)
class MacOverhead:
    """MAC body sizes in bits (802.11 header+FCS for data, control frame bodies)."""

    data_overhead_bits: int = 224
    ack_bits: int = 112
    rts_bits: int = 160
    cts_bits: int = 112


@dataclass(slots=True)
class Scenario:
    """Full input bundle for one homogeneous network."""

    n: int = 10
    phy: PhyTimings = field(default_factory=PhyTimings)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    mac_overhead_bits: MacOverhead = field(default_factory=MacOverhead)
    name: str = "custom"
    description: str = ""

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dictionary representation."""

        return asdict(self)


@dataclass(slots=True)
class SteadyState:
    """Coupled probabilities at a fixed point of the analytic model."""

    tau: float
    p_b: float
    p_c: float
    p_p: float
    p_f: float
    p_s: float
    p_q: float
    b00: float
    b_e: float


@dataclass(slots=True)
class Metrics:
    """Performance measures derived from a SteadyState."""

    throughput: float
    access_delay: float
    network_loss: float
    queue_loss: float
    hoq_slots: float
    slot_time: float
    load_factor: float = 0.0
    service_rate: float = 0.0
    delivery_prob: float = 1.0
    offered_load: float = 0.0


@dataclass(slots=True)
class SolverOptions:
    """Numerical settings for the coupled fixed-point iteration.

    ``tau_seed=None`` seeds with the zero-contention value 2/(W+1).
    """

    tol: float = 1e-10
    max_iter: int = 10_000
    damping: float = 0.5
    mode: SolverMode = "unsaturated"
    tau_seed: float | None = None
    collision_model: CollisionModel = "conditional"
    scan_points: int = 200


@dataclass(slots=True)
class ResidualTriple:
    """Signed defects of the three defining equations at a trial point."""

    tau: float
    p_f: float
    p_q: float

    @property
    def max_abs(self) -> float:
        return max(abs(self.tau), abs(self.p_f), abs(self.p_q))


@dataclass(slots=True)
class Solution:
    """Output produced by one solver run."""

    state: SteadyState
    metrics: Metrics
    iterations: int
    residual: float
    converged: bool
    root_brackets: list[tuple[float, float]] = field(default_factory=list)
    multiple_roots: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dictionary representation."""

        return asdict(self)


@dataclass(slots=True)
class SimConfig:
    """Run control for the slot-synchronous simulator."""

    seed: int = 1
    sim_duration: float = 2000.0
    warmup: float = 100.0
    batch_count: int = 10
    trace_path: Path | None = None


@dataclass(slots=True)
class SimMetrics:
    """Empirical measures from one simulation run (post-warmup window)."""

    throughput: float
    throughput_ci: float
    mean_access_delay: float
    access_delay_ci: float
    network_loss_rate: float
    queue_loss_rate: float
    empirical_tau: float
    empirical_p_c: float
    arrivals: int = 0
    delivered: int = 0
    network_drops: int = 0
    queue_drops: int = 0
    backlog: int = 0
    slots: int = 0
    seed: int = 0
    batch_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-safe dictionary; undefined statistics become ``None``."""

        return {
            key: (None if isinstance(value, float) and math.isnan(value) else value)
            for key, value in asdict(self).items()
        }


@dataclass(slots=True)
class SweepSpec:
    """One-axis parameter sweep over a base scenario."""

    base: Scenario
    axis: str
    values: list[float]
    outputs: list[str] = field(default_factory=lambda: ["throughput", "access_delay"])


@dataclass(slots=True)
class ComparisonRow:
    """Analytic vs simulated value of one metric at one axis point."""

    axis_value: float
    metric: str
    analytic: float
    simulated: float
    ci: float
    relative_error: float
    converged: bool = True
