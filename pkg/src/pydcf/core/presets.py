"""Preset scenarios, scenario construction, and invariant checks."""

from __future__ import annotations

import copy

from .errors import ScenarioValidationError
from .models import ChannelConfig, MacOverhead, PhyTimings, ProtocolConfig, Scenario, TrafficConfig

_PRESETS: dict[str, Scenario] = {
    "dot11b-dsss": Scenario(
        n=10,
        phy=PhyTimings(
            idle_slot=20e-6,
            sifs=10e-6,
            difs=50e-6,
            prop_delay=1e-6,
            plcp_header_bits=144,
            preamble_bits=48,
            data_rate=1e6,
            basic_rate=1e6,
            plcp_rate=1e6,
        ),
        protocol=ProtocolConfig(w0=32, m=7, m_prime=5, access_mode="basic"),
        traffic=TrafficConfig(
            arrival_rate=10.0,
            payload_bits=8000,
            ip_header_bits=160,
            transport_header_bits=64,
            queue_len=50,
        ),
        channel=ChannelConfig(p_e=0.0, capture_enabled=False, z=1.0, s=11),
        mac_overhead_bits=MacOverhead(),
        name="dot11b-dsss",
        description="802.11b DSSS at 1 Mbps, 1000 B payload over UDP/IPv4",
    ),
}


def available_presets() -> list[Scenario]:
    """Return copies of the bundled presets."""

    return [copy.deepcopy(scenario) for scenario in _PRESETS.values()]


def build_scenario(preset: str | None = "dot11b-dsss", n: int | None = None) -> Scenario:
    """Construct a validated Scenario from a preset and an optional station count."""

    if preset is None:
        base = Scenario()
    elif preset in _PRESETS:
        base = copy.deepcopy(_PRESETS[preset])
    else:
        known = ", ".join(sorted(_PRESETS))
        raise ScenarioValidationError("preset", f"unknown preset '{preset}' (known: {known})")

    if n is not None:
        base.n = n

    return validate_scenario(base)


def validate_scenario(scenario: Scenario) -> Scenario:
    """Return ``scenario`` unchanged if every invariant holds.

    Raises:
        ScenarioValidationError: naming the first violated invariant.
    """

    if scenario.n < 1:
        raise ScenarioValidationError("n", "n must be >= 1")

    phy = scenario.phy
    for name in (
        "idle_slot",
        "sifs",
        "difs",
        "prop_delay",
        "plcp_header_bits",
        "preamble_bits",
        "data_rate",
        "basic_rate",
        "plcp_rate",
    ):
        if not getattr(phy, name) > 0:
            raise ScenarioValidationError(name, f"{name} must be positive")
    if phy.difs <= phy.sifs:
        raise ScenarioValidationError("difs", "difs must exceed sifs")

    protocol = scenario.protocol
    if protocol.w0 < 1:
        raise ScenarioValidationError("w0", "w0 must be >= 1")
    if protocol.m < 0:
        raise ScenarioValidationError("m", "m must be >= 0")
    if protocol.m_prime < 0:
        raise ScenarioValidationError("m_prime", "m_prime must be >= 0")
    if protocol.m_prime > protocol.m:
        raise ScenarioValidationError("m_prime", "m_prime exceeds m")
    if protocol.access_mode not in ("basic", "rtscts"):
        raise ScenarioValidationError("access_mode", "access_mode must be 'basic' or 'rtscts'")

    traffic = scenario.traffic
    if traffic.arrival_rate < 0:
        raise ScenarioValidationError("lambda", "lambda must be >= 0")
    if traffic.payload_bits < 0:
        raise ScenarioValidationError("payload_bits", "payload_bits must be >= 0")
    if traffic.ip_header_bits < 0 or traffic.transport_header_bits < 0:
        raise ScenarioValidationError("ip_header_bits", "header sizes must be >= 0")
    if traffic.queue_len < 1:
        raise ScenarioValidationError("queue_len", "queue_len must be >= 1")

    channel = scenario.channel
    if not 0.0 <= channel.p_e <= 1.0:
        raise ScenarioValidationError("p_e", "p_e must lie in [0, 1]")
    if channel.capture_enabled and channel.z <= 0:
        raise ScenarioValidationError("z", "z must be positive when capture is enabled")
    if channel.s < 1:
        raise ScenarioValidationError("s", "s must be >= 1")

    overhead = scenario.mac_overhead_bits
    for name in ("data_overhead_bits", "ack_bits", "rts_bits", "cts_bits"):
        if getattr(overhead, name) < 0:
            raise ScenarioValidationError(name, f"{name} must be >= 0")

    return scenario
