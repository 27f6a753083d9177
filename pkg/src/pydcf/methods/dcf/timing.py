"""Deterministic timing algebra: frame airtimes, t_S, t_F and the window schedule."""

from __future__ import annotations

from pydcf.core.models import FrameKind, ProtocolConfig, Scenario


def frame_duration(kind: FrameKind, scenario: Scenario) -> float:
    """Return the airtime of one frame in seconds.

    PLCP preamble and header go out at ``plcp_rate``; the data body (MAC
    overhead + IP + transport headers + payload) at ``data_rate``; control
    frame bodies at ``basic_rate``.
    """

    phy = scenario.phy
    overhead = scenario.mac_overhead_bits
    plcp = (phy.preamble_bits + phy.plcp_header_bits) / phy.plcp_rate

    if kind == "data":
        traffic = scenario.traffic
        body_bits = (
            overhead.data_overhead_bits
            + traffic.ip_header_bits
            + traffic.transport_header_bits
            + traffic.payload_bits
        )
        return plcp + body_bits / phy.data_rate
    if kind == "ack":
        return plcp + overhead.ack_bits / phy.basic_rate
    if kind == "rts":
        return plcp + overhead.rts_bits / phy.basic_rate
    if kind == "cts":
        return plcp + overhead.cts_bits / phy.basic_rate

    raise ValueError(f"frame kind must be one of 'data', 'ack', 'rts', 'cts', got '{kind}'")


def success_duration(scenario: Scenario) -> float:
    """Return t_S, the time from DIFS start until the ACK has been received."""

    phy = scenario.phy
    t_d = frame_duration("data", scenario)
    t_a = frame_duration("ack", scenario)
    data_exchange = t_d + phy.prop_delay + phy.sifs + t_a + phy.prop_delay

    if scenario.protocol.access_mode == "basic":
        return phy.difs + data_exchange

    t_r = frame_duration("rts", scenario)
    t_c = frame_duration("cts", scenario)
    handshake = t_r + phy.prop_delay + phy.sifs + t_c + phy.prop_delay + phy.sifs
    return phy.difs + handshake + data_exchange


def failure_duration(scenario: Scenario) -> float:
    """Return t_F, the time a sender waits before declaring an attempt failed."""

    phy = scenario.phy
    if scenario.protocol.access_mode == "basic":
        t_d = frame_duration("data", scenario)
        t_a = frame_duration("ack", scenario)
        return phy.difs + t_d + phy.prop_delay + phy.sifs + t_a + phy.prop_delay

    t_r = frame_duration("rts", scenario)
    t_c = frame_duration("cts", scenario)
    return phy.difs + t_r + phy.prop_delay + phy.sifs + t_c + phy.prop_delay


def window_at_stage(i: int, protocol: ProtocolConfig) -> int:
    """Return W_i = 2^min(i, m') * W for retry stage ``0 <= i <= m``."""

    if i < 0 or i > protocol.m:
        raise ValueError(f"retry stage i must lie in [0, {protocol.m}], got {i}")
    return (2 ** min(i, protocol.m_prime)) * protocol.w0


def payload_total_bits(scenario: Scenario) -> int:
    """Return l_D + l_I + l_U, the bits credited to throughput per delivery."""

    traffic = scenario.traffic
    return traffic.payload_bits + traffic.ip_header_bits + traffic.transport_header_bits
