from __future__ import annotations

import pytest

from pydcf.core.models import ProtocolConfig
from pydcf.core.presets import build_scenario
from pydcf.core.request_mapper import apply_overrides
from pydcf.methods.dcf.timing import (
    failure_duration,
    frame_duration,
    payload_total_bits,
    success_duration,
    window_at_stage,
)


def test_frame_durations_for_table_defaults() -> None:
    scenario = build_scenario()

    assert frame_duration("data", scenario) == pytest.approx(8640e-6)
    assert frame_duration("ack", scenario) == pytest.approx(304e-6)
    assert frame_duration("rts", scenario) == pytest.approx(352e-6)
    assert frame_duration("cts", scenario) == pytest.approx(304e-6)


def test_basic_access_success_and_failure_share_one_duration() -> None:
    scenario = build_scenario()

    assert success_duration(scenario) == pytest.approx(9006e-6)
    assert failure_duration(scenario) == pytest.approx(9006e-6)


def test_rtscts_failure_is_short_and_success_carries_the_handshake() -> None:
    scenario = apply_overrides(build_scenario(), {"access_mode": "rtscts"})

    assert success_duration(scenario) == pytest.approx(9684e-6)
    assert failure_duration(scenario) == pytest.approx(718e-6)
    assert failure_duration(scenario) < success_duration(scenario)


def test_faster_data_rate_only_shrinks_the_data_body() -> None:
    slow = build_scenario()
    fast = apply_overrides(slow, {"data_rate": 2e6})

    assert frame_duration("ack", fast) == pytest.approx(frame_duration("ack", slow))
    assert frame_duration("data", fast) == pytest.approx(192e-6 + 8448 / 2e6)


def test_unknown_frame_kind_is_rejected() -> None:
    with pytest.raises(ValueError):
        frame_duration("beacon", build_scenario())  # type: ignore[arg-type]


def test_window_schedule_doubles_then_caps() -> None:
    protocol = ProtocolConfig(w0=32, m=7, m_prime=5)

    assert [window_at_stage(i, protocol) for i in range(8)] == [32, 64, 128, 256, 512, 1024, 1024, 1024]
    with pytest.raises(ValueError):
        window_at_stage(8, protocol)
    with pytest.raises(ValueError):
        window_at_stage(-1, protocol)


def test_payload_total_bits_adds_ip_and_transport_headers() -> None:
    assert payload_total_bits(build_scenario()) == 8224
