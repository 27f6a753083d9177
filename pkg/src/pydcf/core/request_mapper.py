"""Shared scenario mapping and validation utilities.

This module is transport-independent: the CLI flags, the flat ``key = value``
configuration files, and the sweep engine all pass through
:func:`parse_scenario_payload` / :func:`apply_overrides` so a scenario means
the same thing whichever way it was described.
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import ScenarioValidationError
from .models import Scenario
from .presets import build_scenario, validate_scenario

_MICROSECOND = 1e-6


def _to_int(value: Any) -> int:
    if isinstance(value, str):
        value = value.strip()
        number = float(value)
        if not number.is_integer():
            raise ValueError(f"expected an integer, got '{value}'")
        return int(number)
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer, got {value}")
    return int(value)


def _to_float(value: Any) -> float:
    if isinstance(value, str):
        value = value.strip()
    return float(value)


def _to_microseconds(value: Any) -> float:
    return _to_float(value) * _MICROSECOND


def _to_bool(value: Any) -> bool:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in {"1", "true", "yes", "on"}:
            return True
        if lowered in {"0", "false", "no", "off"}:
            return False
        raise ValueError(f"expected a boolean, got '{value}'")
    return bool(value)


def _to_access_mode(value: Any) -> str:
    lowered = str(value).strip().lower().replace("/", "").replace("_", "").replace("-", "")
    if lowered == "basic":
        return "basic"
    if lowered == "rtscts":
        return "rtscts"
    raise ValueError(f"access_mode must be 'basic' or 'rtscts', got '{value}'")


# key -> (section attribute or None for Scenario itself, field name, converter)
_FIELDS: dict[str, tuple[str | None, str, Callable[[Any], Any]]] = {
    "n": (None, "n", _to_int),
    "idle_slot": ("phy", "idle_slot", _to_microseconds),
    "sifs": ("phy", "sifs", _to_microseconds),
    "difs": ("phy", "difs", _to_microseconds),
    "prop_delay": ("phy", "prop_delay", _to_microseconds),
    "plcp_header_bits": ("phy", "plcp_header_bits", _to_int),
    "preamble_bits": ("phy", "preamble_bits", _to_int),
    "data_rate": ("phy", "data_rate", _to_float),
    "basic_rate": ("phy", "basic_rate", _to_float),
    "plcp_rate": ("phy", "plcp_rate", _to_float),
    "w0": ("protocol", "w0", _to_int),
    "m": ("protocol", "m", _to_int),
    "m_prime": ("protocol", "m_prime", _to_int),
    "access_mode": ("protocol", "access_mode", _to_access_mode),
    "lambda": ("traffic", "arrival_rate", _to_float),
    "payload_bits": ("traffic", "payload_bits", _to_int),
    "ip_header_bits": ("traffic", "ip_header_bits", _to_int),
    "transport_header_bits": ("traffic", "transport_header_bits", _to_int),
    "queue_len": ("traffic", "queue_len", _to_int),
    "p_e": ("channel", "p_e", _to_float),
    "capture_enabled": ("channel", "capture_enabled", _to_bool),
    "z": ("channel", "z", _to_float),
    "s": ("channel", "s", _to_int),
    "data_overhead_bits": ("mac_overhead_bits", "data_overhead_bits", _to_int),
    "ack_bits": ("mac_overhead_bits", "ack_bits", _to_int),
    "rts_bits": ("mac_overhead_bits", "rts_bits", _to_int),
    "cts_bits": ("mac_overhead_bits", "cts_bits", _to_int),
}

SCENARIO_KEYS: tuple[str, ...] = tuple(_FIELDS)
MICROSECOND_KEYS: frozenset[str] = frozenset({"idle_slot", "sifs", "difs", "prop_delay"})


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""

    values: dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioValidationError("config", f"line {line_number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ScenarioValidationError("config", f"line {line_number}: empty key")
        values[key] = value
    return values


def load_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat configuration file into a key/value mapping."""

    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def parse_scenario_payload(payload: Mapping[str, Any]) -> Scenario:
    """Build a validated Scenario from a flat payload.

    ``payload["preset"]`` selects the starting point (default ``dot11b-dsss``;
    ``"none"`` starts from plain defaults). Every other key must be a known
    scenario field; ``None`` values are ignored.
    """

    preset = payload.get("preset", "dot11b-dsss")
    if isinstance(preset, str) and preset.strip().lower() == "none":
        preset = None
    base = build_scenario(preset=preset)
    overrides = {key: value for key, value in payload.items() if key != "preset"}
    return apply_overrides(base, overrides)


def apply_overrides(scenario: Scenario, overrides: Mapping[str, Any]) -> Scenario:
    """Return a validated copy of ``scenario`` with flat-key overrides applied."""

    updated = copy.deepcopy(scenario)
    for key, raw in overrides.items():
        if raw is None:
            continue
        if key not in _FIELDS:
            raise ScenarioValidationError(key, f"unknown scenario key '{key}'")
        section, attribute, convert = _FIELDS[key]
        try:
            value = convert(raw)
        except (TypeError, ValueError) as exc:
            raise ScenarioValidationError(key, f"invalid value for '{key}': {exc}") from exc
        target = updated if section is None else getattr(updated, section)
        setattr(target, attribute, value)
    return validate_scenario(updated)


def scenario_value(scenario: Scenario, key: str) -> Any:
    """Read one flat-key value back out of a scenario (durations in microseconds)."""

    if key not in _FIELDS:
        raise ScenarioValidationError(key, f"unknown scenario key '{key}'")
    section, attribute, _convert = _FIELDS[key]
    source = scenario if section is None else getattr(scenario, section)
    value = getattr(source, attribute)
    if key in MICROSECOND_KEYS:
        return value / _MICROSECOND
    return value
