"""Application-layer use cases shared by adapters."""

from .analysis import list_preset_dicts, list_presets, run_analysis, run_analysis_from_payload, run_simulation
from .sweep import parse_values, run_comparison, run_sweep

__all__ = [
    "list_preset_dicts",
    "list_presets",
    "parse_values",
    "run_analysis",
    "run_analysis_from_payload",
    "run_comparison",
    "run_simulation",
    "run_sweep",
]
