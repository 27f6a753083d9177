"""pyDCF package.

The package is organized into:
- `pydcf.core`: domain models, presets, validation and flat config mapping.
- `pydcf.application`: transport-agnostic use-cases (analyze, sweep, simulate, compare).
- `pydcf.methods`: numerical implementations (closed forms, solver, chain oracle, simulator).
- `pydcf.cli`: command-line adapter.
"""

__all__ = ["core", "application", "methods", "cli"]
