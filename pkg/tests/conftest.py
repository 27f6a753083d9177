"""Test configuration: local package imports and the hypothesis profile."""

from __future__ import annotations

import os
import sys
from pathlib import Path

from hypothesis import settings

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"

if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

# First calls into scipy are slow enough to trip the per-example deadline.
settings.register_profile("pydcf", deadline=None, max_examples=100)
settings.register_profile("pydcf-quick", deadline=None, max_examples=20)
settings.load_profile(os.environ.get("PYDCF_HYPOTHESIS_PROFILE", "pydcf"))
