"""Batch-means confidence intervals."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import stats


def batch_means_ci(batch_values: Sequence[float], confidence: float = 0.95) -> tuple[float, float]:
    """Return (mean, half-width) of a Student-t interval over batch means.

    NaN batches (no samples) are dropped; fewer than two usable batches give a
    NaN half-width.
    """

    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")

    values = np.asarray(batch_values, dtype=float)
    values = values[~np.isnan(values)]
    if values.size == 0:
        return math.nan, math.nan

    mean = float(values.mean())
    if values.size < 2:
        return mean, math.nan

    sem = float(stats.sem(values))
    if sem == 0.0:
        return mean, 0.0
    low, high = stats.t.interval(confidence, values.size - 1, loc=mean, scale=sem)
    return mean, float(high - low) / 2.0
