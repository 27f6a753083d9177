"""Finite geometric sums evaluated without the removable singularity at ratio 1."""

from __future__ import annotations

import numpy as np


def geometric_sum(ratio: float, count: int) -> float:
    r"""Return \sum_{i=0}^{count-1} ratio^i for ``ratio >= 0``.

    ``(1 - x^k)/(1 - x)`` is evaluated as ``expm1(k log x)/(x - 1)`` so values
    just either side of ``x = 1`` stay accurate; ``x = 1`` returns ``count``.
    """

    if count <= 0:
        return 0.0
    if ratio < 0:
        raise ValueError("ratio must be non-negative")
    if ratio == 1.0:
        return float(count)
    if ratio == 0.0:
        return 1.0
    return float(np.expm1(count * np.log(ratio)) / (ratio - 1.0))
