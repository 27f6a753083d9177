"""Finite M/M/1/l_Q queue relations driven by the channel access delay.

Both quantities depend only on the offered load x = lambda * d_C. For x > 1
the expressions are rewritten in y = 1/x so large loads and long queues never
overflow.
"""

from __future__ import annotations

from .series import geometric_sum


def _offered_load(arrival_rate: float, d_c: float, l_q: int) -> float:
    if arrival_rate < 0:
        raise ValueError("arrival_rate must be >= 0")
    if d_c <= 0:
        raise ValueError("d_c must be positive")
    if l_q < 1:
        raise ValueError("l_q must be >= 1")
    return arrival_rate * d_c


def queue_nonempty_prob(arrival_rate: float, d_c: float, l_q: int) -> float:
    """Return p_Q = (x - x^(l_Q+1)) / (1 - x^(l_Q+1)) with x = lambda * d_C.

    At x = 1 this is the limit l_Q / (l_Q + 1).
    """

    x = _offered_load(arrival_rate, d_c, l_q)
    if x == 0.0:
        return 0.0
    if x <= 1.0:
        return x * geometric_sum(x, l_q) / geometric_sum(x, l_q + 1)
    y = 1.0 / x
    return geometric_sum(y, l_q) / geometric_sum(y, l_q + 1)


def queue_loss(arrival_rate: float, d_c: float, l_q: int) -> float:
    """Return e_Q, the probability an arrival finds the queue full.

    e_Q = (x^l_Q - x^(l_Q+1)) / (1 - x^(l_Q+1)), and 1/(l_Q+1) at x = 1.
    """

    x = _offered_load(arrival_rate, d_c, l_q)
    if x == 0.0:
        return 0.0
    if x <= 1.0:
        return x**l_q / geometric_sum(x, l_q + 1)
    return 1.0 / geometric_sum(1.0 / x, l_q + 1)
