from __future__ import annotations

import pytest

from pydcf.methods.dcf.queueing import queue_loss, queue_nonempty_prob
from pydcf.methods.dcf.series import geometric_sum


def test_geometric_sum_special_ratios() -> None:
    assert geometric_sum(0.5, 0) == 0.0
    assert geometric_sum(1.0, 7) == 7.0
    assert geometric_sum(0.0, 3) == 1.0
    assert geometric_sum(2.0, 4) == pytest.approx(15.0)
    assert geometric_sum(0.5, 3) == pytest.approx(1.75)


def test_zero_arrivals_give_empty_queue() -> None:
    assert queue_nonempty_prob(0.0, 0.01, 10) == 0.0
    assert queue_loss(0.0, 0.01, 10) == 0.0


def test_queue_values_at_unit_load() -> None:
    assert queue_nonempty_prob(1.0, 1.0, 3) == pytest.approx(0.75)
    assert queue_loss(1.0, 1.0, 4) == 0.2


def test_queue_values_above_unit_load() -> None:
    assert queue_nonempty_prob(2.0, 1.0, 2) == pytest.approx(6.0 / 7.0)
    assert queue_loss(2.0, 1.0, 2) == pytest.approx(4.0 / 7.0)


def test_queue_relations_are_continuous_at_unit_load() -> None:
    for x in (1.0 - 1e-8, 1.0 + 1e-8):
        assert abs(queue_nonempty_prob(x, 1.0, 3) - 0.75) < 1e-6
        assert abs(queue_loss(x, 1.0, 4) - 0.2) < 1e-6


def test_heavy_load_does_not_overflow() -> None:
    assert queue_nonempty_prob(1e6, 1.0, 500) == pytest.approx(1.0)
    assert 0.0 < queue_loss(1e6, 1.0, 500) <= 1.0


def test_nonempty_probability_rises_with_load() -> None:
    values = [queue_nonempty_prob(rate, 0.1, 50) for rate in (1, 5, 9, 10, 11, 20, 100)]
    assert values == sorted(values)


def test_domain_violations_raise() -> None:
    with pytest.raises(ValueError):
        queue_nonempty_prob(-1.0, 0.1, 5)
    with pytest.raises(ValueError):
        queue_loss(1.0, 0.0, 5)
    with pytest.raises(ValueError):
        queue_loss(1.0, 0.1, 0)
