"""Explicit per-station backoff Markov chain and its numerical stationary distribution.

States are ``E`` (empty queue) plus ``(i, k)`` for retry stage ``0 <= i <= m``
and backoff counter ``0 <= k < W_i``. p_F and p_Q are free parameters here, so
the chain checks the closed forms for b00 and tau in isolation.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Union

import numpy as np
from scipy.linalg import solve
from scipy.sparse.csgraph import connected_components

from pydcf.core.errors import ReducibleChainError
from pydcf.core.models import ProtocolConfig

from .timing import window_at_stage

logger = logging.getLogger(__name__)

EmptyStateRule = Literal["dwell", "transit"]
State = Union[tuple[int, int], Literal["E"]]

DIRECT_STATE_LIMIT = 20_000


@dataclass(slots=True)
class ChainSpec:
    """Parameters of one backoff chain.

    ``empty_rule="dwell"``: E holds with 1 - p_Q and leaves to (0, k) with p_Q/W.
    ``empty_rule="transit"``: E always leaves, to (0, k) with 1/W.
    """

    w0: int
    m: int
    m_prime: int
    p_f: float
    p_q: float
    empty_rule: EmptyStateRule = "dwell"

    def __post_init__(self) -> None:
        if self.w0 < 1:
            raise ValueError("w0 must be >= 1")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if not 0 <= self.m_prime <= self.m:
            raise ValueError("m_prime must lie in [0, m]")
        if not 0.0 <= self.p_f < 1.0:
            raise ValueError("p_f must lie in [0, 1)")
        if not 0.0 <= self.p_q <= 1.0:
            raise ValueError("p_q must lie in [0, 1]")
        if self.empty_rule not in {"dwell", "transit"}:
            raise ValueError(f"empty_rule must be 'dwell' or 'transit', got '{self.empty_rule}'")

    @property
    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(w0=self.w0, m=self.m, m_prime=self.m_prime)

    def windows(self) -> list[int]:
        protocol = self.protocol
        return [window_at_stage(stage, protocol) for stage in range(self.m + 1)]


@dataclass(slots=True)
class Chain:
    """Row-stochastic transition matrix with its state labels."""

    spec: ChainSpec
    states: list[State]
    matrix: np.ndarray
    index: dict[State, int] = field(default_factory=dict)


@dataclass(slots=True)
class ChainDistribution:
    """Stationary masses of a chain."""

    mass_e: float
    mass: dict[tuple[int, int], float]
    residual: float
    method: str

    def total(self) -> float:
        return self.mass_e + sum(self.mass.values())


def build_chain(spec: ChainSpec) -> Chain:
    """Assemble the one-step transition matrix.

    Rows: (i, k >= 1) -> (i, k-1) surely; (i < m, 0) -> (i+1, k) with p_F/W_{i+1},
    -> (0, k) with p_Q (1-p_F)/W, -> E with (1-p_Q)(1-p_F); (m, 0) -> (0, k) with
    p_Q/W and -> E with 1-p_Q; E per ``spec.empty_rule``.
    """

    windows = spec.windows()
    states: list[State] = ["E"]
    for stage, window in enumerate(windows):
        states.extend((stage, counter) for counter in range(window))
    index = {state: position for position, state in enumerate(states)}

    size = len(states)
    matrix = np.zeros((size, size))
    p_f, p_q = spec.p_f, spec.p_q
    w0 = windows[0]
    e = index["E"]

    def spread(row: int, stage: int, probability: float) -> None:
        width = windows[stage]
        for counter in range(width):
            matrix[row, index[(stage, counter)]] += probability / width

    for stage, window in enumerate(windows):
        for counter in range(1, window):
            matrix[index[(stage, counter)], index[(stage, counter - 1)]] = 1.0

        row = index[(stage, 0)]
        if stage < spec.m:
            spread(row, stage + 1, p_f)
            spread(row, 0, p_q * (1.0 - p_f))
            matrix[row, e] += (1.0 - p_q) * (1.0 - p_f)
        else:
            spread(row, 0, p_q)
            matrix[row, e] += 1.0 - p_q

    if spec.empty_rule == "dwell":
        matrix[e, e] = 1.0 - p_q
        spread(e, 0, p_q)
    else:
        spread(e, 0, 1.0)

    logger.debug("built chain with %d states (W=%d, m=%d, m'=%d)", size, w0, spec.m, spec.m_prime)
    return Chain(spec=spec, states=states, matrix=matrix, index=index)


def _check_single_recurrent_class(chain: Chain) -> None:
    """Require one closed communicating class, and that it contains (0, 0)."""

    adjacency = (chain.matrix > 0).astype(np.int8)
    count, labels = connected_components(adjacency, directed=True, connection="strong")
    sources, targets = np.nonzero(adjacency)
    leaving = labels[sources] != labels[targets]
    open_classes = set(labels[sources[leaving]].tolist())
    closed = [label for label in range(count) if label not in open_classes]

    if len(closed) != 1:
        raise ReducibleChainError(f"chain has {len(closed)} closed classes; the stationary distribution is not unique")
    if labels[chain.index[(0, 0)]] != closed[0]:
        raise ReducibleChainError("state (0, 0) is transient (p_q = 0?): the station never transmits")


def stationary_residual(chain: Chain, pi: np.ndarray) -> float:
    """Return ||pi P - pi||_inf."""

    return float(np.max(np.abs(pi @ chain.matrix - pi)))


def _solve_direct(matrix: np.ndarray) -> np.ndarray:
    size = matrix.shape[0]
    system = matrix.T - np.eye(size)
    # One balance equation is redundant; the normalisation row replaces it.
    system[0, :] = 1.0
    rhs = np.zeros(size)
    rhs[0] = 1.0
    return solve(system, rhs)


def _solve_power(matrix: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size)
    for _ in range(max_iter):
        # Lazy step: same fixed point, no periodicity.
        updated = 0.5 * (pi + pi @ matrix)
        if np.max(np.abs(updated - pi)) < tol:
            return updated
        pi = updated
    raise RuntimeError(f"power iteration did not reach tol={tol} in {max_iter} steps")


def stationary(
    chain: Chain,
    method: Literal["direct", "power"] = "direct",
    tol: float = 1e-15,
    max_iter: int = 1_000_000,
) -> ChainDistribution:
    """Solve pi P = pi, sum(pi) = 1.

    ``direct`` replaces one balance equation by the normalisation row and solves
    the dense system; ``power`` iterates the lazy chain to ``tol``.
    """

    _check_single_recurrent_class(chain)

    if method == "direct":
        if len(chain.states) > DIRECT_STATE_LIMIT:
            raise ValueError(f"direct solve limited to {DIRECT_STATE_LIMIT} states; use method='power'")
        pi = _solve_direct(chain.matrix)
    elif method == "power":
        pi = _solve_power(chain.matrix, tol, max_iter)
    else:
        raise ValueError(f"method must be 'direct' or 'power', got '{method}'")

    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = stationary_residual(chain, pi)
    if residual >= 1e-12:
        logger.warning("stationary residual %.3e exceeds 1e-12 (%s solve)", residual, method)

    mass = {state: float(pi[position]) for state, position in chain.index.items() if state != "E"}
    return ChainDistribution(
        mass_e=float(pi[chain.index["E"]]),
        mass=mass,  # type: ignore[arg-type]
        residual=residual,
        method=method,
    )


def oracle_tau(dist: ChainDistribution, m: int) -> float:
    """Return tau as the total mass of the transmit states (i, 0)."""

    return float(sum(dist.mass[(stage, 0)] for stage in range(m + 1)))


def write_distribution_csv(dist: ChainDistribution, path: str | Path) -> Path:
    """Dump a distribution as ``state,i,k,mass`` rows."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["state", "i", "k", "mass"])
        writer.writerow(["E", "", "", repr(dist.mass_e)])
        for (stage, counter), value in sorted(dist.mass.items()):
            writer.writerow([f"({stage},{counter})", stage, counter, repr(value)])
    return target
