"""Coupled fixed-point solve of (tau, p_F, p_Q).

tau fixes p_B, p_C, p_p and hence p_F; p_F and p_Q fix b00 and hence tau;
tau and p_F fix t_slot and d_C; d_C fixes p_Q. The inner loop is a damped
Picard iteration on tau at fixed p_Q, the outer loop a damped update of p_Q
from the queue relation. Saturated mode pins p_Q = 1 and runs the inner loop
only.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np
from scipy.optimize import brentq

from pydcf.core.errors import DegenerateInputError, NonConvergenceError
from pydcf.core.models import CollisionModel, ResidualTriple, Scenario, Solution, SolverOptions, SteadyState

from .analytic import b00, derive_state, evaluate_metrics, tau_from_b00
from .queueing import queue_nonempty_prob
from .series import geometric_sum

logger = logging.getLogger(__name__)


def validate_options(opts: SolverOptions) -> SolverOptions:
    """Check solver settings, raising ValueError on the first violation."""

    if opts.tol <= 0:
        raise ValueError("tol must be positive")
    if opts.max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0.0 < opts.damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if opts.tau_seed is not None and not 0.0 < opts.tau_seed < 1.0:
        raise ValueError("tau_seed must lie in (0, 1)")
    if opts.mode not in {"unsaturated", "saturated"}:
        raise ValueError(f"mode must be 'unsaturated' or 'saturated', got '{opts.mode}'")
    if opts.collision_model not in {"conditional", "per_station"}:
        raise ValueError(f"collision_model must be 'conditional' or 'per_station', got '{opts.collision_model}'")
    if opts.scan_points < 2:
        raise ValueError("scan_points must be >= 2")
    return opts


def default_tau_seed(scenario: Scenario) -> float:
    """Return the zero-contention transmit probability 2/(W+1), kept inside (0, 1)."""

    return min(2.0 / (scenario.protocol.w0 + 1), 0.99)


def _tau_map(scenario: Scenario, tau: float, p_q: float, collision_model: CollisionModel) -> tuple[float, SteadyState]:
    state = derive_state(scenario, tau, p_q, collision_model)
    return tau_from_b00(state.b00, state.p_f, scenario.protocol.m), state


def _queue_target(scenario: Scenario, access_delay: float) -> float:
    traffic = scenario.traffic
    return queue_nonempty_prob(traffic.arrival_rate, access_delay, traffic.queue_len)


def _seed_queue_prob(scenario: Scenario, tau: float, collision_model: CollisionModel) -> float:
    """Invert the b00 closed form in p_Q so that the seed tau is a fixed point of the inner map."""

    protocol = scenario.protocol
    state = derive_state(scenario, tau, 1.0, collision_model)
    required_b00 = tau / geometric_sum(state.p_f, protocol.m + 1)
    excess = 1.0 / required_b00 - 1.0 / state.b00
    if excess <= 0:
        return 1.0
    return float(np.clip(1.0 / (1.0 + excess), 0.0, 1.0))


def residual(
    scenario: Scenario,
    tau: float,
    p_q: float,
    p_f: float | None = None,
    mode: str = "unsaturated",
    collision_model: CollisionModel = "conditional",
) -> ResidualTriple:
    """Return the signed defects of the three defining equations at (tau, p_F, p_Q).

    With ``p_f=None`` p_F is taken from tau, so its defect is zero. In
    saturated mode the queue component is ``p_q - 1``.
    """

    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if not 0.0 <= p_q <= 1.0:
        raise ValueError(f"p_q must lie in [0, 1], got {p_q}")

    state = derive_state(scenario, tau, p_q, collision_model)
    if p_f is None:
        p_f = state.p_f
    elif not 0.0 <= p_f <= 1.0:
        raise ValueError(f"p_f must lie in [0, 1], got {p_f}")

    protocol = scenario.protocol
    trial_b00 = b00(p_f, p_q, protocol.w0, protocol.m, protocol.m_prime)
    tau_defect = tau - tau_from_b00(trial_b00, p_f, protocol.m)
    p_f_defect = p_f - state.p_f

    if mode == "saturated":
        p_q_defect = p_q - 1.0
    else:
        trial_state = SteadyState(
            tau=state.tau,
            p_b=state.p_b,
            p_c=state.p_c,
            p_p=state.p_p,
            p_f=p_f,
            p_s=1.0 - p_f,
            p_q=p_q,
            b00=trial_b00,
            b_e=state.b_e,
        )
        metrics = evaluate_metrics(scenario, trial_state)
        p_q_defect = p_q - _queue_target(scenario, metrics.access_delay)

    return ResidualTriple(tau=tau_defect, p_f=p_f_defect, p_q=p_q_defect)


def scan_tau_roots(
    scenario: Scenario,
    p_q: float,
    points: int = 200,
    collision_model: CollisionModel = "conditional",
) -> list[tuple[float, float]]:
    """Return sign-change brackets of tau - g(tau) on an interior grid of (0, 1) at fixed p_Q.

    Grid points where p_F is numerically 1 carry no sign and are skipped.
    """

    if points < 2:
        raise ValueError("points must be >= 2")

    grid = np.linspace(0.0, 1.0, points + 2)[1:-1]
    defects = np.full(grid.shape, np.nan)
    for index, tau in enumerate(grid):
        try:
            mapped, _state = _tau_map(scenario, float(tau), p_q, collision_model)
        except DegenerateInputError:
            continue
        defects[index] = tau - mapped

    brackets: list[tuple[float, float]] = []
    for index in range(len(grid) - 1):
        left, right = defects[index], defects[index + 1]
        if np.isnan(left) or np.isnan(right):
            continue
        if left == 0.0:
            brackets.append((float(grid[index]), float(grid[index])))
        elif left * right < 0:
            brackets.append((float(grid[index]), float(grid[index + 1])))
    if not np.isnan(defects[-1]) and defects[-1] == 0.0:
        brackets.append((float(grid[-1]), float(grid[-1])))
    return brackets


def _polish_root(
    scenario: Scenario,
    bracket: tuple[float, float],
    p_q: float,
    collision_model: CollisionModel,
    tol: float,
) -> float:
    low, high = bracket
    if low == high:
        return low

    def defect(tau: float) -> float:
        return tau - _tau_map(scenario, tau, p_q, collision_model)[0]

    return float(brentq(defect, low, high, xtol=tol))


def _inner_solve(
    scenario: Scenario,
    tau: float,
    p_q: float,
    opts: SolverOptions,
    budget: int,
) -> tuple[float, SteadyState, int, bool]:
    """Damped Picard on tau at fixed p_Q. Returns (tau, state, sweeps, converged)."""

    state = derive_state(scenario, tau, p_q, opts.collision_model)
    for sweep in range(1, budget + 1):
        mapped, state = _tau_map(scenario, tau, p_q, opts.collision_model)
        step = mapped - tau
        if abs(step) <= opts.tol:
            return tau, state, sweep, True
        tau = float(np.clip(tau + opts.damping * step, 0.0, 1.0))
    return tau, state, budget, False


def _zero_load_solution(scenario: Scenario, opts: SolverOptions) -> Solution:
    state = derive_state(scenario, 0.0, 0.0, opts.collision_model)
    metrics = evaluate_metrics(scenario, state)
    return Solution(
        state=state,
        metrics=metrics,
        iterations=0,
        residual=0.0,
        converged=True,
        notes=[
            f"collision model: {opts.collision_model}",
            "zero offered load: every station stays in the empty state, tau = 0",
        ],
    )


def _queue_consistent_state(scenario: Scenario, tau: float, collision_model: CollisionModel) -> SteadyState:
    """Return the state at tau with p_Q taken from the queue relation.

    d_C depends on tau only, so p_Q = Q(d_C(tau)) closes the queue equation exactly.
    """

    full = derive_state(scenario, tau, 1.0, collision_model)
    p_q = _queue_target(scenario, evaluate_metrics(scenario, full).access_delay)
    return derive_state(scenario, tau, p_q, collision_model)


def _reduced_defect(scenario: Scenario, tau: float, collision_model: CollisionModel) -> float:
    state = _queue_consistent_state(scenario, tau, collision_model)
    return tau - tau_from_b00(state.b00, state.p_f, scenario.protocol.m)


def _settle_on_queue_curve(scenario: Scenario, tau: float, settings: SolverOptions) -> SteadyState | None:
    """Move a converged point onto p_Q = Q(d_C(tau)) with the tau defect still within tol.

    Returns None when no such point is bracketed next to ``tau``.
    """

    model = settings.collision_model

    def defect(value: float) -> float:
        return _reduced_defect(scenario, value, model)

    try:
        if abs(defect(tau)) <= settings.tol:
            return _queue_consistent_state(scenario, tau, model)
        for width in (1e-9, 1e-7, 1e-5, 1e-3):
            low, high = max(tau - width, 1e-12), min(tau + width, 1.0 - 1e-12)
            if defect(low) * defect(high) < 0:
                root = float(brentq(defect, low, high, xtol=1e-16))
                if abs(defect(root)) <= settings.tol:
                    return _queue_consistent_state(scenario, root, model)
                break
    except DegenerateInputError:
        pass
    return None


def solve(scenario: Scenario, opts: SolverOptions | None = None) -> Solution:
    """Solve the coupled model for one scenario.

    A seed that already satisfies every equation is returned after one
    evaluation. Unsaturated solutions are reported with the queue equation
    closed exactly, so re-seeding from their tau stops at once.

    Raises NonConvergenceError when the sweep budget ``max_iter`` is exhausted
    and DegenerateInputError when p_F is driven to 1.
    """

    settings = validate_options(opts or SolverOptions())
    saturated = settings.mode == "saturated"
    model = settings.collision_model

    if not saturated and scenario.traffic.arrival_rate == 0.0:
        return _zero_load_solution(scenario, settings)

    tau = settings.tau_seed if settings.tau_seed is not None else default_tau_seed(scenario)

    history: list[dict[str, Any]] = []
    sweeps = 0
    converged = False
    queue_defect = 0.0

    state = derive_state(scenario, tau, 1.0, model) if saturated else _queue_consistent_state(scenario, tau, model)
    if abs(tau - tau_from_b00(state.b00, state.p_f, scenario.protocol.m)) <= settings.tol:
        p_q = state.p_q
        metrics = evaluate_metrics(scenario, state)
        sweeps = 1
        converged = True
        logger.debug("seed tau=%.12f already solves the model", tau)
    else:
        p_q = 1.0 if saturated else _seed_queue_prob(scenario, tau, model)
        state = derive_state(scenario, tau, p_q, model)
        metrics = evaluate_metrics(scenario, state)

    while not converged and sweeps < settings.max_iter:
        tau, state, used, inner_converged = _inner_solve(scenario, tau, p_q, settings, settings.max_iter - sweeps)
        sweeps += used
        metrics = evaluate_metrics(scenario, state)
        queue_defect = 0.0 if saturated else _queue_target(scenario, metrics.access_delay) - p_q

        history.append(
            {
                "pass": len(history) + 1,
                "tau": tau,
                "p_f": state.p_f,
                "p_q": p_q,
                "access_delay": metrics.access_delay,
                "queue_defect": queue_defect,
            }
        )
        logger.debug(
            "outer pass %d: p_q=%.12f d_c=%.6e queue_defect=%.3e sweeps=%d",
            len(history),
            p_q,
            metrics.access_delay,
            queue_defect,
            sweeps,
        )

        if inner_converged and abs(queue_defect) <= settings.tol:
            converged = True
            settled = None if saturated else _settle_on_queue_curve(scenario, tau, settings)
            if settled is not None:
                state = settled
                tau = settled.tau
                p_q = settled.p_q
                metrics = evaluate_metrics(scenario, state)
                queue_defect = _queue_target(scenario, metrics.access_delay) - p_q
            break
        if not inner_converged:
            break
        p_q = float(np.clip(p_q + settings.damping * queue_defect, 0.0, 1.0))

    defects = _defects_at(scenario, state, p_q, queue_defect)
    notes = [f"collision model: {settings.collision_model}"]
    if saturated:
        notes.append("saturated mode: p_Q held at 1, queue equation skipped")

    solution = Solution(
        state=state,
        metrics=metrics,
        iterations=sweeps,
        residual=defects.max_abs,
        converged=converged,
        notes=notes,
    )

    if not converged:
        message = (
            f"solver did not converge in {settings.max_iter} sweeps "
            f"(tau defect {defects.tau:.3e}, p_q defect {defects.p_q:.3e})"
        )
        raise NonConvergenceError(message, solution, defects, history)

    solution.root_brackets = scan_tau_roots(scenario, p_q, settings.scan_points, settings.collision_model)
    if len(solution.root_brackets) > 1:
        _take_smallest_root(scenario, solution, settings)

    logger.info(
        "converged: tau=%.8f p_f=%.8f p_q=%.8f throughput=%.1f b/s after %d sweeps",
        solution.state.tau,
        solution.state.p_f,
        solution.state.p_q,
        solution.metrics.throughput,
        sweeps,
    )
    return solution


def _defects_at(scenario: Scenario, state: SteadyState, p_q: float, queue_defect: float) -> ResidualTriple:
    mapped = tau_from_b00(state.b00, state.p_f, scenario.protocol.m)
    return ResidualTriple(tau=state.tau - mapped, p_f=0.0, p_q=-queue_defect)


def _take_smallest_root(scenario: Scenario, solution: Solution, settings: SolverOptions) -> None:
    p_q = solution.state.p_q
    brackets = solution.root_brackets
    logger.warning("tau defect changes sign %d times at p_q=%.6f; reporting the smallest root", len(brackets), p_q)

    tau = _polish_root(scenario, brackets[0], p_q, settings.collision_model, settings.tol)
    state = derive_state(scenario, tau, p_q, settings.collision_model)
    metrics = evaluate_metrics(scenario, state)
    queue_defect = 0.0 if settings.mode == "saturated" else _queue_target(scenario, metrics.access_delay) - p_q
    defects = _defects_at(scenario, state, p_q, queue_defect)

    solution.state = state
    solution.metrics = metrics
    solution.residual = defects.max_abs
    solution.converged = defects.max_abs <= settings.tol
    solution.multiple_roots = True
    solution.notes.append(
        f"{len(brackets)} tau roots bracketed at p_q={p_q:.6f}; smallest root tau={tau:.8f} reported"
    )
