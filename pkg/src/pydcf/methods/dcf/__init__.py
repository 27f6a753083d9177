"""DCF model kernels: timing algebra, closed forms, fixed-point solver, chain oracle, simulator."""

from .analytic import derive_state, evaluate_metrics
from .chain import ChainSpec, build_chain, oracle_tau, stationary
from .simulator import advance_slot, build_world, run
from .solver import residual, scan_tau_roots, solve

__all__ = [
    "ChainSpec",
    "advance_slot",
    "build_chain",
    "build_world",
    "derive_state",
    "evaluate_metrics",
    "oracle_tau",
    "residual",
    "run",
    "scan_tau_roots",
    "solve",
    "stationary",
]
