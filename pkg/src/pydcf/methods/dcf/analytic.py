"""Closed-form relations of the unsaturated m-retry DCF model.

Every function here is pure. Probabilities are floats in [0, 1]; times are
seconds. ``derive_state`` and ``evaluate_metrics`` bundle the individual
relations for the solver.
"""

from __future__ import annotations

import numpy as np
from scipy.special import comb

from pydcf.core.errors import DegenerateInputError
from pydcf.core.models import CollisionModel, Metrics, ProtocolConfig, Scenario, SteadyState

from .queueing import queue_loss
from .series import geometric_sum
from .timing import failure_duration, payload_total_bits, success_duration, window_at_stage

# p_F above this is treated as p_F = 1, where b00 and n_slot are undefined.
DEGENERATE_P_F = 1.0 - 1e-9


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_stations(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def _check_not_degenerate(p_f: float) -> None:
    _check_probability("p_f", p_f)
    if p_f > DEGENERATE_P_F:
        raise DegenerateInputError(f"p_f={p_f} is numerically 1; the backoff chain never leaves retry stages")


def busy_prob(tau: float, n: int) -> float:
    """Return p_B = 1 - (1 - tau)^n, the chance some station transmits in a slot."""

    _check_probability("tau", tau)
    _check_stations(n)
    return 1.0 - (1.0 - tau) ** n


def station_collision_prob(tau: float, n: int) -> float:
    """Return 1 - (1 - tau)^(n-1): at least one of the other n-1 stations transmits."""

    _check_probability("tau", tau)
    _check_stations(n)
    return 1.0 - (1.0 - tau) ** (n - 1)


def collision_prob(tau: float, n: int) -> float:
    """Return p_C = (1 - (1 - tau)^(n-1)) / p_B.

    At tau = 0 no slot is ever busy and the value is defined as 0.
    """

    _check_probability("tau", tau)
    _check_stations(n)
    if tau == 0.0:
        return 0.0
    return min(station_collision_prob(tau, n) / busy_prob(tau, n), 1.0)


def processing_gain_inverse(s: int) -> float:
    """Return g = 2 / (3 s) for a correlation receiver with spreading factor s."""

    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return 2.0 / (3.0 * s)


def capture_prob(tau: float, n: int, z: float, s: int, enabled: bool = True) -> float:
    """Return p_p, the probability a slot holds a collision whose strongest frame is still decoded.

    Sums C(n, i+1) tau^(i+1) (1-tau)^(n-i-1) (1 + z g)^(-i) over i = 1..n-1.
    """

    _check_probability("tau", tau)
    _check_stations(n)
    if not enabled or n < 2:
        return 0.0
    if z <= 0:
        raise ValueError(f"z must be positive, got {z}")

    g = processing_gain_inverse(s)
    interferers = np.arange(1, n)
    terms = (
        comb(n, interferers + 1)
        * tau ** (interferers + 1)
        * (1.0 - tau) ** (n - interferers - 1)
        * (1.0 + z * g) ** (-interferers.astype(float))
    )
    return float(np.clip(terms.sum(), 0.0, 1.0))


def failure_prob(p_c: float, p_p: float, p_e: float) -> float:
    """Return p_F = (p_C - p_p) + p_E p_p + (p_E - p_E p_C)."""

    _check_probability("p_c", p_c)
    _check_probability("p_p", p_p)
    _check_probability("p_e", p_e)
    if p_p > p_c:
        raise ValueError(f"capture probability p_p={p_p} exceeds collision probability p_c={p_c}")
    value = (p_c - p_p) + p_e * p_p + (p_e - p_e * p_c)
    return min(max(value, 0.0), 1.0)


def success_prob(p_f: float) -> float:
    """Return p_S = 1 - p_F."""

    _check_probability("p_f", p_f)
    return 1.0 - p_f


def b00(p_f: float, p_q: float, w0: int, m: int, m_prime: int) -> float:
    """Return the stationary mass of state (0, 0).

    Uses the closed form divided through by 2 p_Q (1 - p_F)(1 - 2 p_F), so the
    removable singularity at p_F = 1/2 never appears:

        1/b00 = [W G(2p, m'+1) + G(p, m+1) + 2^m' W p^(m'+1) G(p, m-m')] / 2
                + (1 - p_Q)/p_Q

    with G(x, k) = 1 + x + ... + x^(k-1). p_Q = 0 returns the limit 0.
    """

    _check_not_degenerate(p_f)
    _check_probability("p_q", p_q)
    if w0 < 1 or m < 0 or not 0 <= m_prime <= m:
        raise ValueError(f"invalid window schedule w0={w0}, m={m}, m_prime={m_prime}")
    if p_q == 0.0:
        return 0.0

    stage_mass = (
        w0 * geometric_sum(2.0 * p_f, m_prime + 1)
        + geometric_sum(p_f, m + 1)
        + (2**m_prime) * w0 * p_f ** (m_prime + 1) * geometric_sum(p_f, m - m_prime)
    )
    return 1.0 / (0.5 * stage_mass + (1.0 - p_q) / p_q)


def tau_from_b00(b00_value: float, p_f: float, m: int) -> float:
    """Return tau = b00 (1 - p_F^(m+1)) / (1 - p_F), the per-slot transmit probability."""

    _check_not_degenerate(p_f)
    _check_probability("b00", b00_value)
    tau = b00_value * geometric_sum(p_f, m + 1)
    if tau > 1.0 + 1e-12:
        raise ValueError(f"b00={b00_value} and p_f={p_f} imply tau={tau} > 1; inputs are inconsistent")
    return min(tau, 1.0)


def empty_state_prob(b00_value: float, p_q: float) -> float:
    """Return b_E = b00 (1 - p_Q) / p_Q; with p_Q = 0 the station always sits in E."""

    _check_probability("p_q", p_q)
    if p_q == 0.0:
        return 1.0
    return min(b00_value * (1.0 - p_q) / p_q, 1.0)


def expected_slot_time(state: SteadyState, t_sigma: float, t_s: float, t_f: float, p_e: float) -> float:
    """Return t_slot averaged over idle, failed and successful slots.

    The successful-slot share carries an extra (1 - p_E) factor on top of p_S.
    """

    if t_sigma <= 0 or t_s <= 0 or t_f <= 0:
        raise ValueError("slot durations must be positive")
    p_b = state.p_b
    p_s = state.p_s
    return (
        (1.0 - p_b) * t_sigma
        + p_b * (1.0 - p_s) * t_f
        + p_b * p_s * p_e * t_f
        + p_b * p_s * (1.0 - p_e) * t_s
    )


def throughput(state: SteadyState, payload_bits_total: int, t_slot: float) -> float:
    """Return psi = p_B p_S (l_D + l_I + l_U) / t_slot in bits/second."""

    if t_slot <= 0:
        raise ValueError("t_slot must be positive")
    return state.p_b * state.p_s * payload_bits_total / t_slot


def network_loss(p_f: float, m: int) -> float:
    """Return e_N = p_F^(m+1)."""

    _check_probability("p_f", p_f)
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return p_f ** (m + 1)


def delivery_prob(p_f: float, m: int) -> float:
    """Return 1 - e_N, the chance a head-of-queue packet is eventually acknowledged."""

    return 1.0 - network_loss(p_f, m)


def hoq_slots(p_f: float, w0: int, m: int, m_prime: int) -> float:
    """Return n_slot, the mean number of backoff slots a HoQ packet waits.

    Stage i contributes (W_i + 1)/2 weighted by the chance the packet reaches
    stage i given it is not lost: (p_F^i - p_F^(m+1)) / (1 - p_F^(m+1)).
    """

    _check_not_degenerate(p_f)
    protocol = ProtocolConfig(w0=w0, m=m, m_prime=m_prime)
    lost = p_f ** (m + 1)
    total = 0.0
    for stage in range(m + 1):
        window = window_at_stage(stage, protocol)
        total += 0.5 * (window + 1) * (p_f**stage - lost) / (1.0 - lost)
    return total


def access_delay(n_slot: float, t_slot: float) -> float:
    """Return d_C = n_slot * t_slot."""

    if n_slot <= 0 or t_slot <= 0:
        raise ValueError("n_slot and t_slot must be positive")
    return n_slot * t_slot


def derive_state(
    scenario: Scenario,
    tau: float,
    p_q: float,
    collision_model: CollisionModel = "conditional",
) -> SteadyState:
    """Evaluate every probability that follows from a trial (tau, p_Q)."""

    n = scenario.n
    channel = scenario.channel
    protocol = scenario.protocol

    p_b = busy_prob(tau, n)
    if collision_model == "conditional":
        p_c = collision_prob(tau, n)
    elif collision_model == "per_station":
        p_c = station_collision_prob(tau, n)
    else:
        raise ValueError(f"collision_model must be 'conditional' or 'per_station', got '{collision_model}'")

    # Capture can only rescue a collision that happened.
    p_p = min(capture_prob(tau, n, channel.z, channel.s, enabled=channel.capture_enabled), p_c)
    p_f = failure_prob(p_c, p_p, channel.p_e)
    b00_value = b00(p_f, p_q, protocol.w0, protocol.m, protocol.m_prime)

    return SteadyState(
        tau=tau,
        p_b=p_b,
        p_c=p_c,
        p_p=p_p,
        p_f=p_f,
        p_s=success_prob(p_f),
        p_q=p_q,
        b00=b00_value,
        b_e=empty_state_prob(b00_value, p_q),
    )


def evaluate_metrics(scenario: Scenario, state: SteadyState) -> Metrics:
    """Compute every performance measure for one steady state."""

    phy = scenario.phy
    protocol = scenario.protocol
    traffic = scenario.traffic

    t_slot = expected_slot_time(
        state,
        phy.idle_slot,
        success_duration(scenario),
        failure_duration(scenario),
        scenario.channel.p_e,
    )
    n_slot = hoq_slots(state.p_f, protocol.w0, protocol.m, protocol.m_prime)
    d_c = access_delay(n_slot, t_slot)
    bits = payload_total_bits(scenario)

    return Metrics(
        throughput=throughput(state, bits, t_slot),
        access_delay=d_c,
        network_loss=network_loss(state.p_f, protocol.m),
        queue_loss=queue_loss(traffic.arrival_rate, d_c, traffic.queue_len),
        hoq_slots=n_slot,
        slot_time=t_slot,
        load_factor=traffic.arrival_rate * d_c,
        service_rate=1.0 / d_c,
        delivery_prob=delivery_prob(state.p_f, protocol.m),
        offered_load=scenario.n * traffic.arrival_rate * bits,
    )
