"""Abstract physical layer for single-photon heralded entanglement attempts.

Maps a requested minimum fidelity to a bright-state population, the
population to a per-attempt success probability, and simulates the busy
span needed to produce a batch of pairs on one link. The functional forms
are a declared stand-in with the right monotone shape: lower bright-state
population gives higher fidelity but a lower per-attempt success chance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

NS_PER_S = 1_000_000_000

#: Detection efficiency sized so the f=0.75 busy span lands in the tens of
#: milliseconds, which is what creates contention against the 50 ms
#: closed-loop backoff. With p_det near 1 the whole evaluation degenerates
#: to a contention-free network.
DEFAULT_P_DET = 4.0e-4


@dataclass(frozen=True)
class LinkPhysics:
    link_length_m: float = 2000.0
    heralding_position: float = 0.5  # fraction of the link
    detection_window_ns: int = 20    # carried in config; does not gate success
    fiber_speed_m_per_s: float = 2.0e8
    p_det: float = DEFAULT_P_DET

    def __post_init__(self):
        if not 0.0 < self.heralding_position < 1.0:
            raise ValueError("heralding_position must be in (0, 1)")
        if self.fiber_speed_m_per_s <= 0:
            raise ValueError("fiber_speed must be positive")
        if not 0.0 < self.p_det <= 1.0:
            raise ValueError("p_det must be in (0, 1]")


CLOCK_PERIOD_RANGE_NS = (450.0, 550.0)


def sample_clock_period(rng: Random) -> float:
    """One hardware clock period per node, uniform in [450, 550] ns."""
    return rng.uniform(*CLOCK_PERIOD_RANGE_NS)


def alpha_for_fidelity(f_min: float) -> float:
    """Bright-state population achieving minimum fidelity f_min (model F = 1 - alpha).

    The evaluation grid starts at exactly 0.50, so the lower bound is closed.
    """
    if not 0.5 <= f_min < 1.0:
        raise ValueError(f"fidelity must be in [0.5, 1), got {f_min}")
    return 1.0 - f_min


def fidelity_for_alpha(alpha: float) -> float:
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must be in (0, 0.5], got {alpha}")
    return 1.0 - alpha


def success_probability(alpha: float, physics: LinkPhysics) -> float:
    """Per-attempt heralding success chance; strictly increasing in alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return alpha * physics.p_det


def propagation_delay_ns(distance_m: float, physics: LinkPhysics) -> int:
    """Fiber propagation time, rounded up to whole nanoseconds."""
    if distance_m < 0:
        raise ValueError("distance must be non-negative")
    return math.ceil(distance_m / physics.fiber_speed_m_per_s * NS_PER_S)


def link_propagation_ns(physics: LinkPhysics) -> int:
    """End-to-end propagation along one full link."""
    return propagation_delay_ns(physics.link_length_m, physics)


def herald_round_trip_ns(physics: LinkPhysics) -> int:
    """Photon out to the midpoint station plus the outcome message back."""
    return 2 * propagation_delay_ns(
        physics.link_length_m * physics.heralding_position, physics)


def attempt_entanglement(p: float, rng: Random) -> bool:
    """One Bernoulli heralding attempt."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    return rng.random() < p


def sample_attempts_per_pair(p: float, rng: Random) -> int:
    """Geometric number of attempt cycles until one pair succeeds.

    Inverse-transform sampling; one uniform draw per pair.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"success probability must be in (0, 1], got {p}")
    if p >= 1.0:
        return 1
    u = rng.random()
    return max(1, math.ceil(math.log(1.0 - u) / math.log(1.0 - p)))


def generation_span(pairs: int, p_success: float, shared_period_ns: float,
                    herald_rtt_ns: int, rng: Random) -> tuple[int, int]:
    """Busy span for generating `pairs` pairs sequentially on one link.

    Both end nodes take part in every attempt, so the shared attempt
    period is the slower of the two node clocks (resolved by the caller).
    Returns (attempts_total, duration_ns): attempt cycles at the shared
    period plus one heralding round trip per successful pair.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    attempts = sum(sample_attempts_per_pair(p_success, rng) for _ in range(pairs))
    duration = math.ceil(attempts * shared_period_ns) + pairs * herald_rtt_ns
    return attempts, duration
