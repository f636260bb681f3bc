"""Closed-form bounds behind the constant average-case ratio.

Event A: at least ``ceil(n/2)`` of the ``n`` i.i.d. costs are at most
``h * t_min``. Under A the expected social cost is at most ``(2h + 1) t_1``;
with ``F(h t_min) >= 11/12`` A fails with probability below ``e / (2 pi n)``,
and the worst-case ratio ``(n+1)/2`` on that event adds at most
``3e / (8 pi)`` to the average ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import InvalidInputError, NumericalError
from .mechanism import MechanismOutcome

THEOREM1_CONSTANT = 1.33
TIGHT_ADDITIVE_TERM = 3.0 * math.e / (8.0 * math.pi)
CAP_TOLERANCE = 1e-9
MAX_CENTRAL_N = 1024


class CentralBinomial(NamedTuple):
    exact: int
    robbins_bound: float


class Lemma4Result(NamedTuple):
    violation_freq: float
    lemma4_bound: float
    violations: int
    samples: int


@dataclass(frozen=True)
class EventAStats:
    n: int
    k_half: int
    cdf_at_h_tmin: float
    prob_exact: float
    lemma3_lower_bound: float


def _check_n(n, minimum: int = 2) -> int:
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise InvalidInputError(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def central_binomial_bound(n: int) -> CentralBinomial:
    """C(n, n/2) as an exact integer next to the estimate e / (pi sqrt n) * 2^n."""
    n = _check_n(n)
    if n % 2 or n > MAX_CENTRAL_N:
        raise InvalidInputError(f"n must be even and at most {MAX_CENTRAL_N}, got {n}")
    robbins = math.ldexp(math.e / (math.pi * math.sqrt(n)), n)
    return CentralBinomial(math.comb(n, n // 2), robbins)


def log_central_binomial(n: int) -> float:
    return math.lgamma(n + 1) - 2.0 * math.lgamma(n / 2 + 1)


def log_robbins_bound(n: int) -> float:
    return 1.0 - math.log(math.pi) - 0.5 * math.log(n) + n * math.log(2.0)


def lemma3_lower_bound(n: int) -> float:
    return 1.0 - math.e / (2.0 * math.pi * n)


def lemma4_bound(n: int) -> float:
    return math.e / (2.0 * math.pi * n)


def binomial_upper_tail(n: int, k: int, q: float) -> float:
    """Pr[Binomial(n, q) >= k], summed term by term in compensated arithmetic."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    log_q, log_p = math.log(q), math.log1p(-q)
    terms = (
        math.exp(math.log(math.comb(n, j)) + j * log_q + (n - j) * log_p)
        for j in range(k, n + 1)
    )
    return min(1.0, math.fsum(terms))


def event_a_probability(n: int, q: float) -> EventAStats:
    """Probability that the ceil(n/2)-th smallest of n draws falls below the threshold.

    ``q`` is ``F(h t_min)``, the chance a single draw lands at or under
    ``h t_min``.
    """
    n = _check_n(n)
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise InvalidInputError(f"q must lie in [0, 1], got {q!r}")
    k_half = (n + 1) // 2
    return EventAStats(
        n=n,
        k_half=k_half,
        cdf_at_h_tmin=q,
        prob_exact=binomial_upper_tail(n, k_half, q),
        lemma3_lower_bound=lemma3_lower_bound(n),
    )


def lemma3_chain(n: int, q: float) -> list[float]:
    """Successive lower bounds on Pr[A] for even n, loosest last.

    [exact tail, 1 - (n/2) C(n,n/2) (1-q)^(n/2), same with the Robbins
    estimate, 1 - e/(2 pi) sqrt(n) 3^(-n/2) (only meaningful at q >= 11/12),
    1 - e/(2 pi n)].
    """
    n = _check_n(n)
    if n % 2:
        raise InvalidInputError("the chain is stated for even n")
    half = n // 2
    exact = event_a_probability(n, q).prob_exact
    log_tail = half * math.log1p(-q) if q < 1.0 else -math.inf
    binom_step = 1.0 - math.exp(math.log(half) + log_central_binomial(n) + log_tail)
    robbins_step = 1.0 - math.exp(math.log(half) + log_robbins_bound(n) + log_tail)
    power_step = 1.0 - math.e / (2.0 * math.pi) * math.sqrt(n) * 3.0 ** (-half)
    return [exact, binom_step, robbins_step, power_step, lemma3_lower_bound(n)]


def lemma1_cap(h: float, t1: float) -> float:
    """Upper bound (2h + 1) t_1 on the expected social cost under event A."""
    if h <= 0.0 or t1 <= 0.0:
        raise InvalidInputError("h and t1 must be positive")
    return (2.0 * h + 1.0) * t1


def theorem1_bound(h: float) -> float:
    return 2.0 * h + THEOREM1_CONSTANT


def theorem1_decomposition(h: float, n: int) -> float:
    """The sharper n-dependent value 2h + 1 + e/(4 pi) (n+1)/n of the same bound."""
    n = _check_n(n)
    return 2.0 * h + 1.0 + math.e / (4.0 * math.pi) * (n + 1) / n


def lemma4_check(samples: Iterable[tuple[MechanismOutcome, bool]], h: float, n: int) -> Lemma4Result:
    """Empirical frequency of SC > (2h + 1) t_1 next to its bound e / (2 pi n).

    Raises NumericalError if any sample flagged with event A exceeds the cap.
    """
    n = _check_n(n)
    count = violations = 0
    for outcome, in_event_a in samples:
        count += 1
        exceeded = outcome.social_cost > lemma1_cap(h, outcome.optimal_cost) + CAP_TOLERANCE
        if exceeded:
            violations += 1
            if in_event_a:
                raise NumericalError(
                    f"cap (2h+1) t_1 exceeded under event A: SC = {outcome.social_cost!r}, "
                    f"t_1 = {outcome.optimal_cost!r}, h = {h!r}"
                )
    if count == 0:
        raise InvalidInputError("no samples supplied")
    return Lemma4Result(violations / count, lemma4_bound(n), violations, count)
