"""Monte Carlo estimation of the average-case approximation ratio.

Each trial draws ``n`` i.i.d. costs and evaluates the mechanism's expected
social cost exactly, so the only randomness is in the instance itself.

Trials are grouped into fixed-size blocks. Block ``b`` draws from
``PCG64(SeedSequence(seed, spawn_key=(b,)))``, independent of how many
workers run, and block statistics are merged in block order. Results are
therefore bit-identical for a given seed whatever ``workers`` is.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import distributions as dist
from .bounds import event_a_probability, lemma1_cap, CAP_TOLERANCE
from .errors import BudgetExceededError, InvalidInputError, NumericalError
from .mechanism import MAX_MACHINES, MechanismOutcome, ratio_from_scaled, social_cost

BLOCK_TRIALS = 2048
DEFAULT_BUDGET = 10**9
RATIO_TOLERANCE = 1e-9


def default_trials(n: int) -> int:
    return 100_000 if n <= 64 else 10_000


@dataclass(frozen=True)
class SimulationConfig:
    spec: dist.DistributionSpec
    n: int
    trials: int
    seed: int = 0
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        for name, lo in (("n", 2), ("trials", 1), ("workers", 1), ("budget", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < lo:
                raise InvalidInputError(f"{name} must be an integer >= {lo}, got {value!r}")
        if self.n > MAX_MACHINES:
            raise InvalidInputError(f"n must be at most {MAX_MACHINES}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        if self.n * self.trials > self.budget:
            raise BudgetExceededError(
                f"n * trials = {self.n * self.trials} exceeds the budget of {self.budget} draws"
            )


@dataclass(frozen=True)
class RatioEstimate:
    mean_ratio: float
    std_error: float
    trials: int
    event_a_freq: float
    lemma1_violations: int
    max_ratio_seen: float
    h: float
    cap_violation_freq: float
    config: SimulationConfig


@dataclass
class _Moments:
    """Streaming count / mean / sum of squared deviations."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> _Moments:
        mean = float(np.mean(x))
        return cls(int(x.size), mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: _Moments) -> None:
        if other.count == 0:
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def draw_sorted_costs(cfg: SimulationConfig, block: int, size: int) -> np.ndarray:
    """Cost matrix for one block, each row sorted ascending."""
    costs = dist.sample(cfg.spec, block_rng(cfg.seed, block), (size, cfg.n))
    return np.sort(costs, axis=1)


def _event_a(sorted_costs: np.ndarray, h: float, t_min: float) -> np.ndarray:
    k_half = (sorted_costs.shape[1] + 1) // 2
    return sorted_costs[:, k_half - 1] <= h * t_min


def _evaluate_block(cfg: SimulationConfig, h: float, block: int, size: int):
    s = draw_sorted_costs(cfg, block, size)
    t1 = s[:, 0]
    ratios = ratio_from_scaled(t1[:, None] / s[:, 1:])
    cap = (cfg.n + 1) / 2
    if ratios.min() < 1.0 - RATIO_TOLERANCE or ratios.max() > cap + RATIO_TOLERANCE:
        raise NumericalError(f"per-instance ratio outside [1, {cap}] in block {block}")
    return np.maximum(ratios, 1.0), t1, _event_a(s, h, cfg.spec.t_min)


def _threshold(cfg: SimulationConfig) -> float:
    return dist.solve_threshold(cfg.spec).h


def _map_blocks(cfg: SimulationConfig, fn):
    jobs = list(enumerate(_block_sizes(cfg.trials)))
    if cfg.workers == 1 or len(jobs) == 1:
        return [fn(b, size) for b, size in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def estimate_average_ratio(cfg: SimulationConfig, h: float | None = None) -> RatioEstimate:
    """Estimate E[SC_M / SC_OPT] under the configured cost distribution.

    ``h`` tags event A and the (2h + 1) t_1 cost cap; it defaults to the threshold for
    ``cfg.spec`` under its own convention.
    """
    h = _threshold(cfg) if h is None else float(h)

    def run(block, size):
        ratios, t1, in_a = _evaluate_block(cfg, h, block, size)
        over_cap = ratios * t1 > lemma1_cap(h, 1.0) * t1 + CAP_TOLERANCE
        return (
            _Moments.of(ratios),
            int(in_a.sum()),
            int((over_cap & in_a).sum()),
            int(over_cap.sum()),
            float(ratios.max()),
        )

    total = _Moments()
    in_a = lemma1 = over = 0
    max_seen = 1.0
    for moments, a, l1, oc, mx in _map_blocks(cfg, run):
        total.merge(moments)
        in_a += a
        lemma1 += l1
        over += oc
        max_seen = max(max_seen, mx)

    n = total.count
    std_error = math.sqrt(total.m2 / (n - 1)) / math.sqrt(n) if n > 1 else 0.0
    return RatioEstimate(
        mean_ratio=total.mean,
        std_error=std_error,
        trials=n,
        event_a_freq=in_a / n,
        lemma1_violations=lemma1,
        max_ratio_seen=max_seen,
        h=h,
        cap_violation_freq=over / n,
        config=cfg,
    )


def sample_outcomes(cfg: SimulationConfig, h: float | None = None) -> Iterator[tuple[MechanismOutcome, bool]]:
    """Per-instance outcomes with event-A flags, drawn from the same block streams."""
    h = _threshold(cfg) if h is None else float(h)
    for block, size in enumerate(_block_sizes(cfg.trials)):
        ratios, t1, in_a = _evaluate_block(cfg, h, block, size)
        for ratio, opt, flag in zip(ratios.tolist(), t1.tolist(), in_a.tolist()):
            yield MechanismOutcome(ratio * opt, opt, ratio), flag


def estimate_event_a(cfg: SimulationConfig, h: float) -> tuple[float, float]:
    """Empirical frequency of event A against the exact binomial tail.

    The exact value uses the renormalized CDF, the law the sampler draws from.
    """
    if not h > 0.0:
        raise InvalidInputError("h must be positive")

    def run(block, size):
        return int(_event_a(draw_sorted_costs(cfg, block, size), h, cfg.spec.t_min).sum())

    freq = sum(_map_blocks(cfg, run)) / cfg.trials
    q = dist.cdf(cfg.spec, h * cfg.spec.t_min, dist.Convention.RENORMALIZED)
    return freq, event_a_probability(cfg.n, q).prob_exact


def worst_case_sweep(n: int, epsilons: Sequence[float]) -> list[tuple[float, float]]:
    """Ratio on t = (eps, 1, ..., 1) for each eps; tends to (n+1)/2 as eps -> 0."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidInputError("n must be an integer >= 2")
    eps = [float(e) for e in epsilons]
    if not eps:
        raise InvalidInputError("at least one epsilon is required")
    if any(not (0.0 < e <= 1.0) for e in eps):
        raise InvalidInputError("epsilons must lie in (0, 1]")
    return [(e, social_cost([e] + [1.0] * (int(n) - 1)).ratio) for e in eps]


def n_sweep(spec: dist.DistributionSpec, ns: Sequence[int], trials_per_n: int | None = None,
            seed: int = 0, workers: int = 1) -> list[RatioEstimate]:
    """Average ratio for each machine count, ordered by n."""
    out = []
    for n in sorted(int(v) for v in ns):
        trials = default_trials(n) if trials_per_n is None else trials_per_n
        out.append(estimate_average_ratio(SimulationConfig(spec, n, trials, seed, workers)))
    return out
