"""Randomized single-task scheduling mechanism with bound-by-declaration costs.

Machines report processing times; the task is given to machine ``k`` with a
probability built from products of the linear factors ``1 - x / t_i``. Every
integrand is a polynomial of degree at most ``n - 1`` on ``[0, t_1]``, so a
Gauss-Legendre rule with ``ceil(n/2) + 1`` nodes integrates it exactly.

All quantities are evaluated after rescaling by the cheapest cost ``t_1``:
with ``r_i = t_1 / t_i`` in ``(0, 1]`` and ``u = x / t_1`` in ``[0, 1]``,

    p_1 = int_0^1 prod_{i>=2} (1 - u r_i) du
    p_k = r_k int_0^1 (1 - u) prod_{i>=2, i!=k} (1 - u r_i) du

(the double integral collapses by swapping the order of integration), and
the approximation ratio ``SC / t_1`` is

    int_0^1 P(u) du + int_0^1 (1 - u) P(u) sum_k 1 / (1 - u r_k) du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidInputError, NumericalError, UnsupportedSizeError

MAX_MACHINES = 4096
ORACLE_MAX_MACHINES = 32
SUM_TOLERANCE = 1e-9
DEVIATION_TOLERANCE = 1e-9

# elements per (batch, node, machine) block when evaluating ratios in bulk
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class MechanismOutcome:
    social_cost: float
    optimal_cost: float
    ratio: float


@dataclass(frozen=True)
class DeviationReport:
    machine_index: int
    true_cost: float
    declared_cost: float
    truthful_expected_cost: float
    deviated_expected_cost: float
    profitable: bool


def as_costs(t, max_n: int = MAX_MACHINES) -> np.ndarray:
    """Validate a cost vector and return it as a float64 array."""
    try:
        arr = np.array(t, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"costs must be real numbers: {exc}") from None
    if arr.size == 0:
        raise InvalidInputError("at least one cost is required")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("costs must be finite")
    if np.any(arr <= 0.0):
        raise InvalidInputError("costs must be strictly positive")
    if arr.size > max_n:
        raise UnsupportedSizeError(f"n = {arr.size} exceeds the supported maximum {max_n}")
    return arr


def node_count(n: int) -> int:
    """Gauss-Legendre nodes needed to integrate the degree n-1 integrands exactly."""
    return (n + 1) // 2 + 1


@lru_cache(maxsize=256)
def unit_gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]; nodes are strictly interior."""
    x, w = roots_legendre(m)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    u.setflags(write=False)
    wu.setflags(write=False)
    return u, wu


def _sorted_ratios(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(t, kind="stable")
    s = t[order]
    return order, s[0] / s[1:]


def _finalize(probs: np.ndarray) -> np.ndarray:
    total = math.fsum(probs)
    if abs(total - 1.0) > SUM_TOLERANCE or np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12):
        raise NumericalError(f"allocation probabilities inconsistent (sum = {total!r})")
    probs = np.clip(probs, 0.0, 1.0)
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-12:
        probs = probs / total
    return probs


def _tie_average(t: np.ndarray, probs: np.ndarray) -> np.ndarray:
    # equal costs have equal probabilities in exact arithmetic; remove ulp noise
    _, inverse, counts = np.unique(t, return_inverse=True, return_counts=True)
    if counts.max() == 1:
        return probs
    means = np.bincount(inverse, weights=probs) / counts
    return means[inverse]


def allocate(t) -> np.ndarray:
    """Allocation probabilities, aligned with the original machine order."""
    t = as_costs(t)
    n = t.size
    if n == 1:
        return np.ones(1)
    order, r = _sorted_ratios(t)
    u, w = unit_gauss_legendre(node_count(n))

    factors = 1.0 - np.outer(u, r)  # (m, n-1), entries in (0, 1]
    ones = np.ones((u.size, 1))
    prefix = np.cumprod(np.hstack([ones, factors[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, factors[:, :0:-1]]), axis=1)[:, ::-1]
    full = prefix[:, -1] * factors[:, -1]

    sorted_probs = np.empty(n)
    sorted_probs[0] = w @ full
    sorted_probs[1:] = r * ((w * (1.0 - u)) @ (prefix * suffix))

    probs = np.empty(n)
    probs[order] = sorted_probs
    return _finalize(_tie_average(t, probs))


def _elementary_symmetric(values: Sequence[float]) -> list[float]:
    e = [1.0] + [0.0] * len(values)
    for j, v in enumerate(values, start=1):
        for d in range(j, 0, -1):
            e[d] += v * e[d - 1]
    return e


def allocate_oracle(t) -> np.ndarray:
    """Same probabilities via expansion into elementary symmetric polynomials.

    Each product of linear factors is expanded as sum_j (-1)^j e_j(r) u^j and
    integrated term by term. Exponential in nothing but prone to cancellation
    for large n, hence the size cap. Test use only.
    """
    t = as_costs(t, max_n=ORACLE_MAX_MACHINES)
    n = t.size
    if n == 1:
        return np.ones(1)
    order, r = _sorted_ratios(t)
    r = [float(v) for v in r]

    e_all = _elementary_symmetric(r)
    sorted_probs = [math.fsum((-1) ** j * e_all[j] / (j + 1) for j in range(n))]
    for k in range(len(r)):
        e = _elementary_symmetric(r[:k] + r[k + 1:])
        integral = math.fsum((-1) ** j * e[j] / ((j + 1) * (j + 2)) for j in range(n - 1))
        sorted_probs.append(r[k] * integral)

    probs = np.empty(n)
    probs[order] = sorted_probs
    return probs


def ratio_from_scaled(r: np.ndarray) -> np.ndarray:
    """Approximation ratio SC/t_1 for a batch of scaled instances.

    ``r`` has shape (batch, n-1) with rows ``t_1 / t_k`` for the machines other
    than the cheapest, each in (0, 1]. Cost is O(n * m) per row.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2:
        raise InvalidInputError("scaled ratios must be a 2-D array")
    batch, others = r.shape
    if others == 0:
        return np.ones(batch)
    u, w = unit_gauss_legendre(node_count(others + 1))
    w_tail = w * (1.0 - u)
    out = np.empty(batch)
    step = max(1, _BLOCK_ELEMENTS // (u.size * others))
    for lo in range(0, batch, step):
        block = r[lo:lo + step]
        factors = 1.0 - block[:, None, :] * u[None, :, None]
        prod = factors.prod(axis=2)
        inv_sum = (1.0 / factors).sum(axis=2)
        out[lo:lo + step] = prod @ w + (prod * inv_sum) @ w_tail
    return out


def social_cost(t) -> MechanismOutcome:
    """Expected social cost of the mechanism, the optimum, and their ratio."""
    t = as_costs(t)
    n = t.size
    t1 = float(t.min())
    if n == 1:
        return MechanismOutcome(t1, t1, 1.0)
    _, r = _sorted_ratios(t)
    ratio = float(ratio_from_scaled(r[None, :])[0])
    if not (1.0 - 1e-9 <= ratio <= (n + 1) / 2 + 1e-9):
        raise NumericalError(f"ratio {ratio!r} outside [1, (n+1)/2] for n = {n}")
    ratio = max(ratio, 1.0)
    return MechanismOutcome(ratio * t1, t1, ratio)


def deviation_cost(t, i: int, declared: float) -> DeviationReport:
    """Expected cost of machine ``i`` when it declares ``declared`` instead of its true cost."""
    t = as_costs(t)
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 0 <= i < t.size:
        raise InvalidInputError(f"machine index {i!r} out of range for n = {t.size}")
    declared = float(declared)
    if not math.isfinite(declared) or declared <= 0.0:
        raise InvalidInputError("declared cost must be positive and finite")
    true_cost = float(t[i])
    truthful = float(allocate(t)[i]) * true_cost
    reported = t.copy()
    reported[i] = declared
    deviated = float(allocate(reported)[i]) * max(true_cost, declared)
    return DeviationReport(
        machine_index=int(i),
        true_cost=true_cost,
        declared_cost=declared,
        truthful_expected_cost=truthful,
        deviated_expected_cost=deviated,
        profitable=deviated < truthful - DEVIATION_TOLERANCE,
    )


def best_deviation(t, i: int, grid) -> DeviationReport:
    """The declaration on ``grid`` that minimizes machine ``i``'s expected cost."""
    grid = np.asarray(grid, dtype=np.float64).reshape(-1)
    if grid.size == 0:
        raise InvalidInputError("deviation grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0.0):
        raise InvalidInputError("deviation grid must be positive and finite")
    best = None
    for declared in grid:
        report = deviation_cost(t, i, declared)
        if best is None or report.deviated_expected_cost < best.deviated_expected_cost:
            best = report
    return best
