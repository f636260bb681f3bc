"""I.i.d. cost distributions supported on [t_min, inf) and the threshold h.

Two CDF conventions are offered. ``paper_literal`` evaluates the plain closed
forms; for the Exponential and Log-logistic families these are *not*
conditioned on ``T >= t_min`` (the Exponential form is cut to zero below
``t_min``, the Log-logistic one is not cut at all). ``renormalized`` conditions on the support,
``(F(t) - F(t_min)) / (1 - F(t_min))``. Sampling always draws from the
renormalized law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bounds import theorem1_bound
from .errors import InvalidInputError, NumericalError

THRESHOLD_QUANTILE = 11.0 / 12.0


class Family(str, Enum):
    PARETO = "pareto"
    EXPONENTIAL = "exponential"
    LOGLOGISTIC = "loglogistic"


class Convention(str, Enum):
    PAPER_LITERAL = "paper"
    RENORMALIZED = "renormalized"


@dataclass(frozen=True)
class DistributionSpec:
    """Cost law. ``shape`` is the tail index for Pareto, the rate for
    Exponential and the shape parameter for Log-logistic (scale fixed to 1)."""

    family: Family
    t_min: float
    shape: float
    convention: Convention = Convention.PAPER_LITERAL

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
            object.__setattr__(self, "convention", Convention(self.convention))
        except ValueError as exc:
            raise InvalidInputError(str(exc)) from None
        for name in ("t_min", "shape"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    def with_convention(self, convention) -> DistributionSpec:
        return DistributionSpec(self.family, self.t_min, self.shape, Convention(convention))


@dataclass(frozen=True)
class ThresholdChoice:
    h: float
    cdf_at_threshold: float
    theorem1_bound: float


def _raw_survival(spec: DistributionSpec, t):
    """1 - F(t) for the untruncated closed form."""
    t = np.asarray(t, dtype=np.float64)
    if spec.family is Family.PARETO:
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, (spec.t_min / t) ** spec.shape)
    if spec.family is Family.EXPONENTIAL:
        return np.exp(-spec.shape * t)
    with np.errstate(divide="ignore", over="ignore"):
        return 1.0 / (1.0 + t ** spec.shape)


def survival(spec: DistributionSpec, t, convention=None):
    """1 - cdf, computed directly to keep precision in the tail."""
    convention = Convention(convention or spec.convention)
    t = np.asarray(t, dtype=np.float64)
    below = t < spec.t_min
    if convention is Convention.RENORMALIZED:
        if spec.family is Family.EXPONENTIAL:
            s = np.exp(-spec.shape * np.maximum(t - spec.t_min, 0.0))
        else:
            s = _raw_survival(spec, t) / _raw_survival(spec, spec.t_min)
        out = np.where(below, 1.0, s)
    elif spec.family is Family.LOGLOGISTIC:
        out = _raw_survival(spec, t)
    else:
        out = np.where(below, 1.0, _raw_survival(spec, t))
    return float(out) if out.ndim == 0 else out


def cdf(spec: DistributionSpec, t, convention=None):
    """Pr(T < t) under the spec's convention (or an explicit override)."""
    s = survival(spec, t, convention)
    return 1.0 - s


def sample(spec: DistributionSpec, rng: np.random.Generator, size=None):
    """Inverse-CDF draws from the renormalized law on [t_min, inf).

    One uniform ``u = rng.random()`` is consumed per draw; the result is the
    solution of ``survival(t) = 1 - u``.
    """
    return inverse_cdf(spec, rng.random(size))


def inverse_cdf(spec: DistributionSpec, u):
    """Quantile function of the renormalized law."""
    u = np.asarray(u, dtype=np.float64)
    tail = 1.0 - u
    with np.errstate(divide="ignore"):
        if spec.family is Family.PARETO:
            t = spec.t_min * tail ** (-1.0 / spec.shape)
        elif spec.family is Family.EXPONENTIAL:
            t = spec.t_min - np.log(tail) / spec.shape
        else:
            base = 1.0 + spec.t_min ** spec.shape
            t = (base / tail - 1.0) ** (1.0 / spec.shape)
    t = np.maximum(t, spec.t_min)
    return float(t) if t.ndim == 0 else t


def closed_form_threshold(spec: DistributionSpec, quantile: float = THRESHOLD_QUANTILE) -> float:
    """h with F(h * t_min) = quantile for the literal CDFs.

    At the default quantile these are 12^(1/a), ln 12 / (lambda t_min) and
    e^(ln 11 / b) / t_min.
    """
    if quantile == THRESHOLD_QUANTILE:
        odds_tail, odds = 12.0, 11.0
    else:
        odds_tail, odds = 1.0 / (1.0 - quantile), quantile / (1.0 - quantile)
    if spec.family is Family.PARETO:
        return odds_tail ** (1.0 / spec.shape)
    if spec.family is Family.EXPONENTIAL:
        return math.log(odds_tail) / (spec.shape * spec.t_min)
    return odds ** (1.0 / spec.shape) / spec.t_min


def bisect_threshold(spec: DistributionSpec, convention=None,
                     quantile: float = THRESHOLD_QUANTILE, rtol: float = 1e-10) -> float:
    """Smallest h (to relative tolerance ``rtol``) with F(h * t_min) >= quantile.

    Returns the upper end of the final bracket so the inequality always holds.
    """
    convention = Convention(convention or spec.convention)

    def ok(h):
        return cdf(spec, h * spec.t_min, convention) >= quantile

    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise NumericalError("threshold solve failed to bracket")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def solve_threshold(spec: DistributionSpec, quantile: float = THRESHOLD_QUANTILE) -> ThresholdChoice:
    """Threshold h and the resulting average-ratio bound 2h + 1.33.

    ``quantile`` other than 11/12 is for exploration only: the 1.33 constant
    is derived for 11/12.
    """
    if not 0.0 < quantile < 1.0:
        raise InvalidInputError("quantile must lie in (0, 1)")
    if spec.convention is Convention.PAPER_LITERAL:
        h = closed_form_threshold(spec, quantile)
        if spec.family is Family.EXPONENTIAL and h < 1.0:
            # literal CDF is zero below t_min, so the quantile is reached no earlier than t_min
            h = 1.0
    else:
        h = bisect_threshold(spec, Convention.RENORMALIZED, quantile)
    q = cdf(spec, h * spec.t_min)
    if q < quantile - 1e-12:
        raise NumericalError(f"threshold h = {h!r} gives F(h t_min) = {q!r} < {quantile!r}")
    return ThresholdChoice(h=h, cdf_at_threshold=q, theorem1_bound=theorem1_bound(h))
