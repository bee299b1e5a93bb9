"""Tail quantiles of the link-cost law and predictions for the expected optimum.

The cost of a single link satisfies P(cost >= r) = L(e^r - 1), writing L for
the reciprocal-gain transform of the gain model.  Everything here follows
from numerically inverting that identity: the tail quantile at level p, the
prediction n * quantile(1/n) for the expected optimum of an n x n instance,
and diagnostics for how slowly the quantile varies in p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gains import (
    ConstantGain,
    DensityGain,
    ExponentialGain,
    GainModel,
    ParetoGain,
    UniformGain,
)

__all__ = [
    "BRACKET_WIDTH",
    "BracketError",
    "QuantileResult",
    "asymptotic_quantile",
    "predicted_max",
    "slow_variation_ratio",
    "tail_probability",
    "tail_quantile",
]

BRACKET_WIDTH = 1e-10
_MAX_DOUBLINGS = 200
_DOUBLE_LOG_GUARD = math.exp(-math.e)


class BracketError(RuntimeError):
    """The quantile search could not bracket or pin down a root."""


@dataclass(frozen=True)
class QuantileResult:
    """Converged tail quantile with the evidence for its convergence.

    ``residual`` is the defect log L(e^r - 1) - log p at the returned r and
    stays within 1e-8; ``bracket`` is the final enclosing interval, no wider
    than ``BRACKET_WIDTH``.
    """

    p: float
    r: float
    bracket: tuple[float, float]
    residual: float
    iterations: int


def tail_quantile(model: GainModel, p: float) -> QuantileResult:
    """Solve L(e^r - 1) = p for r by bisection.

    The map r -> log L(e^r - 1) is continuous and strictly decreasing from 0,
    so a bracket found by doubling r is bisected to width ``BRACKET_WIDTH``.

    Raises:
        ValueError: unless 0 < p < 1.
        BracketError: if 200 doublings never straddle log p.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("quantile level p must lie strictly between 0 and 1")
    target = math.log(p)

    def defect(r: float) -> float:
        return model.log_laplace(math.expm1(r))

    low, high = 0.0, 1.0
    value_high = defect(high)
    doublings = 0
    while value_high > target:
        low, high = high, 2.0 * high
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise BracketError(
                f"no bracket for p = {p:g} after {_MAX_DOUBLINGS} doublings"
            )
        value_high = defect(high)
    iterations = 0
    while high - low > BRACKET_WIDTH:
        mid = 0.5 * (low + high)
        if defect(mid) > target:
            low = mid
        else:
            high = mid
        iterations += 1
        if iterations > 2000:
            raise BracketError("bisection failed to shrink the bracket")
    r = 0.5 * (low + high)
    return QuantileResult(
        p=p,
        r=r,
        bracket=(low, high),
        residual=defect(r) - target,
        iterations=iterations,
    )


def tail_probability(model: GainModel, r: float) -> float:
    """P(link cost >= r), i.e. L(e^r - 1); the inverse of the quantile."""
    r = float(r)
    if math.isnan(r) or r < 0.0:
        raise ValueError("threshold r must be nonnegative")
    return math.exp(model.log_laplace(math.expm1(r)))


def predicted_max(model: GainModel, n: int) -> float:
    """Prediction n * quantile(1/n) for the expected optimal assignment value."""
    n = int(n)
    if n < 2:
        raise ValueError("prediction needs n >= 2")
    return n * tail_quantile(model, 1.0 / n).r


def asymptotic_quantile(model: GainModel, p: float) -> float:
    """Closed-form leading behavior of the tail quantile as p -> 0.

    Guarded to p < exp(-e) so the iterated logarithms involved are all
    above 1.  The exponential model uses the sharper two-log form
    log(log(p)**2 / 4) rather than its crude first term.
    """
    p = float(p)
    if not 0.0 < p < _DOUBLE_LOG_GUARD:
        raise ValueError("asymptotic quantile needs 0 < p < exp(-e)")
    size = -math.log(p)
    if isinstance(model, ConstantGain):
        return math.log1p(model.value * size)
    if isinstance(model, ExponentialGain):
        return math.log(size * size / 4.0)
    if isinstance(model, ParetoGain):
        return size / (model.alpha - 1.0)
    if isinstance(model, UniformGain):
        return math.log(size)
    if isinstance(model, DensityGain):
        raise ValueError("no closed-form asymptotic for a user-supplied density")
    raise TypeError(f"unknown gain model {type(model).__name__}")


def slow_variation_ratio(model: GainModel, p: float, scale: float) -> float:
    """quantile(scale * p) / quantile(p); near 1 when the tail varies slowly."""
    p = float(p)
    scale = float(scale)
    if not 0.0 < p < 1.0:
        raise ValueError("quantile level p must lie strictly between 0 and 1")
    if not scale > 0.0 or not 0.0 < scale * p < 1.0:
        raise ValueError("scale must be positive with scale * p inside (0, 1)")
    return tail_quantile(model, scale * p).r / tail_quantile(model, p).r
