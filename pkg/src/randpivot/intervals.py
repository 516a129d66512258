"""Confidence intervals for mu and Jensen-type bounds for E G(X)."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtri

from .errors import ParameterDomainError
from .pivots import _check_weights, _pair, _root, variance_components


class Shape(str, enum.Enum):
    INCREASING_CONVEX = "increasing-convex"
    DECREASING_CONVEX = "decreasing-convex"


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    level: float
    method: str  # "GStuShort" (d = 0) or "GStuLong"

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2.0

    @property
    def halfwidth(self) -> float:
        return (self.upper - self.lower) / 2.0

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class FunctionalBoundRequest:
    """A function and its declared shape; the shape is trusted, never checked."""

    func: Callable[[float], float]
    shape: Shape

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))


def z_quantile(p: float) -> float:
    """Standard normal quantile Phi^{-1}(p)."""
    if not 0.0 < p < 1.0:
        raise ParameterDomainError(f"p must lie strictly inside (0, 1), got {p}")
    return float(ndtri(p))


def _weighted_center(x, w, q, d):
    """(sum |c_i| X_i, sum |c_j|, sqrt(D))."""
    x, w = _pair(x, w)
    _check_weights(w)
    n = x.size
    a = np.abs(w - 1.0) / n
    root = _root(variance_components(x, w, q, d).total, "Studentizer D")
    return float(a @ x), float(a.sum()), root


def ci_mean(x, w, q: int, d: float, alpha: float) -> Interval:
    """Two-sided 1 - alpha interval for mu from the Studentized randomized pivot.

    Endpoints are (sum |c_i| X_i -/+ z_{1-alpha/2} sqrt(D_{n,q,d})) / sum |c_j|.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    num, scale, root = _weighted_center(x, w, q, d)
    half = z_quantile(1.0 - alpha / 2.0) * root
    return Interval(
        lower=(num - half) / scale,
        upper=(num + half) / scale,
        level=1.0 - alpha,
        method="GStuShort" if d == 0.0 else "GStuLong",
    )


def one_sided_bound(x, w, q: int, d: float, alpha: float, side: str = "lower") -> float:
    """One-sided 1 - alpha bound for mu using z_{1-alpha}."""
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    if side not in ("lower", "upper"):
        raise ParameterDomainError(f"side must be 'lower' or 'upper', got {side!r}")
    num, scale, root = _weighted_center(x, w, q, d)
    shift = z_quantile(1.0 - alpha) * root
    return (num - shift) / scale if side == "lower" else (num + shift) / scale


def functional_lower_bound(x, w, q: int, d: float, alpha: float, req: FunctionalBoundRequest) -> float:
    """Asymptotic 1 - alpha lower confidence bound for E G(X).

    For increasing convex G this is G(lower bound for mu); for decreasing
    convex G it is G(upper bound for mu).  Both follow from Jensen's inequality
    G(mu) <= E G(X).
    """
    side = "lower" if req.shape is Shape.INCREASING_CONVEX else "upper"
    return float(req.func(one_sided_bound(x, w, q, d, alpha, side)))
