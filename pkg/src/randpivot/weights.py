"""Multinomial randomization weights.

A weight vector ``w`` holds the multiplicities of indices 1..n in n uniform
draws with replacement, so ``w ~ multinomial(n; 1/n, ..., 1/n)`` and
``w.sum() == n``.  The centered weights are ``c_i = w_i/n - 1/n``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ParameterDomainError


def counts_from_indices(indices, n: int) -> np.ndarray:
    """Multiplicities of 0-based ``indices`` over ``range(n)``."""
    return np.bincount(np.asarray(indices, dtype=np.int64), minlength=n)


def draw_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    """One multinomial(n; 1/n, ..., 1/n) weight vector."""
    if n < 2:
        raise ParameterDomainError("n must be at least 2")
    w = counts_from_indices(rng.integers(0, n, size=n), n)
    assert w.sum() == n
    return w


def is_degenerate(w) -> bool:
    """True when every count equals one (all centered weights vanish)."""
    return bool(np.all(np.asarray(w) == 1))


def sum_sq_centered(w) -> float:
    """sum_j (w_j/n - 1/n)**2."""
    w = np.asarray(w)
    n = w.size
    u = w - 1.0
    return float(u @ u) / (n * n)


def abs_lag_product_sum(w, h: int, upper: int) -> float:
    """sum_{j=1}^{upper-h} |w_j - 1| |w_{j+h} - 1|, unnormalized.

    An empty range (``h >= upper``) gives 0.
    """
    w = np.asarray(w)
    if h < 1 or upper > w.size:
        raise ParameterDomainError(f"need 1 <= h and upper <= n, got h={h}, upper={upper}")
    if h >= upper:
        return 0.0
    u = np.abs(w[:upper] - 1.0)
    return float(u[: upper - h] @ u[h:upper])


def _pow_n(x: float, n: int) -> float:
    # (1 + x)**n without cancellation for tiny x
    if x <= -1.0:
        return 0.0
    return math.exp(n * math.log1p(x))


def exact_abs_cross_moment(n: int) -> float:
    """E|(w_1 - 1)(w_2 - 1)| for multinomial(n; 1/n, ..., 1/n) weights.

    The product is negative only when one count is zero and the other is at
    least two; conditioning on w_1 = 0 (then w_2 ~ Bin(n, 1/(n-1))) gives

        -1/n + 4 (1 - 1/n)^n [1/(n-1) + (1 - 1/(n-1))^n],

    which tends to 4 e^{-2}.
    """
    if n < 2:
        raise ParameterDomainError("n must be at least 2")
    a = _pow_n(-1.0 / n, n)
    return -1.0 / n + 4.0 * a * (1.0 / (n - 1) + _pow_n(-1.0 / (n - 1), n))


def asymptotic_abs_cross_moment(n: int) -> float:
    """-1/n + 4 (1 - 1/n)^n (1 - 1/(n-1))^n.

    Drops the 4 (1 - 1/n)^n / (n - 1) term of :func:`exact_abs_cross_moment`;
    the two agree to O(1/n).
    """
    if n < 2:
        raise ParameterDomainError("n must be at least 2")
    return -1.0 / n + 4.0 * _pow_n(-1.0 / n, n) * _pow_n(-1.0 / (n - 1), n)


def moment_b(n: int, h: int) -> float:
    """b_{n,h} = -(n-h)/n^2 + 4 (n-h)/n (1 - 1/n)^n (1 - 1/(n-1))^n.

    Approximate mean of n * sum_{j<=n-h} |c_j| |c_{j+h}|, centering term of the
    lag-h cross sum in the variance of the absolute-weight sum.
    """
    if not 1 <= h <= n - 1:
        raise ParameterDomainError(f"need 1 <= h <= n-1, got h={h}, n={n}")
    m = n - h
    return -m / n**2 + 4.0 * m / n * _pow_n(-1.0 / n, n) * _pow_n(-1.0 / (n - 1), n)
