"""Local Whittle estimation of the memory parameter d."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import NumericError, ParameterDomainError

D_MIN = 0.0
D_MAX = 0.499
GOLDEN_TOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MemoryEstimate:
    d_hat: float
    m: int


def default_m(n: int) -> int:
    """Number of Fourier frequencies, n^0.65 rounded to the nearest integer."""
    return int(round(n**0.65))


def periodogram(x) -> np.ndarray:
    """I(lambda_j) = |sum_t X_t exp(-i t lambda_j)|^2 / (2 pi n), j = 1..floor((n-1)/2).

    Operates along the last axis.  Entry ``j - 1`` holds frequency
    ``lambda_j = 2 pi j / n``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n < 8:
        raise ParameterDomainError(f"periodogram needs n >= 8, got {n}")
    f = scipy.fft.rfft(x, axis=-1)[..., 1 : (n - 1) // 2 + 1]
    return (f.real**2 + f.imag**2) / (2.0 * math.pi * n)


def whittle_objective(d, I: np.ndarray) -> np.ndarray:
    """R(d) = log(mean_j j^{2d} I_j) - 2d mean_j log j over the first m ordinates.

    ``I`` has shape ``(..., m)``; ``d`` broadcasts against its leading axes.
    """
    m = I.shape[-1]
    logj = np.log(np.arange(1, m + 1, dtype=float))
    d = np.asarray(d, dtype=float)
    s = np.mean(np.exp(2.0 * d[..., None] * logj) * I, axis=-1)
    return np.log(s) - 2.0 * d * logj.mean()


def _golden_min(I: np.ndarray) -> np.ndarray:
    # Row-wise golden-section search; the iteration count depends only on the
    # bracket and tolerance, so every row runs the same schedule.
    lead = I.shape[:-1]
    a = np.full(lead, D_MIN)
    b = np.full(lead, D_MAX)
    c = b - _INVPHI * (b - a)
    e = a + _INVPHI * (b - a)
    fc = whittle_objective(c, I)
    fe = whittle_objective(e, I)
    while np.max(b - a) > GOLDEN_TOL:
        left = fc < fe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - _INVPHI * (b - a), e)
        new_e = np.where(left, c, a + _INVPHI * (b - a))
        f_new = whittle_objective(np.where(left, new_c, new_e), I)
        fe, fc = np.where(left, fc, f_new), np.where(left, f_new, fe)
        c, e = new_c, new_e
    return np.clip((a + b) / 2.0, D_MIN, D_MAX)


def local_whittle_batch(x: np.ndarray, m: int | None = None) -> np.ndarray:
    """d-hat for every row of ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if m is None:
        m = default_m(n)
    top = (n - 1) // 2
    if not 8 <= m <= top:
        raise ParameterDomainError(f"m={m} outside [8, {top}] for n={n}")
    I = periodogram(x)[..., :m]
    if not np.all(np.isfinite(I)):
        raise NumericError("non-finite periodogram")
    if np.any(np.all(I == 0.0, axis=-1)):
        raise NumericError("periodogram vanishes on the first m frequencies")
    return _golden_min(I)


def local_whittle(x, m: int | None = None) -> MemoryEstimate:
    """Local Whittle estimate of d on [0, 0.499]."""
    x = np.asarray(x, dtype=float)
    if m is None:
        m = default_m(x.size)
    return MemoryEstimate(d_hat=float(local_whittle_batch(x[None, :], m)[0]), m=m)
