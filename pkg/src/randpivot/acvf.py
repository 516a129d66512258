"""Sample moments and the bandwidth rules for the lag truncation q."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError


@dataclass(frozen=True)
class AcvfEstimates:
    mean: float
    gammas: np.ndarray  # gamma-bar_0 .. gamma-bar_q
    n: int

    @property
    def q(self) -> int:
        return self.gammas.size - 1


def sample_mean(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ParameterDomainError("empty series")
    return float(x.mean())


def sample_acvf(x, h: int) -> float:
    """(1/n) sum_{j=1}^{n-h} (X_j - mean)(X_{j+h} - mean); divisor n, not n-h."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 0 <= h <= n - 1:
        raise ParameterDomainError(f"lag {h} outside [0, {n - 1}]")
    y = x - x.mean()
    return float(y[: n - h] @ y[h:]) / n


def sample_acvfs(x: np.ndarray, q: int) -> np.ndarray:
    """gamma-bar_0..gamma-bar_q along the last axis of ``x``.

    Works row-wise on 2-D input and returns shape ``(..., q + 1)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not 0 <= q <= n - 1:
        raise ParameterDomainError(f"q={q} outside [0, {n - 1}]")
    y = x - x.mean(axis=-1, keepdims=True)
    out = np.empty(x.shape[:-1] + (q + 1,))
    for h in range(q + 1):
        out[..., h] = np.einsum("...i,...i->...", y[..., : n - h], y[..., h:]) / n
    return out


def estimate_acvf(x, q: int) -> AcvfEstimates:
    x = np.asarray(x, dtype=float)
    return AcvfEstimates(mean=sample_mean(x), gammas=sample_acvfs(x, q), n=x.size)


def bandwidth_q(n: int, d: float = 0.0) -> int:
    """Lag truncation for the Studentizers.

    ceil(n^(1/3)) for d = 0, ceil(n^(1/(3+4d))) for 0 < d < 1/4 and
    ceil(n^(1/2-d)) for 1/4 <= d < 1/2, clamped to [1, floor(sqrt(n))].
    """
    if n < 8:
        raise ParameterDomainError(f"bandwidth rule needs n >= 8, got {n}")
    if not 0.0 <= d < 0.5:
        raise ParameterDomainError(f"d must lie in [0, 0.5), got {d}")
    if d == 0.0:
        expo = 1.0 / 3.0
    elif d < 0.25:
        expo = 1.0 / (3.0 + 4.0 * d)
    else:
        expo = 0.5 - d
    power = n**expo
    # exact integer powers such as 27^(1/3) come back as 3.0000000000000004
    q = round(power) if abs(power - round(power)) < 1e-9 else math.ceil(power)
    return int(min(max(q, 1), math.isqrt(n)))
