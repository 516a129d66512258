"""Short- and long-memory linear processes.

Three models are supported, all driven by unit-variance i.i.d. innovations:

* ``ma1``     X_t = mu + z_t + theta * z_{t-1}
* ``ar1``     X_t - mu = phi * (X_{t-1} - mu) + z_t
* ``farima``  X_t = mu + sum_{k=0}^{K} psi_k z_{t-k}, the truncated MA(inf)
  form of (1 - B)^{-d} z_t with 0 < d < 1/2.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft
import scipy.signal
from scipy.special import gammaln

from .errors import ParameterDomainError

MODELS = ("ma1", "ar1", "farima")
DEFAULT_BURNIN = 1000
MIN_TRUNCATION = 10_000

_LOGNORMAL_SHIFT = math.exp(0.5)
_LOGNORMAL_SCALE = math.sqrt(math.e * (math.e - 1.0))


class InnovationDist(str, enum.Enum):
    """Standardized innovation law (mean 0, variance 1)."""

    GAUSSIAN = "gaussian"
    LOGNORMAL = "lognormal"

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        z = rng.standard_normal(size)
        if self is InnovationDist.LOGNORMAL:
            return (np.exp(z) - _LOGNORMAL_SHIFT) / _LOGNORMAL_SCALE
        return z


@dataclass(frozen=True)
class ProcessSpec:
    """Data-generating model.

    ``param`` is theta for ``ma1``, phi for ``ar1`` and d for ``farima``.
    ``truncation_K`` of ``None`` means ``max(10_000, 50 * n)`` at simulation
    time.
    """

    model: str
    param: float
    mu: float = 0.0
    innovations: InnovationDist = InnovationDist.GAUSSIAN
    truncation_K: int | None = None
    burnin: int = DEFAULT_BURNIN

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterDomainError(f"unknown model {self.model!r}; expected one of {MODELS}")
        object.__setattr__(self, "innovations", InnovationDist(self.innovations))
        if not math.isfinite(self.param) or not math.isfinite(self.mu):
            raise ParameterDomainError("model parameters must be finite")
        if self.model == "ar1" and not abs(self.param) < 1.0:
            raise ParameterDomainError(f"AR(1) needs |phi| < 1, got {self.param}")
        if self.model == "farima" and not 0.0 < self.param < 0.5:
            raise ParameterDomainError(f"FARIMA needs 0 < d < 0.5, got {self.param}")
        if self.truncation_K is not None and self.truncation_K < 0:
            raise ParameterDomainError("truncation_K must be nonnegative")
        if self.burnin < 0:
            raise ParameterDomainError("burnin must be nonnegative")

    @classmethod
    def ma1(cls, theta: float, **kw) -> ProcessSpec:
        return cls("ma1", theta, **kw)

    @classmethod
    def ar1(cls, phi: float, **kw) -> ProcessSpec:
        return cls("ar1", phi, **kw)

    @classmethod
    def farima(cls, d: float, **kw) -> ProcessSpec:
        return cls("farima", d, **kw)

    @property
    def memory(self) -> float:
        """Memory parameter d; zero for the short-memory models."""
        return self.param if self.model == "farima" else 0.0

    @property
    def long_memory(self) -> bool:
        return self.model == "farima"

    def truncation(self, n: int) -> int:
        if self.truncation_K is not None:
            return self.truncation_K
        return max(MIN_TRUNCATION, 50 * n)

    def presample(self, n: int) -> int:
        """Innovations needed before the first retained observation."""
        if self.model == "ma1":
            return 1
        if self.model == "ar1":
            return self.burnin
        return self.truncation(n)

    def describe(self) -> str:
        name = {"ma1": "theta", "ar1": "phi", "farima": "d"}[self.model]
        return f"{self.model}({name}={self.param:g})"


def farima_ma_coeffs(d: float, K: int) -> np.ndarray:
    """MA(inf) weights psi_0..psi_K of (1 - B)^{-d}.

    psi_k = Gamma(k + d) / (Gamma(d) Gamma(k + 1)), built with the product
    recursion psi_k = psi_{k-1} (k - 1 + d) / k.
    """
    if not 0.0 < d < 0.5:
        raise ParameterDomainError(f"d must lie in (0, 0.5), got {d}")
    if K < 0:
        raise ParameterDomainError("K must be nonnegative")
    k = np.arange(1, K + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 1.0 + d) / k)))


def theoretical_acvf(spec: ProcessSpec, h: int) -> float:
    """Exact autocovariance at lag ``h`` of the untruncated process."""
    if h < 0:
        raise ParameterDomainError("lag must be nonnegative")
    if spec.model == "ma1":
        theta = spec.param
        return {0: 1.0 + theta * theta, 1: theta}.get(h, 0.0)
    if spec.model == "ar1":
        phi = spec.param
        return phi**h / (1.0 - phi * phi)
    d = spec.param
    return math.exp(
        gammaln(1 - 2 * d) + gammaln(h + d) - gammaln(d) - gammaln(1 - d) - gammaln(h + 1 - d)
    )


def theoretical_acvf_seq(spec: ProcessSpec, n: int) -> np.ndarray:
    """gamma_0..gamma_{n-1} as an array."""
    h = np.arange(n)
    if spec.model == "ma1":
        out = np.zeros(n)
        out[0] = 1.0 + spec.param**2
        if n > 1:
            out[1] = spec.param
        return out
    if spec.model == "ar1":
        phi = spec.param
        return phi**h / (1.0 - phi * phi)
    d = spec.param
    return np.exp(
        gammaln(1 - 2 * d) + gammaln(h + d) - gammaln(d) - gammaln(1 - d) - gammaln(h + 1 - d)
    )


def filter_innovations(spec: ProcessSpec, n: int, zeta: np.ndarray) -> np.ndarray:
    """Map innovations to observations.

    ``zeta`` has shape ``(..., presample + n)``; the last axis is time and the
    result has shape ``(..., n)``.  The AR(1) recursion starts from the mean.
    """
    zeta = np.asarray(zeta, dtype=float)
    p = spec.presample(n)
    if zeta.shape[-1] != p + n:
        raise ParameterDomainError(f"expected {p + n} innovations, got {zeta.shape[-1]}")
    if spec.model == "ma1":
        x = zeta[..., 1:] + spec.param * zeta[..., :-1]
    elif spec.model == "ar1":
        x = scipy.signal.lfilter([1.0], [1.0, -spec.param], zeta, axis=-1)[..., p:]
    else:
        psi = farima_ma_coeffs(spec.param, p)
        x = _valid_convolve(zeta, psi, n)
    return spec.mu + x


def _valid_convolve(zeta: np.ndarray, psi: np.ndarray, n: int) -> np.ndarray:
    # circular length >= n + K keeps the retained window free of wrap-around
    K = psi.size - 1
    size = scipy.fft.next_fast_len(n + K, real=True)
    spec_psi = scipy.fft.rfft(psi, size)
    full = scipy.fft.irfft(scipy.fft.rfft(zeta, size, axis=-1) * spec_psi, size, axis=-1)
    return full[..., K : K + n]


def simulate_batch(spec: ProcessSpec, n: int, rngs: Sequence[np.random.Generator]) -> np.ndarray:
    """One series per generator, stacked into shape ``(len(rngs), n)``."""
    if n < 2:
        raise ParameterDomainError("n must be at least 2")
    length = spec.presample(n) + n
    zeta = np.empty((len(rngs), length))
    for row, rng in zip(zeta, rngs):
        row[:] = spec.innovations.draw(rng, length)
    return filter_innovations(spec, n, zeta)


def simulate(spec: ProcessSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw X_1..X_n from ``spec``."""
    return simulate_batch(spec, n, [rng])[0]
