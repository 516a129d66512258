"""Randomized and classical pivots for the mean.

Notation: ``c_i = w_i/n - 1/n`` are the centered weights and
``u_i = w_i - 1 = n c_i`` their unnormalized form.  Every function here has a
row-wise ``*_batch`` form working on ``(B, n)`` arrays; the scalar functions
wrap it and turn bad rows into exceptions.  In the batch forms a nonpositive
radicand yields NaN.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .acvf import sample_acvfs
from .errors import (
    DegenerateWeights,
    NonpositiveStudentizer,
    NumericError,
    ParameterDomainError,
    ShapeError,
)
from .process import ProcessSpec, theoretical_acvf_seq
from .weights import draw_weights, is_degenerate


@dataclass(frozen=True)
class VarianceComponents:
    """Studentizer of the absolute-weight sum: ``total = lag0_term + cross_term``."""

    lag0_term: float
    cross_term: float
    total: float
    d_used: float
    q_used: int


def _pair(x, w):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w)
    if x.ndim != 1 or x.shape != w.shape:
        raise ShapeError(f"series length {x.shape} does not match weights {w.shape}")
    return x, w


def _check_weights(w):
    if is_degenerate(w):
        raise DegenerateWeights("all multinomial counts equal 1")


def _root(radicand: float, what: str) -> float:
    if not np.isfinite(radicand):
        raise NumericError(f"non-finite {what}")
    if radicand <= 0.0:
        raise NonpositiveStudentizer(f"{what} is {radicand:.6g}")
    return float(np.sqrt(radicand))


def _lag_products(a: np.ndarray) -> np.ndarray:
    """r_h = sum_j a_j a_{j+h}, h = 0..n-1, row-wise via FFT."""
    n = a.shape[-1]
    size = scipy.fft.next_fast_len(2 * n - 1, real=True)
    f = scipy.fft.rfft(a, size, axis=-1)
    return scipy.fft.irfft(f.real**2 + f.imag**2, size, axis=-1)[..., :n]


def _gamma_vector(gamma, n: int) -> np.ndarray:
    g = np.zeros(n)
    gamma = np.asarray(gamma, dtype=float)[:n]
    if gamma.size == 0:
        raise ParameterDomainError("need at least gamma_0")
    g[: gamma.size] = gamma
    return g


# ---------------------------------------------------------------------------
# randomized sums


def randomized_abs_sum(x, w, mu: float) -> float:
    """sum_i |w_i/n - 1/n| (X_i - mu)."""
    x, w = _pair(x, w)
    n = x.size
    return float(np.abs(w - 1.0) @ (x - mu)) / n


def randomized_signed_sum(x, w) -> float:
    """sum_i (w_i/n - 1/n) X_i, i.e. the resample mean minus the sample mean."""
    x, w = _pair(x, w)
    n = x.size
    return float((w - 1.0) @ x) / n


# ---------------------------------------------------------------------------
# G_n with known autocovariances


def g_n(x, w, mu: float, gamma) -> float:
    """Absolute-weight sum over its exact conditional standard deviation.

    ``gamma`` lists the true autocovariances gamma_0, gamma_1, ...; lags past
    its end are taken as zero.
    """
    x, w = _pair(x, w)
    _check_weights(w)
    n = x.size
    g = _gamma_vector(gamma, n)
    if g[0] <= 0.0:
        raise ParameterDomainError("gamma_0 must be positive")
    a = np.abs(w - 1.0) / n
    r = np.correlate(a, a, mode="full")[n - 1 :]
    radicand = g[0] * float(a @ a) + 2.0 * float(g[1:] @ r[1:])
    return randomized_abs_sum(x, w, mu) / _root(radicand, "G_n radicand")


# ---------------------------------------------------------------------------
# Studentized pivots


def _lag_abs_sums(u: np.ndarray, q: np.ndarray) -> np.ndarray:
    """A[b, h] = sum_{j=1}^{q_b - h} |u_bj| |u_b,j+h| for h = 0..max(q)."""
    qmax = int(q.max())
    U = np.abs(u[:, :qmax])
    out = np.zeros((u.shape[0], qmax + 1))
    j = np.arange(qmax)
    for h in range(1, qmax):
        prod = U[:, : qmax - h] * U[:, h:qmax]
        keep = j[: qmax - h][None, :] < (q[:, None] - h)
        out[:, h] = np.where(keep, prod, 0.0).sum(axis=1)
    return out


def variance_components_batch(X, W, q, d, gammas=None):
    """Row-wise (lag0_term, cross_term) arrays.

    ``q`` (int) and ``d`` (float) may be scalars or per-row arrays.
    ``gammas`` optionally supplies precomputed sample autocovariances with at
    least ``max(q) + 1`` columns.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    W = np.atleast_2d(np.asarray(W))
    B, n = X.shape
    q = np.broadcast_to(np.asarray(q, dtype=np.int64), (B,))
    d = np.broadcast_to(np.asarray(d, dtype=float), (B,))
    if np.any(q < 1) or np.any(q > n - 1):
        raise ParameterDomainError(f"q must lie in [1, {n - 1}]")
    if np.any(d < 0.0) or np.any(d >= 0.5):
        raise ParameterDomainError("d must lie in [0, 0.5)")
    qmax = int(q.max())
    if gammas is None:
        gammas = sample_acvfs(X, qmax)
    u = W - 1.0
    sum_sq = np.einsum("ij,ij->i", u, u) / (n * n)
    log_ratio = np.log(q / n)
    # (q/n)^{-2d} and n^{1-2d} q^{1+2d} = n q (q/n)^{2d}; both exactly n-free at d = 0
    lag0 = np.exp(-2.0 * d * log_ratio) * gammas[:, 0] * sum_sq
    A = _lag_abs_sums(u, q)
    h = np.arange(qmax + 1)
    inside = (h[None, :] >= 1) & (h[None, :] <= q[:, None])
    raw = np.where(inside, gammas[:, : qmax + 1] * A, 0.0).sum(axis=1)
    cross = 2.0 * raw / (n * q * np.exp(2.0 * d * log_ratio))
    return lag0, cross


def variance_components(x, w, q: int, d: float) -> VarianceComponents:
    """Studentizer D_{n,q,d} of the absolute-weight sum and its two parts.

    lag0_term  = (q/n)^{-2d} gamma-bar_0 sum_j (w_j/n - 1/n)^2
    cross_term = 2 sum_{h=1}^{q} gamma-bar_h sum_{j=1}^{q-h} |w_j - 1||w_{j+h} - 1|
                 / (n^{1-2d} q^{1+2d})
    """
    x, w = _pair(x, w)
    lag0, cross = variance_components_batch(x[None, :], w[None, :], q, d)
    return VarianceComponents(
        lag0_term=float(lag0[0]),
        cross_term=float(cross[0]),
        total=float(lag0[0] + cross[0]),
        d_used=float(d),
        q_used=int(q),
    )


def g_n_stu_batch(X, W, q, d, mu, gammas=None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    W = np.atleast_2d(np.asarray(W))
    n = X.shape[1]
    lag0, cross = variance_components_batch(X, W, q, d, gammas)
    total = lag0 + cross
    num = np.einsum("ij,ij->i", np.abs(W - 1.0), X - np.asarray(mu)[..., None]) / n
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0.0, num / np.sqrt(np.where(total > 0.0, total, 1.0)), np.nan)


def g_n_stu(x, w, q: int, d: float, mu: float) -> float:
    """Randomized pivot for mu Studentized with D_{n,q,d}.

    ``d = 0`` gives the short-memory pivot; pass an estimate of d for the
    long-memory one.
    """
    x, w = _pair(x, w)
    _check_weights(w)
    vc = variance_components(x, w, q, d)
    return randomized_abs_sum(x, w, mu) / _root(vc.total, "Studentizer D")


def classical_radicand_batch(X, q, d, gammas=None) -> np.ndarray:
    """q^{-2d} (gamma-bar_0 + 2 sum_{h=1}^{q} gamma-bar_h (1 - h/q))."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    B, n = X.shape
    q = np.broadcast_to(np.asarray(q, dtype=np.int64), (B,))
    d = np.broadcast_to(np.asarray(d, dtype=float), (B,))
    if np.any(q < 1) or np.any(q > n - 1):
        raise ParameterDomainError(f"q must lie in [1, {n - 1}]")
    qmax = int(q.max())
    if gammas is None:
        gammas = sample_acvfs(X, qmax)
    h = np.arange(qmax + 1)
    bartlett = np.where((h >= 1) & (h <= q[:, None]), 1.0 - h / q[:, None], 0.0)
    s = gammas[:, 0] + 2.0 * np.sum(gammas[:, : qmax + 1] * bartlett, axis=1)
    return np.exp(-2.0 * d * np.log(q)) * s


def t_n_stu_batch(X, q, d, mu, gammas=None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    d = np.asarray(d, dtype=float)
    rad = classical_radicand_batch(X, q, d, gammas)
    num = np.exp((0.5 - d) * np.log(n)) * (X.mean(axis=1) - mu)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(rad > 0.0, num / np.sqrt(np.where(rad > 0.0, rad, 1.0)), np.nan)


def t_n_stu(x, q: int, d: float, mu: float) -> float:
    """Classical Studentized mean n^{1/2-d}(mean - mu) / sqrt(Bartlett long-run variance)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    rad = float(classical_radicand_batch(x[None, :], q, d)[0])
    root = _root(rad, "classical Studentizer")
    return float(np.exp((0.5 - d) * np.log(n))) * (float(x.mean()) - mu) / root


# ---------------------------------------------------------------------------
# bootstrap-type statistics (signed weights)


def signed_radicand_batch(W, gamma) -> np.ndarray:
    """gamma_0 sum c_j^2 + 2 sum_{h=1}^{n-1} gamma_h sum_j c_j c_{j+h}."""
    W = np.atleast_2d(np.asarray(W))
    n = W.shape[1]
    g = _gamma_vector(gamma, n)
    r = _lag_products((W - 1.0) / n)
    return g[0] * r[:, 0] + 2.0 * r[:, 1:] @ g[1:]


def t_star(x, w, gamma) -> float:
    """Resample-mean deviation over its exact conditional standard deviation."""
    x, w = _pair(x, w)
    _check_weights(w)
    n = x.size
    g = _gamma_vector(gamma, n)
    c = (w - 1.0) / n
    r = np.correlate(c, c, mode="full")[n - 1 :]
    radicand = g[0] * float(c @ c) + 2.0 * float(g[1:] @ r[1:])
    return randomized_signed_sum(x, w) / _root(radicand, "T* radicand")


def t_star_short(x, w, gamma0: float) -> float:
    """Resample-mean deviation normalized by gamma_0 sum c_j^2 only."""
    x, w = _pair(x, w)
    _check_weights(w)
    n = x.size
    c = (w - 1.0) / n
    return randomized_signed_sum(x, w) / _root(gamma0 * float(c @ c), "T* radicand")


def t_star_stu(x, w) -> float:
    """t_star_short with the sample variance gamma-bar_0 in place of gamma_0."""
    x, w = _pair(x, w)
    _check_weights(w)
    n = x.size
    c = (w - 1.0) / n
    gamma0 = float(sample_acvfs(x, 0)[0])
    return randomized_signed_sum(x, w) / _root(gamma0 * float(c @ c), "T*stu radicand")


def t_star_batch(X, W, gamma) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    W = np.atleast_2d(np.asarray(W))
    n = X.shape[1]
    rad = signed_radicand_batch(W, gamma)
    num = np.einsum("ij,ij->i", W - 1.0, X) / n
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(rad > 0.0, num / np.sqrt(np.where(rad > 0.0, rad, 1.0)), np.nan)


def t_star_stu_batch(X, W, gammas=None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    W = np.atleast_2d(np.asarray(W))
    n = X.shape[1]
    gamma0 = sample_acvfs(X, 0)[:, 0] if gammas is None else gammas[:, 0]
    u = W - 1.0
    rad = gamma0 * np.einsum("ij,ij->i", u, u) / (n * n)
    num = np.einsum("ij,ij->i", u, X) / n
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(rad > 0.0, num / np.sqrt(np.where(rad > 0.0, rad, 1.0)), np.nan)


def tstar_variance_diagnostic(
    spec: ProcessSpec, n: int, reps: int, rng: np.random.Generator
) -> float:
    """Average of Var_{X|w}(n^{1/2-d} (resample mean - sample mean)) over weight draws.

    Uses the true autocovariances of ``spec``.  Stays near gamma_0 for short
    memory and decays to zero for long memory.
    """
    if n < 2 or reps < 1:
        raise ParameterDomainError("need n >= 2 and reps >= 1")
    gamma = theoretical_acvf_seq(spec, n)
    W = np.stack([draw_weights(n, rng) for _ in range(reps)])
    rad = signed_radicand_batch(W, gamma)
    return float(np.exp((1.0 - 2.0 * spec.memory) * np.log(n)) * rad.mean())
