"""Monte Carlo coverage and proportion-of-coverage experiments.

Replication ``r`` of an experiment draws its data and its weights from child
streams keyed by ``(master_seed, *stream_key, *rep_key, purpose)``.
Replications are processed in fixed-size chunks whose composition never
depends on the worker count, so results are bit-identical for any number of
threads.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .acvf import bandwidth_q, sample_acvfs
from .errors import NumericError, ParameterDomainError
from .intervals import z_quantile
from .memory import default_m, local_whittle_batch
from .pivots import g_n_stu_batch, t_n_stu_batch, t_star_batch, t_star_stu_batch
from .process import ProcessSpec, simulate_batch, theoretical_acvf_seq
from .rng import DATA, WEIGHTS, child_stream
from .weights import counts_from_indices

log = logging.getLogger(__name__)

PIVOTS = ("GStu", "TStu", "TStar", "TStarStu")
CHUNK = 64
MAX_WEIGHT_DRAWS = 100
PROPORTION_BAND = 0.01


class DMode(str, enum.Enum):
    KNOWN_ZERO = "known-zero"
    KNOWN_D = "known-d"
    ESTIMATED = "estimate"


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ProcessSpec
    n: int
    reps: int = 1000
    nominal: float = 0.95
    d_mode: DMode = DMode.KNOWN_ZERO
    q_override: int | None = None
    pivots: tuple[str, ...] = ("GStu", "TStu")
    master_seed: int = 0
    outer_reps: int | None = None
    stream_key: tuple[int, ...] = ()
    whittle_m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "d_mode", DMode(self.d_mode))
        object.__setattr__(self, "pivots", tuple(self.pivots))
        if self.n < 8:
            raise ParameterDomainError("experiments need n >= 8")
        if self.reps < 1:
            raise ParameterDomainError("reps must be at least 1")
        if self.outer_reps is not None and self.outer_reps < 1:
            raise ParameterDomainError("outer_reps must be at least 1")
        if not 0.0 < self.nominal < 1.0:
            raise ParameterDomainError("nominal level must lie in (0, 1)")
        unknown = set(self.pivots) - set(PIVOTS)
        if unknown or not self.pivots:
            raise ParameterDomainError(f"pivots must be a nonempty subset of {PIVOTS}")
        if self.d_mode is DMode.KNOWN_D and not self.spec.long_memory:
            raise ParameterDomainError("known-d mode needs a long-memory (farima) spec")
        if self.q_override is not None and not 1 <= self.q_override <= self.n - 1:
            raise ParameterDomainError(f"q must lie in [1, {self.n - 1}]")


@dataclass
class CoverageResult:
    coverage: dict[str, float]
    stderr: dict[str, float]
    valid: dict[str, int]
    nonpositive_rate: dict[str, float]
    degenerate_rate: float
    failed_reps: int
    q_values: tuple[int, ...]
    mean_d: float
    wall_time: float
    seed_lineage: dict = field(default_factory=dict)


@dataclass
class ProportionResult:
    prop: dict[str, float]
    stderr: dict[str, float]
    coverages: dict[str, np.ndarray]
    nonpositive_rate: dict[str, float]
    degenerate_rate: float
    failed_reps: int
    q_values: tuple[int, ...]
    mean_d: float
    wall_time: float
    seed_lineage: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# replication kernel


def _draw_nondegenerate(n: int, rng: np.random.Generator):
    """Redraw until some count differs from one; returns (weights, draws used)."""
    for attempt in range(1, MAX_WEIGHT_DRAWS + 1):
        w = counts_from_indices(rng.integers(0, n, size=n), n)
        if np.any(w != 1):
            return w, attempt
    return None, MAX_WEIGHT_DRAWS


def _estimate_d(cfg: ExperimentConfig, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row d-hat and a success mask."""
    m = cfg.whittle_m or default_m(cfg.n)
    try:
        return local_whittle_batch(X, m), np.ones(X.shape[0], bool)
    except NumericError:
        out = np.zeros(X.shape[0])
        ok = np.ones(X.shape[0], bool)
        for i, row in enumerate(X):
            try:
                out[i] = local_whittle_batch(row[None, :], m)[0]
            except NumericError:
                ok[i] = False
        return out, ok


def _run_chunk(cfg: ExperimentConfig, keys: np.ndarray) -> dict:
    n = cfg.n
    B = keys.shape[0]
    base = (cfg.master_seed, *cfg.stream_key)
    X = simulate_batch(cfg.spec, n, [child_stream(*base, *k, DATA) for k in keys])

    W = np.ones((B, n), dtype=np.int64)
    accepted = np.ones(B, bool)
    draws = np.zeros(B, dtype=np.int64)
    for i, k in enumerate(keys):
        w, used = _draw_nondegenerate(n, child_stream(*base, *k, WEIGHTS))
        draws[i] = used
        if w is None:
            accepted[i] = False
        else:
            W[i] = w
    ok = accepted.copy()

    if cfg.d_mode is DMode.KNOWN_ZERO:
        d = np.zeros(B)
    elif cfg.d_mode is DMode.KNOWN_D:
        d = np.full(B, cfg.spec.memory)
    else:
        d, d_ok = _estimate_d(cfg, X)
        ok &= d_ok
    if cfg.q_override is not None:
        q = np.full(B, cfg.q_override, dtype=np.int64)
    else:
        q = np.array([bandwidth_q(n, float(di)) for di in d], dtype=np.int64)

    gammas = sample_acvfs(X, int(q.max()))
    mu = cfg.spec.mu
    values = {}
    with np.errstate(all="ignore"):
        for p in cfg.pivots:
            if p == "GStu":
                v = g_n_stu_batch(X, W, q, d, mu, gammas)
            elif p == "TStu":
                v = t_n_stu_batch(X, q, d, mu, gammas)
            elif p == "TStar":
                v = t_star_batch(X, W, theoretical_acvf_seq(cfg.spec, n))
            else:
                v = t_star_stu_batch(X, W, gammas)
            v = np.where(ok & np.isfinite(v), v, np.nan)
            values[p] = v
    return {
        "values": values,
        "ok": ok,
        "accepted": accepted,
        "draws": draws,
        "q": q,
        "d": d,
    }


def _run_reps(cfg: ExperimentConfig, keys: np.ndarray, threads: int = 1) -> dict:
    chunks = [keys[i : i + CHUNK] for i in range(0, keys.shape[0], CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda k: _run_chunk(cfg, k), chunks))
    else:
        parts = [_run_chunk(cfg, k) for k in chunks]
    return {
        "values": {p: np.concatenate([r["values"][p] for r in parts]) for p in cfg.pivots},
        "ok": np.concatenate([r["ok"] for r in parts]),
        "accepted": np.concatenate([r["accepted"] for r in parts]),
        "draws": np.concatenate([r["draws"] for r in parts]),
        "q": np.concatenate([r["q"] for r in parts]),
        "d": np.concatenate([r["d"] for r in parts]),
    }


def _critical(nominal: float) -> float:
    return z_quantile(1.0 - (1.0 - nominal) / 2.0)


def _summaries(out: dict, nominal: float):
    """Shared rates: degenerate-draw rate, failed reps, q set, mean d, nonpositive rates."""
    ok = out["ok"]
    total_draws = int(out["draws"].sum())
    # every draw except an accepted one was degenerate
    degenerate = total_draws - int(out["accepted"].sum())
    reps = ok.size
    nonpos = {p: float(np.count_nonzero(ok & np.isnan(v))) / reps for p, v in out["values"].items()}
    return {
        "degenerate_rate": degenerate / total_draws if total_draws else 0.0,
        "failed_reps": int(reps - ok.sum()),
        "q_values": tuple(sorted(set(int(x) for x in out["q"]))),
        "mean_d": float(out["d"].mean()),
        "nonpositive_rate": nonpos,
    }


# ---------------------------------------------------------------------------
# experiments


def coverage_experiment(cfg: ExperimentConfig, threads: int = 1) -> CoverageResult:
    """Empirical coverage of |pivot| <= z_{(1+nominal)/2} over ``cfg.reps`` replications.

    Replications whose Studentizer is nonpositive are left out of the
    denominator and reported through ``nonpositive_rate``.
    """
    start = time.perf_counter()
    keys = np.arange(cfg.reps, dtype=np.int64)[:, None]
    out = _run_reps(cfg, keys, threads)
    z = _critical(cfg.nominal)
    coverage, stderr, valid = {}, {}, {}
    for p, v in out["values"].items():
        finite = np.isfinite(v)
        k = int(finite.sum())
        hits = int(np.count_nonzero(np.abs(v[finite]) <= z))
        cov = hits / k if k else float("nan")
        coverage[p] = cov
        valid[p] = k
        stderr[p] = math.sqrt(cov * (1.0 - cov) / k) if k else float("nan")
    return CoverageResult(
        coverage=coverage,
        stderr=stderr,
        valid=valid,
        wall_time=time.perf_counter() - start,
        seed_lineage={"master_seed": cfg.master_seed, "stream_key": cfg.stream_key},
        **_summaries(out, cfg.nominal),
    )


def proportion_experiment(cfg: ExperimentConfig, threads: int = 1) -> ProportionResult:
    """Fraction of ``outer_reps`` coverage estimates (each over ``reps`` replications)
    lying within 0.01 of the nominal level."""
    if cfg.outer_reps is None:
        raise ParameterDomainError("proportion experiments need outer_reps")
    start = time.perf_counter()
    outer, inner = cfg.outer_reps, cfg.reps
    grid = np.indices((outer, inner)).reshape(2, -1).T.astype(np.int64)
    out = _run_reps(cfg, grid, threads)
    z = _critical(cfg.nominal)
    prop, stderr, coverages = {}, {}, {}
    for p, v in out["values"].items():
        v = v.reshape(outer, inner)
        finite = np.isfinite(v)
        k = finite.sum(axis=1)
        hits = np.count_nonzero(finite & (np.abs(np.where(finite, v, 0.0)) <= z), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cov = np.where(k > 0, hits / np.maximum(k, 1), np.nan)
        # |hits/k - nominal| <= band, compared in counts to dodge float ties
        close = (k > 0) & (np.abs(hits - cfg.nominal * k) <= PROPORTION_BAND * k + 1e-9)
        coverages[p] = cov
        prop[p] = float(close.mean())
        stderr[p] = math.sqrt(prop[p] * (1.0 - prop[p]) / outer)
    return ProportionResult(
        prop=prop,
        stderr=stderr,
        coverages=coverages,
        wall_time=time.perf_counter() - start,
        seed_lineage={"master_seed": cfg.master_seed, "stream_key": cfg.stream_key},
        **_summaries(out, cfg.nominal),
    )


# ---------------------------------------------------------------------------
# the twelve tables


@dataclass(frozen=True)
class TableDef:
    kind: str  # "coverage" or "proportion"
    spec: ProcessSpec
    ns: tuple[int, ...]
    d_mode: DMode


_G = "gaussian"
_L = "lognormal"

TABLES: dict[int, TableDef] = {
    1: TableDef("coverage", ProcessSpec.ma1(-0.5, innovations=_G), (20, 30), DMode.KNOWN_ZERO),
    2: TableDef("coverage", ProcessSpec.ar1(0.5, innovations=_G), (20, 30), DMode.KNOWN_ZERO),
    3: TableDef("coverage", ProcessSpec.farima(0.2, innovations=_G), (30, 50), DMode.KNOWN_D),
    4: TableDef("coverage", ProcessSpec.farima(0.2, innovations=_G), (200, 300), DMode.ESTIMATED),
    5: TableDef("coverage", ProcessSpec.farima(0.4, innovations=_G), (300, 400), DMode.KNOWN_D),
    6: TableDef("coverage", ProcessSpec.farima(0.4, innovations=_G), (500, 1000), DMode.ESTIMATED),
    7: TableDef("proportion", ProcessSpec.ma1(-0.5, innovations=_L), (20, 30), DMode.KNOWN_ZERO),
    8: TableDef("proportion", ProcessSpec.ar1(0.5, innovations=_L), (70, 80), DMode.KNOWN_ZERO),
    9: TableDef("proportion", ProcessSpec.farima(0.2, innovations=_L), (150, 250), DMode.KNOWN_D),
    10: TableDef("proportion", ProcessSpec.farima(0.2, innovations=_L), (400, 500), DMode.ESTIMATED),
    11: TableDef("proportion", ProcessSpec.farima(0.4, innovations=_L), (300, 400), DMode.KNOWN_D),
    12: TableDef("proportion", ProcessSpec.farima(0.4, innovations=_L), (1500, 2000), DMode.ESTIMATED),
}

COVERAGE_REPS = 1000
PROPORTION_REPS = 500

CSV_COLUMNS = (
    "table",
    "model",
    "innovation",
    "n",
    "q",
    "d_mode",
    "pivot",
    "value",
    "stderr",
    "degenerate_rate",
    "nonpositive_rate",
    "seed",
)


def table_configs(
    table_id: int,
    master_seed: int,
    scale: float = 1.0,
    reps: int | None = None,
    outer_reps: int | None = None,
    q_override: int | None = None,
    ns: tuple[int, ...] | None = None,
) -> list[ExperimentConfig]:
    """One ExperimentConfig per sample size of the named table."""
    if table_id not in TABLES:
        raise ParameterDomainError(f"unknown table {table_id}; expected 1..12")
    t = TABLES[table_id]
    if scale <= 0:
        raise ParameterDomainError("scale must be positive")
    if t.kind == "coverage":
        inner = reps or max(1, round(COVERAGE_REPS * scale))
        outer = None
    else:
        inner = reps or max(1, round(PROPORTION_REPS * scale))
        outer = outer_reps or max(1, round(PROPORTION_REPS * scale))
    return [
        ExperimentConfig(
            spec=t.spec,
            n=n,
            reps=inner,
            d_mode=t.d_mode,
            q_override=q_override,
            pivots=("GStu", "TStu"),
            master_seed=master_seed,
            outer_reps=outer,
            stream_key=(table_id, cell),
        )
        for cell, n in enumerate(ns or t.ns)
    ]


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.6f}"


def run_table(
    table_id: int,
    master_seed: int,
    scale: float = 1.0,
    threads: int = 1,
    **overrides,
) -> list[dict]:
    """Run every cell of a table; one row per (n, pivot)."""
    rows = []
    for cfg in table_configs(table_id, master_seed, scale, **overrides):
        t = TABLES[table_id]
        if t.kind == "coverage":
            res = coverage_experiment(cfg, threads)
            value, err = res.coverage, res.stderr
        else:
            res = proportion_experiment(cfg, threads)
            value, err = res.prop, res.stderr
        log.info("table %d n=%d done in %.1fs", table_id, cfg.n, res.wall_time)
        q = str(res.q_values[0]) if len(res.q_values) == 1 else "adaptive"
        for p in cfg.pivots:
            rows.append(
                {
                    "table": table_id,
                    "model": cfg.spec.describe(),
                    "innovation": cfg.spec.innovations.value,
                    "n": cfg.n,
                    "q": q,
                    "d_mode": cfg.d_mode.value,
                    "pivot": p,
                    "value": _fmt(value[p]),
                    "stderr": _fmt(err[p]),
                    "degenerate_rate": _fmt(res.degenerate_rate),
                    "nonpositive_rate": _fmt(res.nonpositive_rate[p]),
                    "seed": cfg.master_seed,
                }
            )
    return rows


def format_csv(rows: list[dict], header: dict | None = None) -> str:
    """CSV text with an optional ``# key=value`` comment header."""
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
