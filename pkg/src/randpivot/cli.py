"""Command-line interface.

Every command accepts ``--config FILE`` (``key=value`` lines, ``#`` comments)
and ``--replay FILE`` (the ``# key=value`` header of an earlier output).
Precedence: built-in defaults < config/replay file < explicit flags.

Exit codes: 0 success, 2 usage or parameter-domain error, 3 numeric or
degenerate failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .acvf import bandwidth_q
from .errors import NumericError, ParameterDomainError
from .harness import (
    PIVOTS,
    TABLES,
    DMode,
    ExperimentConfig,
    coverage_experiment,
    format_csv,
    proportion_experiment,
    run_table,
)
from .intervals import ci_mean, z_quantile
from .memory import local_whittle
from .pivots import g_n_stu, t_n_stu
from .process import ProcessSpec, simulate
from .rng import DATA, WEIGHTS, child_stream, fresh_seed
from .weights import draw_weights, is_degenerate

EXIT_USAGE = 2
EXIT_NUMERIC = 3

# options that change how a run executes but never what it outputs
_NOT_RECORDED = {"command", "config", "replay", "out", "threads", "verbose", "func"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config files


def read_config(path: str, header: bool = False) -> dict[str, str]:
    """Parse ``key=value`` lines.

    With ``header=True`` only leading ``# key=value`` comment lines are read,
    which is the header format written by every output of this tool.
    """
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if header:
                if not line.startswith("#"):
                    break
                line = line[1:].strip()
            elif not line or line.startswith("#"):
                continue
            if "=" not in line:
                if header:
                    continue
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_file_defaults(parser: argparse.ArgumentParser, sub, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--replay")
    known, _ = pre.parse_known_args(argv)
    values = {}
    if known.replay:
        values.update(read_config(known.replay, header=True))
    if known.config:
        values.update(read_config(known.config))
    values.pop("command", None)
    if not values:
        return
    # argparse runs string defaults through each option's type
    for subparser in sub.choices.values():
        supplied = {}
        for action in subparser._actions:
            if action.dest in values:
                supplied[action.dest] = values[action.dest]
                action.required = False
        subparser.set_defaults(**supplied)


def _resolved(args) -> dict:
    out = {"command": args.command}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_RECORDED or v is None:
            continue
        out[k] = ",".join(v) if isinstance(v, (list, tuple)) else v
    return out


# ---------------------------------------------------------------------------
# shared helpers


def _seed(args) -> int:
    if args.seed is None:
        args.seed = fresh_seed()
        print(f"seed={args.seed}", file=sys.stderr)
    return args.seed


def _spec_from_args(args) -> ProcessSpec:
    param = {"ma1": args.theta, "ar1": args.phi, "farima": args.d}[args.model]
    if param is None:
        name = {"ma1": "--theta", "ar1": "--phi", "farima": "--d"}[args.model]
        raise UsageError(f"model {args.model} needs {name}")
    return ProcessSpec(
        model=args.model,
        param=param,
        mu=args.mu,
        innovations=args.innovations,
        truncation_K=args.K,
        burnin=args.burnin,
    )


def _read_series(path: str) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.lstrip().startswith("#")) if r]
    if not rows:
        raise ParameterDomainError(f"{path}: no data")
    col = 0
    try:
        float(rows[0][0])
    except ValueError:
        header = [h.strip() for h in rows[0]]
        col = header.index("x") if "x" in header else 0
        rows = rows[1:]
    try:
        x = np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ParameterDomainError(f"{path}: unreadable value ({exc})") from None
    if not np.all(np.isfinite(x)):
        raise ParameterDomainError(f"{path}: non-finite values")
    return x


def _emit(text: str, out: str | None):
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header(resolved: dict, extra: dict | None = None) -> str:
    lines = [f"# randpivot {__version__}"]
    lines += [f"# {k}={v}" for k, v in resolved.items()]
    lines += [f"# {k}={v}" for k, v in (extra or {}).items()]
    return "\n".join(lines) + "\n"


def _weights_for(n: int, seed: int) -> np.ndarray:
    rng = child_stream(seed, WEIGHTS)
    for _ in range(100):
        w = draw_weights(n, rng)
        if not is_degenerate(w):
            return w
    raise NumericError("degenerate weights after 100 redraws")


def _d_and_q(args, x: np.ndarray) -> tuple[float, int, float | None]:
    """(d used, q used, d-hat or None)."""
    n = x.size
    d_hat = None
    if args.d_mode == "known-zero":
        d = 0.0
    elif args.d_mode == "known-d":
        if args.d is None:
            raise UsageError("--d-mode known-d needs --d")
        d = args.d
        if not 0.0 <= d < 0.5:
            raise ParameterDomainError(f"d must lie in [0, 0.5), got {d}")
    else:
        d_hat = local_whittle(x, args.m).d_hat
        d = d_hat
    q = args.q if args.q is not None else bandwidth_q(n, d)
    return d, q, d_hat


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    spec = _spec_from_args(args)
    seed = _seed(args)
    x = simulate(spec, args.n, child_stream(seed, DATA))
    body = "x\n" + "".join(f"{v!r}\n" for v in x.tolist())
    _emit(_header(_resolved(args)) + body, args.out)
    return 0


def cmd_estimate_d(args) -> int:
    x = _read_series(args.input)
    est = local_whittle(x, args.m)
    body = f"n,m,d_hat\n{x.size},{est.m},{est.d_hat:.6f}\n"
    _emit(_header(_resolved(args)) + body, args.out)
    return 0


def cmd_ci(args) -> int:
    x = _read_series(args.input)
    if x.size < 8:
        raise ParameterDomainError("ci needs at least 8 observations")
    seed = _seed(args)
    w = _weights_for(x.size, seed)
    d, q, d_hat = _d_and_q(args, x)
    iv = ci_mean(x, w, q, d, args.alpha)
    z = z_quantile(1.0 - args.alpha / 2.0)
    extra = {"z": f"{z:.6f}", "q_used": q, "d_used": f"{d:.6f}"}
    body = (
        "lower,upper,level,method,n,q,d,d_hat\n"
        f"{iv.lower:.10g},{iv.upper:.10g},{iv.level:g},{iv.method},{x.size},{q},"
        f"{d:.6f},{'' if d_hat is None else f'{d_hat:.6f}'}\n"
    )
    _emit(_header(_resolved(args), extra) + body, args.out)
    if args.out and args.out != "-":
        print(f"z={z:.6f} q={q} d={d:.6f} interval=[{iv.lower:.6g}, {iv.upper:.6g}]")
    return 0


def cmd_pivot(args) -> int:
    x = _read_series(args.input)
    seed = _seed(args)
    w = _weights_for(x.size, seed)
    d, q, _ = _d_and_q(args, x)
    g = g_n_stu(x, w, q, d, args.mu)
    t = t_n_stu(x, q, d, args.mu)
    body = f"pivot,value\nGStu,{g:.10g}\nTStu,{t:.10g}\n"
    _emit(_header(_resolved(args), {"q_used": q, "d_used": f"{d:.6f}"}) + body, args.out)
    return 0


def _experiment_config(args, outer=None) -> ExperimentConfig:
    return ExperimentConfig(
        spec=_spec_from_args(args),
        n=args.n,
        reps=args.reps,
        nominal=args.nominal,
        d_mode=DMode(args.d_mode),
        q_override=args.q,
        pivots=tuple(args.pivots),
        master_seed=_seed(args),
        outer_reps=outer,
        whittle_m=args.m,
    )


def _single_row(cfg, value, err, res, pivot) -> dict:
    return {
        "table": "",
        "model": cfg.spec.describe(),
        "innovation": cfg.spec.innovations.value,
        "n": cfg.n,
        "q": str(res.q_values[0]) if len(res.q_values) == 1 else "adaptive",
        "d_mode": cfg.d_mode.value,
        "pivot": pivot,
        "value": f"{value[pivot]:.6f}",
        "stderr": f"{err[pivot]:.6f}",
        "degenerate_rate": f"{res.degenerate_rate:.6f}",
        "nonpositive_rate": f"{res.nonpositive_rate[pivot]:.6f}",
        "seed": cfg.master_seed,
    }


def cmd_coverage(args) -> int:
    cfg = _experiment_config(args)
    res = coverage_experiment(cfg, args.threads)
    rows = [_single_row(cfg, res.coverage, res.stderr, res, p) for p in cfg.pivots]
    _emit(format_csv(rows, _resolved(args) | {"z": f"{z_quantile((1 + cfg.nominal) / 2):.6f}"}), args.out)
    print(f"wall_time={res.wall_time:.2f}s", file=sys.stderr)
    return 0


def cmd_proportion(args) -> int:
    cfg = _experiment_config(args, outer=args.outer)
    res = proportion_experiment(cfg, args.threads)
    rows = [_single_row(cfg, res.prop, res.stderr, res, p) for p in cfg.pivots]
    _emit(format_csv(rows, _resolved(args)), args.out)
    print(f"wall_time={res.wall_time:.2f}s", file=sys.stderr)
    return 0


def cmd_reproduce(args) -> int:
    seed = _seed(args)
    start = time.perf_counter()
    overrides = {"reps": args.reps, "outer_reps": args.outer, "q_override": args.q}
    rows = run_table(args.table, seed, args.scale, args.threads, **overrides)
    _emit(format_csv(rows, _resolved(args)), args.out)
    print(f"wall_time={time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def _pivot_list(text: str) -> list[str]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in items if p not in PIVOTS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"pivots must be a subset of {','.join(PIVOTS)}")
    return items


def _add_common(p: argparse.ArgumentParser, seed=True, out=True):
    p.add_argument("--config", help="key=value file supplying defaults")
    p.add_argument("--replay", help="reuse the '# key=value' header of an earlier output")
    if seed:
        p.add_argument("--seed", type=int, help="master seed (default: fresh entropy, printed)")
    if out:
        p.add_argument("--out", "-o", help="output file (default: stdout)")


def _add_model(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=("ma1", "ar1", "farima"), default="ma1")
    p.add_argument("--theta", type=float, help="MA(1) coefficient")
    p.add_argument("--phi", type=float, help="AR(1) coefficient")
    p.add_argument("--d", type=float, help="memory parameter")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--innovations", choices=("gaussian", "lognormal"), default="gaussian")
    p.add_argument("--K", type=int, help="FARIMA truncation (default max(1e4, 50n))")
    p.add_argument("--burnin", type=int, default=1000, help="AR(1) burn-in")


def _add_inference(p: argparse.ArgumentParser):
    p.add_argument("--input", "--in", dest="input", required=True, help="CSV with column 'x'")
    p.add_argument("--d-mode", choices=("known-zero", "known-d", "estimate"), default="known-zero")
    p.add_argument("--d", type=float, help="memory parameter for --d-mode known-d")
    p.add_argument("--q", type=int, help="override the bandwidth rule")
    p.add_argument("--m", type=int, help="local Whittle frequencies (default round(n^0.65))")


def _add_experiment(p: argparse.ArgumentParser, default_reps: int):
    _add_model(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=default_reps)
    p.add_argument("--nominal", type=float, default=0.95)
    p.add_argument("--d-mode", choices=[m.value for m in DMode], default="known-zero")
    p.add_argument("--q", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--pivots", type=_pivot_list, default=["GStu", "TStu"])
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> tuple[argparse.ArgumentParser, argparse._SubParsersAction]:
    parser = argparse.ArgumentParser(
        prog="randpivot",
        description="Randomized pivots for the mean of short- and long-memory series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a series")
    _add_model(p)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate-d", help="local Whittle estimate of d")
    p.add_argument("--input", "--in", dest="input", required=True)
    p.add_argument("--m", type=int)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_estimate_d)

    p = sub.add_parser("ci", help="randomized confidence interval for the mean")
    _add_inference(p)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("pivot", help="evaluate G_stu and T_stu at a hypothesized mean")
    _add_inference(p)
    p.add_argument("--mu", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_pivot)

    p = sub.add_parser("coverage", help="Monte Carlo coverage experiment")
    _add_experiment(p, 1000)
    _add_common(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("proportion", help="proportion-of-coverages experiment")
    _add_experiment(p, 500)
    p.add_argument("--outer", type=int, default=500)
    _add_common(p)
    p.set_defaults(func=cmd_proportion)

    p = sub.add_parser("reproduce", help="rerun one of the twelve tables")
    p.add_argument("--table", type=int, choices=sorted(TABLES), required=True)
    p.add_argument("--scale", type=float, default=1.0, help="multiplies replication counts")
    p.add_argument("--reps", type=int, help="inner replications (overrides --scale)")
    p.add_argument("--outer", type=int, help="outer replications for tables 7-12")
    p.add_argument("--q", type=int)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    _add_common(p)
    p.set_defaults(func=cmd_reproduce)
    return parser, sub


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, sub = build_parser()
    try:
        _apply_file_defaults(parser, sub, argv)
    except (OSError, UsageError) as exc:
        print(f"randpivot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (UsageError, ParameterDomainError, OSError) as exc:
        print(f"randpivot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"randpivot: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
