"""Command-line front end: ``itermeans <command> [flags]``.

Every command builds its generators from DSL strings, runs one library
operation and writes a report as JSON (default), CSV or text.  Exit codes:
0 when the verdict holds, 1 when it does not, 2 for input errors (parse,
monotonicity, domain, generator class, configuration) and 3 for numeric
failures (non-convergence, divergence, out-of-range inversion).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import dynamics, iterprod, means, verify
from .errors import (
    DivergenceError,
    DomainError,
    GeneratorClassError,
    MonotonicityError,
    NoConvergence,
    ParseError,
    RangeError,
)
from .monofunc import DEFAULT_TOL, UNIT_RAY, Interval, MonotoneFn, compose, from_text

__all__ = ["main", "build_parser", "dumps_report", "ConfigError"]

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_GRID_N = 33
DEFAULT_GRID_HI = 100.0
OPS = ("C", "D", "G", "A", "Cg", "Cr", "Gf", "Af")
CHECK_OPS = OPS + ("invariantC",)
PAIRS = ("theorem5", "corollary2", "iterative")
FUNC_FLAGS = ("f", "g", "h", "r", "phi", "psi", "fbar", "gbar")
OPTION_KEYS = ("op", "kind", "pair", "lo", "hi", "resolution")
KNOWN_KEYS = frozenset(FUNC_FLAGS + OPTION_KEYS + (
    "command", "domain", "grid", "spacing", "at", "tol", "max_terms", "max_n", "format", "out"))


class ConfigError(ValueError):
    """Malformed flags or configuration file."""


# ---------------------------------------------------------------------------
# serialization


def _canon(obj: Any) -> Any:
    """Round floats to 12 significant digits; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "nan" if v != v else ("inf" if v > 0 else "-inf")
        return float(f"{v:.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """Canonical JSON: sorted keys, floats at ``%.12g`` precision."""
    return json.dumps(_canon(report), sort_keys=True, indent=2) + "\n"


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _values_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = report.get("columns")
    if columns:
        writer.writerow(columns)
    for row in report.get("values", []):
        writer.writerow([_fmt(v) for v in (row if isinstance(row, (list, tuple)) else [row])])
    return buf.getvalue()


def _text(report: dict) -> str:
    lines = [f"command: {report['command']}", f"verdict: {report['verdict']}"]
    res = report.get("residuals") or {}
    if res.get("max") is not None:
        lines.append(f"max residual: {_fmt(res.get('max'))} at {json.dumps(_canon(res.get('argmax')))}")
    for key, val in sorted((report.get("details") or {}).items()):
        lines.append(f"{key}: {_fmt(val) if not isinstance(val, (list, dict)) else json.dumps(_canon(val))}")
    if report.get("values"):
        lines.append(_values_csv(report).rstrip("\n"))
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps_report(report)
    if fmt == "csv":
        return _values_csv(report)
    return _text(report)


# ---------------------------------------------------------------------------
# argument plumbing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in FUNC_FLAGS:
        common.add_argument(f"--{name}", metavar="EXPR", help=f"generator {name}(x) in the expression language")
    common.add_argument("--domain", help='interval such as "1,inf" or "(-50,50)" (default 1,inf)')
    common.add_argument("--grid", metavar="LO:HI:N", help="grid points (default 33 geometric points in [1+1e-9, 100])")
    common.add_argument("--spacing", choices=("linear", "geometric"))
    common.add_argument("--at", metavar="X,Y", help="single point instead of the grid")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-terms", type=int, dest="max_terms")
    common.add_argument("--max-n", type=int, dest="max_n")
    common.add_argument("--format", choices=("json", "csv", "text"), dest="format")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--config", metavar="JSON", help="JSON file of flag values; flags win on conflict")

    parser = argparse.ArgumentParser(prog="itermeans", description="Iterative means and composition operations.")
    parser.add_argument("--config", metavar="JSON", help="run entirely from a JSON file that names the command")
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("eval", parents=[common], help="evaluate an operation")
    p.add_argument("--op", choices=OPS)
    p = sub.add_parser("mean-check", parents=[common], help="check reflexivity and internality")
    p.add_argument("--op", choices=CHECK_OPS)
    p = sub.add_parser("iterate", parents=[common], help="iterate a mean-type mapping (CSV trace)")
    p.add_argument("--pair", choices=PAIRS)
    p = sub.add_parser("invariance", parents=[common], help="invariance residual of an operation under a pair")
    p.add_argument("--pair", choices=PAIRS)
    p.add_argument("--op", choices=CHECK_OPS + ("limit",))
    sub.add_parser("eq11", parents=[common], help="composite functional equation residual for --h")
    p = sub.add_parser("equality", parents=[common], help="decide equality of two operations")
    p.add_argument("--kind", choices=("C", "D", "G", "A"))
    sub.add_parser("product", parents=[common], help="convergence of the product of inverse iterates of --g")
    p = sub.add_parser("remark5", parents=[common], help="minimum residual of the derivative system at 1")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--resolution", type=int)
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    funcs = config.pop("functions", {})
    if not isinstance(funcs, dict):
        raise ConfigError("config 'functions' must map names to expressions")
    config.update(funcs)
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest == "config":
            continue
        if dest not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, dest, None) is None:
            setattr(args, dest, value)
    return args


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ConfigError(f"{args.command} needs " + ", ".join(f"--{n.replace('_', '-')}" for n in missing))


def _domain(args) -> Interval:
    if args.domain is None:
        return UNIT_RAY
    if isinstance(args.domain, (list, tuple)):
        return Interval(float(args.domain[0]), float(args.domain[1]))
    try:
        return Interval.parse(str(args.domain))
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad --domain {args.domain!r}: {exc}") from exc


def _fn(args, name: str, domain: Interval | None = None) -> MonotoneFn:
    _need(args, name)
    return from_text(str(args.__dict__[name]), domain or _domain(args), label=str(args.__dict__[name]))


def _points(args, domain: Interval) -> list[float]:
    spec = args.grid
    if spec is None:
        if domain == UNIT_RAY:
            return list(np.geomspace(1 + 1e-9, DEFAULT_GRID_HI, DEFAULT_GRID_N))
        return domain.grid(DEFAULT_GRID_N)
    try:
        if isinstance(spec, dict):
            lo, hi, n = float(spec["lo"]), float(spec["hi"]), int(spec["n"])
        else:
            lo_s, hi_s, n_s = str(spec).split(":")
            lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad --grid {spec!r}; expected LO:HI:N") from exc
    if n < 1:
        raise ConfigError("grid count must be at least 1")
    spacing = args.spacing or ("geometric" if lo > 0 else "linear")
    if n == 1:
        return [lo]
    if spacing == "geometric":
        if lo <= 0:
            raise ConfigError("geometric spacing needs lo > 0")
        return list(np.geomspace(lo, hi, n))
    return list(np.linspace(lo, hi, n))


def _point(args) -> tuple[float, float] | None:
    if args.at is None:
        return None
    try:
        if isinstance(args.at, (list, tuple)):
            x, y = args.at
        else:
            x, y = str(args.at).split(",")
        return float(x), float(y)
    except ValueError as exc:
        raise ConfigError(f"bad --at {args.at!r}; expected X,Y") from exc


def _pairs(args, domain: Interval) -> list[tuple[float, float]]:
    at = _point(args)
    if at is not None:
        return [at]
    return verify.pair_grid(_points(args, domain))


def _tol(args, default: float) -> float:
    return default if args.tol is None else float(args.tol)


def _max_terms(args) -> int:
    return iterprod.MAX_TERMS if args.max_terms is None else int(args.max_terms)


def _grid_info(args, grid) -> dict:
    return {"spec": args.grid, "spacing": args.spacing, "size": len(grid)}


def _inputs(args) -> dict:
    keep = FUNC_FLAGS + ("op", "kind", "pair", "domain", "at", "tol", "max_terms", "max_n", "lo", "hi", "resolution")
    return {k: getattr(args, k) for k in keep if getattr(args, k, None) is not None}


# ---------------------------------------------------------------------------
# operation builders


def _invariant_C(args, max_terms: int) -> means.BivarOp:
    """``C_{f o g, g o h}`` with ``(f, g)`` built from ``h`` by nested products."""
    h = _fn(args, "h", UNIT_RAY)
    f, g = verify.theorem4_construct(h, DEFAULT_TOL, max_terms)
    return means.make_C(compose(f, g), compose(g, h)).relabel(f"invariantC[{h.label}]", "invariantC")


def _build_op(args, op: str) -> means.BivarOp:
    max_terms = _max_terms(args)
    if op == "C":
        return means.make_C(_fn(args, "f"), _fn(args, "g"))
    if op == "D":
        return means.make_D(_fn(args, "f"), _fn(args, "g"))
    if op == "G":
        return means.make_G(_fn(args, "f"), _fn(args, "g"))
    if op == "A":
        a = "phi" if args.phi is not None else "f"
        b = "psi" if args.psi is not None else "g"
        return means.make_A(_fn(args, a), _fn(args, b))
    if op == "Cg":
        return iterprod.iterative_mean(_fn(args, "g", UNIT_RAY), max_terms=max_terms)
    if op == "Cr":
        return iterprod.product_iterative_mean(_fn(args, "r", UNIT_RAY), max_terms=max_terms)
    if op == "Gf":
        return means.quasi_geometric(_fn(args, "f"))
    if op == "Af":
        return means.quasi_arithmetic(_fn(args, "f"))
    if op == "invariantC":
        return _invariant_C(args, max_terms)
    raise ConfigError(f"unknown operation {op!r}")


def _build_pair(args) -> means.MeanPair:
    _need(args, "pair")
    if args.pair == "theorem5":
        return means.theorem5_MN(_fn(args, "f"), _fn(args, "g"))
    if args.pair == "corollary2":
        return means.corollary2_MN(_fn(args, "f"), _fn(args, "g"))
    if args.pair == "iterative":
        max_terms = _max_terms(args)
        return means.MeanPair(
            iterprod.iterative_mean(_fn(args, "g", UNIT_RAY), max_terms=max_terms),
            iterprod.iterative_mean(_fn(args, "h", UNIT_RAY), max_terms=max_terms),
        )
    raise ConfigError(f"unknown pair {args.pair!r}")


# ---------------------------------------------------------------------------
# commands; each returns (report, exit code)


def _report(args, verdict, *, grid=None, residual=None, argmax=None, values=None, columns=None, details=None):
    return {
        "command": args.command,
        "inputs": _inputs(args),
        "verdict": verdict,
        "residuals": {"max": residual, "argmax": list(argmax) if argmax is not None else None},
        "grid": _grid_info(args, grid if grid is not None else []),
        "values": values or [],
        "columns": columns or [],
        "details": details or {},
    }


def cmd_eval(args):
    _need(args, "op")
    op = _build_op(args, args.op)
    grid = _pairs(args, op.domain)
    values = [[x, y, op(x, y)] for x, y in grid]
    return _report(args, True, grid=grid, values=values, columns=["x", "y", "value"],
                   details={"label": op.label}), EXIT_OK


def cmd_mean_check(args):
    _need(args, "op")
    op = _build_op(args, args.op)
    grid = _pairs(args, op.domain)
    rep = verify.check_mean(op, grid, _tol(args, verify.MEAN_TOL))
    details = {
        "label": op.label,
        "mean": rep.is_mean,
        "reflexive": rep.reflexive,
        "internal": rep.internal,
        "strict": rep.strict,
        "symmetric": rep.symmetric,
        "max_reflexivity_residual": rep.max_reflexivity_residual,
        "internality_witness": list(rep.internality_witness) if rep.internality_witness else None,
        "grid_size": rep.grid_size,
    }
    argmax = rep.internality_witness[:2] if rep.internality_witness else None
    return (_report(args, rep.is_mean, grid=grid, residual=rep.max_reflexivity_residual, argmax=argmax,
                    details=details), EXIT_OK if rep.is_mean else EXIT_FALSE)


def cmd_iterate(args):
    pair = _build_pair(args)
    _need(args, "at")
    x0, y0 = _point(args)
    max_n = dynamics.MAX_N if args.max_n is None else int(args.max_n)
    trace = dynamics.iterate_mapping(pair, x0, y0, _tol(args, dynamics.ITER_TOL), max_n)
    values = [list(row) for row in trace.rows()]
    details = {"converged": trace.converged, "iterations": trace.iterations,
               "limit": list(trace.limit) if trace.limit else None}
    report = _report(args, trace.converged, grid=[(x0, y0)], residual=trace.gap_history[-1],
                     values=values, columns=["n", "x", "y", "gap"], details=details)
    return report, EXIT_OK if trace.converged else EXIT_NUMERIC


def cmd_invariance(args):
    pair = _build_pair(args)
    _need(args, "op")
    max_n = dynamics.MAX_N if args.max_n is None else int(args.max_n)
    if args.op == "limit":
        K = dynamics.limit_mean(pair, max_n=max_n)
    else:
        K = _build_op(args, args.op)
    grid = _pairs(args, pair.domain)
    rep = dynamics.invariance_residual(K, pair, grid, _tol(args, dynamics.INVARIANCE_TOL))
    return (_report(args, rep.invariant, grid=grid, residual=rep.max_residual, argmax=rep.argmax,
                    details={"label": K.label}), EXIT_OK if rep.invariant else EXIT_FALSE)


def cmd_eq11(args):
    h = _fn(args, "h", UNIT_RAY)
    pts = [p for p in _points(args, UNIT_RAY)]
    rep = verify.eq11_residual(h, pts, _tol(args, verify.EQUALITY_TOL), max_terms=_max_terms(args))
    gaps = [abs(a - b) / max(abs(a), abs(b)) for a, b in zip(rep.lhs_values, rep.rhs_values)]
    argmax = None
    if gaps:
        i = int(np.argmax(gaps))
        argmax = [rep.grid[i]]
    values = [[x, a, b, gap] for x, a, b, gap in zip(rep.grid, rep.lhs_values, rep.rhs_values, gaps)]
    return (_report(args, rep.satisfied, grid=pts, residual=rep.max_relative_gap, argmax=argmax, values=values,
                    columns=["x", "lhs", "rhs", "gap"], details={"satisfied": rep.satisfied}),
            EXIT_OK if rep.satisfied else EXIT_FALSE)


def cmd_equality(args):
    _need(args, "kind")
    tol = _tol(args, verify.EQUALITY_TOL)
    kind = args.kind
    if kind == "A":
        a = "phi" if args.phi is not None else "f"
        b = "psi" if args.psi is not None else "g"
        base = (_fn(args, a), _fn(args, b))
    else:
        base = (_fn(args, "f"), _fn(args, "g"))
    if kind == "C":
        other = (_fn(args, "phi"), _fn(args, "psi"))
    else:
        other = (_fn(args, "fbar"), _fn(args, "gbar"))
    grid = _pairs(args, base[0].domain) if (args.grid is not None or args.at is not None) else None
    decide = {"C": verify.equality_C, "D": verify.equality_D, "G": verify.equality_G, "A": verify.equality_A}[kind]
    rep = decide(*base, *other, grid=grid, tol=tol)
    details = {"equal": rep.equal, "fitted_params": rep.fitted_params, "structural_match": rep.structural_match,
               "structural_residual": rep.structural_residual, "anomaly": rep.anomaly, "note": rep.note}
    used = grid if grid is not None else verify.default_pair_grid(base[0].domain)
    return (_report(args, rep.equal, grid=used, residual=rep.max_residual, argmax=rep.argmax, details=details),
            EXIT_OK if rep.equal else EXIT_FALSE)


def cmd_product(args):
    g = _fn(args, "g", UNIT_RAY)
    pts = _points(args, UNIT_RAY)
    rep = iterprod.convergence_report(g, pts, _tol(args, DEFAULT_TOL), _max_terms(args))
    values = []
    for x in pts:
        ev = iterprod.evaluate_product(g.invert, x, rep.tol, _max_terms(args))
        values.append([x, ev.value, ev.terms, ev.tail_bound, ev.converged])
    details = {"converged": rep.converged, "terms_used": rep.terms_used, "max_tail_bound": rep.max_tail_bound,
               "divergence_witness": rep.divergence_witness}
    argmax = [rep.divergence_witness] if rep.divergence_witness is not None else None
    return (_report(args, rep.converged, grid=pts, residual=rep.max_tail_bound, argmax=argmax, values=values,
                    columns=["x", "value", "terms", "tail_bound", "converged"], details=details),
            EXIT_OK if rep.converged else EXIT_FALSE)


def cmd_remark5(args):
    lo = 1.0 if args.lo is None else float(args.lo)
    hi = 10.0 if args.hi is None else float(args.hi)
    res = 100 if args.resolution is None else int(args.resolution)
    try:
        out = verify.remark5_search(lo, hi, res)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bounded = out.min_norm > 0.1
    details = {"min_norm": out.min_norm, "argmin": list(out.argmin), "grid_min_norm": out.grid_min_norm,
               "residual_at_argmin": list(verify.remark5_residual(*out.argmin))}
    return (_report(args, bounded, residual=out.min_norm, argmax=out.argmin, details=details),
            EXIT_OK if bounded else EXIT_FALSE)


COMMANDS = {
    "eval": cmd_eval,
    "mean-check": cmd_mean_check,
    "iterate": cmd_iterate,
    "invariance": cmd_invariance,
    "eq11": cmd_eq11,
    "equality": cmd_equality,
    "product": cmd_product,
    "remark5": cmd_remark5,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in KNOWN_KEYS:
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        args = _merge_config(args)
        if args.command not in COMMANDS:
            raise ConfigError("a command is required: " + ", ".join(COMMANDS))
        report, code = COMMANDS[args.command](args)
    except (ParseError, MonotonicityError, DomainError, GeneratorClassError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoConvergence, DivergenceError, RangeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    fmt = args.format or ("csv" if args.command == "iterate" else "json")
    text = render(report, fmt)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
