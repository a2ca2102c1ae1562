"""Iteration of mean-type mappings and invariance checks.

A mean-type mapping ``(M, N)`` is iterated until its coordinates meet; the
common limit ``K`` (the Gauss composition) is the invariant mean, and every
invariant function is of the form ``phi o K``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import DomainError, IterMeansError, NoConvergence
from .means import BivarOp, MeanPair

__all__ = [
    "IterationTrace",
    "InvarianceReport",
    "ITER_TOL",
    "MAX_N",
    "iterate_mapping",
    "invariance_residual",
    "limit_mean",
    "invariant_function",
    "check_invariant_function",
]

ITER_TOL = 1e-10
MAX_N = 200
INVARIANCE_TOL = 1e-7


@dataclass
class IterationTrace:
    points: list[tuple[float, float]]
    converged: bool
    iterations: int
    limit: tuple[float, float] | None
    gap_history: list[float]

    def rows(self):
        """``(n, x, y, gap)`` per recorded point."""
        for n, ((x, y), gap) in enumerate(zip(self.points, self.gap_history)):
            yield n, x, y, gap


@dataclass
class InvarianceReport:
    grid: list[tuple[float, float]]
    max_residual: float
    invariant: bool
    argmax: tuple[float, float] | None = None
    tol: float = INVARIANCE_TOL


def _met(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x))


def iterate_mapping(pair: MeanPair, x0: float, y0: float, tol: float = ITER_TOL,
                    max_n: int = MAX_N) -> IterationTrace:
    """Iterate ``(x, y) <- (M(x, y), N(x, y))`` from ``(x0, y0)``.

    Stops once ``|x - y| <= tol * max(1, |x|)``; the limit is the midpoint of
    the final pair.  Non-convergence (including an evaluation failure) is
    reported in the trace rather than raised.
    """
    x, y = float(x0), float(y0)
    points = [(x, y)]
    gaps = [abs(x - y)]
    n = 0
    while not _met(x, y, tol):
        if n >= max_n:
            return IterationTrace(points, False, n, None, gaps)
        try:
            x, y = pair(x, y)
        except (IterMeansError, ValueError, ArithmeticError):
            return IterationTrace(points, False, n, None, gaps)
        n += 1
        points.append((x, y))
        gaps.append(abs(x - y))
        if not (math.isfinite(x) and math.isfinite(y)):
            return IterationTrace(points, False, n, None, gaps)
    mid = 0.5 * (x + y)
    return IterationTrace(points, True, n, (mid, mid), gaps)


def _relative(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _residual_report(phi: Callable[[float, float], float], pair: MeanPair,
                     grid: Iterable[tuple[float, float]], tol: float) -> InvarianceReport:
    grid = [(float(x), float(y)) for x, y in grid]
    worst, where = 0.0, None
    for x, y in grid:
        try:
            m, n = pair(x, y)
            r = _relative(phi(m, n), phi(x, y))
        except (IterMeansError, ValueError, ArithmeticError):
            r = math.inf
        if not r <= worst:
            worst, where = r, (x, y)
    return InvarianceReport(grid, worst, worst <= tol, where, tol)


def invariance_residual(K: BivarOp, pair: MeanPair, grid: Iterable[tuple[float, float]],
                        tol: float = INVARIANCE_TOL) -> InvarianceReport:
    """Max relative ``|K(M(x,y), N(x,y)) - K(x,y)|`` over ``grid``."""
    return _residual_report(K, pair, grid, tol)


def check_invariant_function(Phi: BivarOp | Callable[[float, float], float], pair: MeanPair,
                             grid: Iterable[tuple[float, float]],
                             tol: float = INVARIANCE_TOL) -> InvarianceReport:
    """Same residual as :func:`invariance_residual` for an arbitrary ``Phi``."""
    return _residual_report(Phi, pair, grid, tol)


def _key(v: float) -> float:
    return float(f"{v:.12g}")


def limit_mean(pair: MeanPair, grid: Iterable[tuple[float, float]] | None = None,
               tol: float = ITER_TOL, max_n: int = MAX_N) -> BivarOp:
    """The Gauss composition of ``pair`` as an operation evaluated on demand.

    When ``grid`` is given, both coordinates are first checked to be means on
    it.  Results are memoized on inputs rounded to 12 significant digits;
    points that do not converge within ``max_n`` raise :class:`NoConvergence`.
    """
    if grid is not None:
        from .verify import check_mean

        grid = list(grid)
        for op in (pair.first, pair.second):
            report = check_mean(op, grid)
            if not report.is_mean:
                raise DomainError(f"{op.label} is not a mean on the sample grid")

    cache: dict[tuple[float, float], float] = {}
    lock = threading.Lock()

    def op(x, y):
        key = (_key(x), _key(y))
        hit = cache.get(key)
        if hit is not None:
            return hit
        trace = iterate_mapping(pair, x, y, tol, max_n)
        if not trace.converged:
            raise NoConvergence(f"iteration from ({x!r}, {y!r}) did not settle within {max_n} steps")
        value = trace.limit[0]
        with lock:
            cache.setdefault(key, value)
        return value

    return BivarOp(op, pair.domain, f"lim[{pair.first.label},{pair.second.label}]", "limit_mean")


def invariant_function(phi: Callable[[float], float], K: BivarOp, label: str | None = None) -> BivarOp:
    """``Phi = phi o K``; invariant under every pair whose invariant mean is ``K``."""

    def op(x, y):
        t = K(x, y)
        try:
            v = phi(t)
        except (ValueError, ArithmeticError) as exc:
            raise DomainError(f"phi is undefined at K({x!r}, {y!r}) = {t!r}: {exc}") from exc
        if isinstance(v, float) and math.isnan(v):
            raise DomainError(f"phi is undefined at K({x!r}, {y!r}) = {t!r}")
        return v

    name = label or getattr(phi, "label", None) or getattr(phi, "__name__", "phi")
    return BivarOp(op, K.domain, f"{name} o {K.label}", "invariant_function")
