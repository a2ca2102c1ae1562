"""Infinite products of inverse iterates and the iterative means built from them.

For an increasing bijection ``g`` of ``(1, inf)`` with ``g(x) > x`` the
product ``P(x) = x * g^-1(x) * g^-2(x) * ...`` converges and is the unique
solution with ``P(1+) = 1`` of ``P(g(x)) = P(x) g(x)``.  Plugging ``P`` into
``C_{P,g}`` gives a strict mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DivergenceError, GeneratorClassError, MonotonicityError
from .monofunc import (
    DEFAULT_TOL,
    UNIT_RAY,
    Interval,
    Direction,
    GeneratorClass,
    MonotoneFn,
    classify_generator,
)

__all__ = [
    "ProductEvaluation",
    "ConvergenceReport",
    "IterProduct",
    "MAX_TERMS",
    "TAIL_SAFETY",
    "evaluate_product",
    "product_partial",
    "infinite_product",
    "convergence_report",
    "iterative_mean",
    "product_iterative_mean",
]

MAX_TERMS = 10_000
# the observed-ratio geometric model slightly underestimates tails whose
# ratios creep upwards (all power generators); double it to keep it a bound
TAIL_SAFETY = 2.0


@dataclass(frozen=True)
class ProductEvaluation:
    x: float
    value: float
    terms: int
    tail_bound: float
    converged: bool
    reason: str = ""


@dataclass
class ConvergenceReport:
    converged: bool
    grid: list[float]
    terms_used: list[int]
    max_tail_bound: float
    divergence_witness: float | None = None
    tol: float = DEFAULT_TOL


def _tail_estimate(e: float, rho: float) -> float:
    """Relative tail ``exp(sum_{k>n} e_k) - 1`` for excesses shrinking by ``rho``."""
    if rho >= 1.0:
        return math.inf
    try:
        return math.expm1(TAIL_SAFETY * e * rho / (1.0 - rho))
    except OverflowError:
        return math.inf


def evaluate_product(g_inv, x: float, tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> ProductEvaluation:
    """Truncated ``prod_{k>=0} g^{-k}(x)`` where ``g_inv`` evaluates ``g^-1``.

    Stops at the first ``n`` with ``g^{-n}(x) - 1 <= tol`` and an estimated
    relative tail ``<= tol``.  The tail models the remaining excesses
    ``e_k = g^{-k}(x) - 1`` as geometric with the last observed ratio.
    Never raises; divergence is reported through ``converged=False``.
    """
    if not x > 1:
        return ProductEvaluation(x, math.nan, 0, math.inf, False, "x must exceed 1")
    t = float(x)
    value = t
    e_prev = t - 1.0
    for n in range(1, max_terms + 1):
        try:
            t_next = g_inv(t)
        except (ValueError, ArithmeticError) as exc:
            return ProductEvaluation(x, value, n, math.inf, False, f"inverse failed: {exc}")
        if not math.isfinite(t_next) or t_next > t:
            return ProductEvaluation(x, value, n, math.inf, False, "factors increase")
        if t_next < 1.0:
            return ProductEvaluation(x, value, n, math.inf, False, "iterate left (1, inf)")
        if t_next == 1.0:
            # the factor has collapsed onto 1 in floating point
            return ProductEvaluation(x, value, n, 0.0, True)
        e = t_next - 1.0
        if t_next == t and e > tol:
            return ProductEvaluation(x, value, n, math.inf, False, "factors stall above 1")
        value *= t_next
        if not math.isfinite(value):
            return ProductEvaluation(x, value, n, math.inf, False, "product overflow")
        rho = e / e_prev
        tail = _tail_estimate(e, rho)
        if e <= tol and tail <= tol:
            return ProductEvaluation(x, value, n, tail, True)
        t, e_prev = t_next, e
    return ProductEvaluation(x, value, max_terms, math.inf, False, f"not converged within {max_terms} terms")


def _require_increasing(g: MonotoneFn, role: str = "generator"):
    if g.direction != Direction.INCREASING:
        raise MonotonicityError(f"{role} {g.label} must be strictly increasing")


def product_partial(g: MonotoneFn, n: int, x: float, *, grid: Sequence[float] | None = None) -> float:
    """``prod_{k=0}^{n} g^{-k}(x)`` for an Above generator ``g``."""
    _require_increasing(g)
    cls = classify_generator(g, grid)
    if cls != GeneratorClass.ABOVE:
        raise GeneratorClassError(f"{g.label} is {cls.value}; the product needs g(x) > x")
    if n < 0:
        raise ValueError("n must be nonnegative")
    value = t = float(x)
    for _ in range(n):
        if t == 1.0:
            # the iterate has collapsed onto 1; every later factor is 1 too
            break
        t = g.invert(t)
        value *= t
    return value


@dataclass(frozen=True, eq=False)
class IterProduct:
    """Evaluator for the product of inverse iterates of ``generator``."""

    generator: MonotoneFn
    truncation_tol: float = DEFAULT_TOL
    max_terms: int = MAX_TERMS
    scale: float = 1.0
    _g_inv: object = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_g_inv", self.generator.invert)

    def evaluate(self, x: float) -> ProductEvaluation:
        return evaluate_product(self._g_inv, x, self.truncation_tol, self.max_terms)

    def __call__(self, x: float) -> float:
        ev = self.evaluate(x)
        if not ev.converged:
            raise DivergenceError(
                f"product of inverse iterates of {self.generator.label} diverges at x={x!r}: {ev.reason}",
                terms=ev.terms,
                witness=x,
            )
        return self.scale * ev.value


PROBE_POINTS = (1.5, 2.0, 10.0, 1e3)


def infinite_product(g: MonotoneFn, tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS, *,
                     scale: float = 1.0, power_shortcut: bool = True, label: str | None = None) -> MonotoneFn:
    """The function ``x -> scale * prod_{k>=0} g^{-k}(x)`` on ``(1, inf)``.

    The body always evaluates the truncated product.  When ``g`` is known to
    be ``x**a`` the inverse ``y**((a-1)/a)`` is attached in closed form
    (unless ``power_shortcut`` is off); otherwise inversion bisects.

    Raises :class:`DivergenceError` when the product fails to converge at a
    few probe points, which is what happens for generators below the
    diagonal.
    """
    _require_increasing(g)
    if g.domain != UNIT_RAY:
        raise GeneratorClassError(f"{g.label} must act on (1, inf), got {g.domain}")
    prod = IterProduct(g, tol, max_terms, scale)
    for x in PROBE_POINTS:
        ev = prod.evaluate(x)
        if not ev.converged:
            raise DivergenceError(
                f"product of inverse iterates of {g.label} diverges at x={x!r} after {ev.terms} terms: {ev.reason}",
                terms=ev.terms,
                witness=x,
            )
    inverse_func = None
    power = None
    if g.power is not None and g.power > 1 and scale == 1.0:
        power = g.power / (g.power - 1.0)
        if power_shortcut:
            inv_exp = 1.0 / power
            inverse_func = lambda y: y ** inv_exp  # noqa: E731
    codomain = UNIT_RAY if scale == 1.0 else Interval(scale, math.inf)
    return MonotoneFn(
        func=prod,
        domain=UNIT_RAY,
        codomain=codomain,
        direction=Direction.INCREASING,
        inverse_func=inverse_func,
        label=label or f"prod {g.label}^-k",
        power=power,
    )


def convergence_report(g: MonotoneFn, grid: Sequence[float], tol: float = DEFAULT_TOL,
                       max_terms: int = MAX_TERMS) -> ConvergenceReport:
    """Evaluate the product at every grid point without raising."""
    g_inv = g.invert
    terms = []
    tails = []
    witness = None
    for x in grid:
        ev = evaluate_product(g_inv, float(x), tol, max_terms)
        terms.append(ev.terms)
        if ev.converged:
            tails.append(ev.tail_bound)
        elif witness is None:
            witness = float(x)
    converged = witness is None
    max_tail = max(tails, default=0.0) if converged else math.inf
    return ConvergenceReport(converged, [float(x) for x in grid], terms, max_tail, witness, tol)


def iterative_mean(g: MonotoneFn, tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS):
    """The iterative mean ``(P o g)^-1(P(x) g(y))`` with ``P`` the product of ``g``."""
    from .means import make_C

    f = infinite_product(g, tol, max_terms)
    op = make_C(f, g)
    return op.relabel(f"Cg[{g.label}]", "iterative_mean")


def product_iterative_mean(r: MonotoneFn, tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS,
                           *, grid: Sequence[float] | None = None):
    """Iterative mean generated by ``r`` with ``1 < r(x) < x``.

    This is ``C_{f,g}`` with ``g = r^-1`` and ``f = prod_k r^k``.
    """
    from .means import make_C

    _require_increasing(r)
    cls = classify_generator(r, grid)
    if cls != GeneratorClass.BELOW:
        raise GeneratorClassError(f"{r.label} is {cls.value}; the product iterative mean needs 1 < r(x) < x")
    g = r.inverse()
    f = infinite_product(g, tol, max_terms, label=f"prod {r.label}^k")
    op = make_C(f, g)
    return op.relabel(f"Cr[{r.label}]", "product_iterative_mean")
