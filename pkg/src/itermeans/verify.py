"""Grid-level property checks and equality deciders.

Every verdict here is certified on a finite grid only.  Equality reports carry
both the pointwise verdict and the structural parameters fitted from the
generators; disagreement between the two is flagged as an anomaly.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IterMeansError
from .iterprod import MAX_TERMS, infinite_product
from .means import BivarOp, make_A, make_C, make_D, make_G
from .monofunc import DEFAULT_TOL, Interval, MonotoneFn, compose

__all__ = [
    "MeanReport",
    "SymmetryReport",
    "EqualityReport",
    "Eq11Report",
    "Remark5Result",
    "GRID_CERTIFIED",
    "default_pair_grid",
    "pair_grid",
    "check_mean",
    "reflexivity_residual",
    "check_reflexive_C",
    "symmetry_analysis",
    "theorem4_construct",
    "eq11_residual",
    "remark5_residual",
    "remark5_search",
    "equality_C",
    "equality_D",
    "equality_G",
    "equality_A",
]

GRID_CERTIFIED = "grid-certified only"
MEAN_TOL = 1e-9
EQUALITY_TOL = 1e-8


def pair_grid(points: Sequence[float]) -> list[tuple[float, float]]:
    return [(float(x), float(y)) for x in points for y in points]


def default_pair_grid(domain: Interval, n: int = 40, hi: float = 100.0) -> list[tuple[float, float]]:
    """``n x n`` grid; log-spaced in ``(lo, hi]`` on positive half-lines."""
    if domain.lo >= 0 and math.isinf(domain.hi):
        start = domain.lo * (1 + 1e-3) if domain.lo > 0 else 1e-2
        pts = np.geomspace(start, max(hi, 10 * start), n)
    else:
        pts = domain.grid(n)
    return pair_grid(pts)


def _safe(op, x, y) -> float:
    try:
        v = op(x, y)
    except (IterMeansError, ValueError, ArithmeticError):
        return math.nan
    return float(v)


# ---------------------------------------------------------------------------
# mean-ness


@dataclass
class MeanReport:
    reflexive: bool
    internal: bool
    strict: bool
    symmetric: bool
    max_reflexivity_residual: float
    internality_witness: tuple[float, float, float] | None
    grid_size: int
    label: str = ""

    @property
    def is_mean(self) -> bool:
        return self.reflexive and self.internal

    @property
    def is_strict_mean(self) -> bool:
        return self.is_mean and self.strict


def check_mean(op: BivarOp, grid: Iterable[tuple[float, float]], tol: float = MEAN_TOL) -> MeanReport:
    """Evaluate ``op`` on ``grid`` and fill in the mean properties.

    Internality allows a relative slack of ``tol``; strictness demands a
    margin of more than ``tol`` on both sides, checked only where ``x != y``.
    The witness is the first grid pair violating internality (``value`` is
    NaN when ``op`` is undefined there).
    """
    grid = [(float(x), float(y)) for x, y in grid]
    internal = True
    strict = True
    symmetric = True
    witness = None
    cache: dict[tuple[float, float], float] = {}

    def value(x, y):
        key = (x, y)
        if key not in cache:
            cache[key] = _safe(op, x, y)
        return cache[key]

    for x, y in grid:
        v = value(x, y)
        lo, hi = min(x, y), max(x, y)
        slack_lo = tol * max(1.0, abs(lo))
        slack_hi = tol * max(1.0, abs(hi))
        if not (lo - slack_lo <= v <= hi + slack_hi):
            internal = False
            strict = False
            if witness is None:
                witness = (x, y, v)
        elif x != y and not (v - lo > slack_lo and hi - v > slack_hi):
            strict = False
        w = value(y, x)
        if not (abs(v - w) <= tol * max(1.0, abs(v))):
            symmetric = False

    diag = sorted({x for pair in grid for x in pair})
    max_res = 0.0
    for x in diag:
        v = value(x, x)
        res = abs(v - x) / max(1.0, abs(x)) if v == v else math.inf
        max_res = max(max_res, res)
    reflexive = max_res <= tol
    if not reflexive:
        strict = False
    return MeanReport(reflexive, internal, strict, symmetric, max_res, witness, len(grid), op.label)


def reflexivity_residual(f: MonotoneFn, g: MonotoneFn, grid: Iterable[float]) -> float:
    """``max |f(g(x)) - f(x) g(x)| / |f(g(x))|``: the inversion-free reflexivity test."""
    worst = 0.0
    for x in grid:
        lhs = f(g(x))
        rhs = f(x) * g(x)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def check_reflexive_C(f: MonotoneFn, g: MonotoneFn, grid: Iterable[float] | None = None,
                      tol: float = 1e-8) -> bool:
    if grid is None:
        grid = f.domain.grid(33)
    return reflexivity_residual(f, g, grid) <= tol


@dataclass
class SymmetryReport:
    symmetric: bool
    max_asymmetry: float
    c: float | None = None
    proportional: bool = False
    square_generator: bool = False

    @property
    def geometric_mean_case(self) -> bool:
        return self.symmetric and self.proportional and self.square_generator


def symmetry_analysis(f: MonotoneFn, g: MonotoneFn, grid: Sequence[float] | None = None,
                      tol: float = 1e-9) -> SymmetryReport:
    """Symmetry of ``C_{f,g}`` and, if symmetric, the constant ``c = g/f``.

    Since ``(f o g)^-1`` is injective, ``C_{f,g}`` is symmetric exactly when
    ``f(x) g(y) = f(y) g(x)``; that identity is what gets checked.
    """
    xs = list(grid) if grid is not None else f.domain.grid(17)
    fx = [f(x) for x in xs]
    gx = [g(x) for x in xs]
    worst = 0.0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            a = fx[i] * gx[j]
            b = fx[j] * gx[i]
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    symmetric = worst <= tol
    if not symmetric:
        return SymmetryReport(False, worst)
    c = statistics.median(b / a for a, b in zip(fx, gx))
    proportional = all(abs(b - c * a) <= tol * abs(b) for a, b in zip(fx, gx))
    square = all(abs(b - x * x) <= tol * x * x for x, b in zip(xs, gx))
    return SymmetryReport(True, worst, c, proportional, square)


# ---------------------------------------------------------------------------
# composite functional equation


def theorem4_construct(h: MonotoneFn, tol: float = DEFAULT_TOL,
                       max_terms: int = MAX_TERMS) -> tuple[MonotoneFn, MonotoneFn]:
    """``g = prod_i h^-i`` and ``f = prod_j g^-j``; :class:`DivergenceError` if either fails."""
    g = infinite_product(h, tol, max_terms, label=f"prod {h.label}^-i")
    f = infinite_product(g, tol, max_terms, label=f"prod ({g.label})^-j")
    return f, g


@dataclass
class Eq11Report:
    grid: list[float]
    lhs_values: list[float]
    rhs_values: list[float]
    max_relative_gap: float
    satisfied: bool
    tol: float = EQUALITY_TOL


def eq11_residual(h: MonotoneFn, grid: Sequence[float], tol: float = EQUALITY_TOL, *,
                  product_tol: float = DEFAULT_TOL, max_terms: int = MAX_TERMS) -> Eq11Report:
    """Compare ``(f o g)(x)`` with ``prod_k (g o h)^-k(x)`` on ``grid``.

    ``(f, g)`` come from :func:`theorem4_construct`.  The composite equation
    holds exactly when the two sides agree for every ``x``.
    """
    grid = [float(x) for x in grid]
    if not grid:
        return Eq11Report([], [], [], 0.0, True, tol)
    f, g = theorem4_construct(h, product_tol, max_terms)
    fg = compose(f, g)
    rhs_fn = infinite_product(compose(g, h), product_tol, max_terms)
    lhs = [fg(x) for x in grid]
    rhs = [rhs_fn(x) for x in grid]
    gap = max(abs(a - b) / max(abs(a), abs(b)) for a, b in zip(lhs, rhs))
    return Eq11Report(grid, lhs, rhs, gap, gap <= tol, tol)


# ---------------------------------------------------------------------------
# derivative system at the point 1


def remark5_residual(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Residuals of ``ab = a + b``, ``bc = b + c``, ``a b^2 c = ab + bc``."""
    return (a * b - a - b, b * c - b - c, a * b * b * c - a * b - b * c)


@dataclass
class Remark5Result:
    min_norm: float
    argmin: tuple[float, float, float]
    grid_min_norm: float


def _remark5_norm(a, b, c):
    r1 = a * b - a - b
    r2 = b * c - b - c
    r3 = a * b * b * c - a * b - b * c
    return np.sqrt(r1 * r1 + r2 * r2 + r3 * r3)


def remark5_search(lo: float = 1.0, hi: float = 10.0, resolution: int = 100,
                   refine_steps: int = 100) -> Remark5Result:
    """Minimum residual norm of the derivative system over ``[lo, hi]^3``.

    Brute-force grid search followed by coordinate descent with a shrinking
    step, all confined to the box.
    """
    if lo < 1:
        raise ValueError("the box must satisfy lo >= 1")
    if hi < lo:
        raise ValueError("hi must be >= lo")
    if hi == lo:
        n = float(_remark5_norm(lo, lo, lo))
        return Remark5Result(n, (lo, lo, lo), n)
    t = np.linspace(lo, hi, resolution)
    a, b, c = np.meshgrid(t, t, t, indexing="ij")
    norms = _remark5_norm(a, b, c)
    i = int(np.argmin(norms))
    best = [float(a.flat[i]), float(b.flat[i]), float(c.flat[i])]
    grid_min = float(norms.flat[i])
    best_val = grid_min
    step = (hi - lo) / max(resolution - 1, 1)
    for _ in range(refine_steps):
        improved = False
        for k in range(3):
            for s in (step, -step):
                cand = list(best)
                cand[k] = min(hi, max(lo, cand[k] + s))
                v = float(_remark5_norm(*cand))
                if v < best_val:
                    best, best_val, improved = cand, v, True
        if not improved:
            step *= 0.5
    return Remark5Result(best_val, tuple(best), grid_min)


# ---------------------------------------------------------------------------
# equality of operations


@dataclass
class EqualityReport:
    equal: bool
    fitted_params: dict[str, float]
    max_residual: float
    structural_match: bool
    structural_residual: float
    anomaly: bool
    note: str = GRID_CERTIFIED
    argmax: tuple[float, float] | None = None


def _pointwise_gap(op1: BivarOp, op2: BivarOp, grid) -> tuple[float, tuple[float, float] | None]:
    worst, where = 0.0, None
    for x, y in grid:
        a, b = _safe(op1, x, y), _safe(op2, x, y)
        if a != a and b != b:
            continue
        if a != a or b != b:
            return math.inf, (x, y)
        r = abs(a - b) / max(1.0, abs(a), abs(b))
        if r > worst:
            worst, where = r, (x, y)
    return worst, where


def _points(grid) -> list[float]:
    return sorted({float(v) for pair in grid for v in pair})


def _report(point_gap, where, params, struct_res, tol) -> EqualityReport:
    equal = point_gap <= tol
    structural = struct_res <= tol
    return EqualityReport(equal, params, point_gap, structural, struct_res, equal != structural, argmax=where)


def _grid_or_default(grid, domain):
    return list(grid) if grid is not None else default_pair_grid(domain)


def equality_C(f, g, phi, psi, grid=None, tol: float = EQUALITY_TOL) -> EqualityReport:
    """Is ``C_{f,g} = C_{phi,psi}``?  Structurally: ``g = psi`` and ``f = a phi``."""
    grid = _grid_or_default(grid, f.domain)
    gap, where = _pointwise_gap(make_C(f, g), make_C(phi, psi), grid)
    xs = _points(grid)
    a = statistics.median(f(x) / phi(x) for x in xs)
    res = max(
        max(abs(g(x) - psi(x)) / abs(g(x)) for x in xs),
        max(abs(f(x) - a * phi(x)) / abs(f(x)) for x in xs),
    )
    return _report(gap, where, {"a": a}, res, tol)


def equality_D(f, g, fbar, gbar, grid=None, tol: float = EQUALITY_TOL) -> EqualityReport:
    """Is ``D_{f,g} = D_{fbar,gbar}``?  Structurally: ``f = fbar + a`` and ``g = gbar``."""
    grid = _grid_or_default(grid, f.domain)
    gap, where = _pointwise_gap(make_D(f, g), make_D(fbar, gbar), grid)
    xs = _points(grid)
    a = statistics.median(f(x) - fbar(x) for x in xs)
    res = max(
        max(abs(g(x) - gbar(x)) / max(1.0, abs(g(x))) for x in xs),
        max(abs(f(x) - fbar(x) - a) / max(1.0, abs(f(x))) for x in xs),
    )
    return _report(gap, where, {"a": a}, res, tol)


def _common_slope_fit(u1, v1, u2, v2):
    """Least squares for ``v1 = s u1 + p`` and ``v2 = s u2 + q`` with shared ``s``."""
    u1, v1, u2, v2 = (np.asarray(t, dtype=float) for t in (u1, v1, u2, v2))
    n1, n2 = len(u1), len(u2)
    design = np.zeros((n1 + n2, 3))
    design[:n1, 0] = u1
    design[:n1, 1] = 1.0
    design[n1:, 0] = u2
    design[n1:, 2] = 1.0
    rhs = np.concatenate([v1, v2])
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    resid = np.abs(design @ coef - rhs) / np.maximum(1.0, np.abs(rhs))
    return float(coef[0]), float(coef[1]), float(coef[2]), float(resid.max())


def equality_G(f, g, fbar, gbar, grid=None, tol: float = EQUALITY_TOL) -> EqualityReport:
    """Is ``G_{fbar,gbar} = G_{f,g}``?  Structurally: ``fbar = b f^a``, ``gbar = c g^a``.

    The exponent is fitted by a common-slope regression of ``log fbar`` on
    ``log f`` and ``log gbar`` on ``log g``.
    """
    grid = _grid_or_default(grid, f.domain)
    gap, where = _pointwise_gap(make_G(fbar, gbar), make_G(f, g), grid)
    xs = _points(grid)
    a, lb, lc, res = _common_slope_fit(
        [math.log(f(x)) for x in xs], [math.log(fbar(x)) for x in xs],
        [math.log(g(x)) for x in xs], [math.log(gbar(x)) for x in xs],
    )
    return _report(gap, where, {"a": a, "b": math.exp(lb), "c": math.exp(lc)}, res, tol)


def equality_A(phi, psi, Phi, Psi, grid=None, tol: float = EQUALITY_TOL) -> EqualityReport:
    """Is ``A_{Phi,Psi} = A_{phi,psi}``?  Structurally: ``Phi = alpha phi + beta``, ``Psi = alpha psi + gamma``."""
    grid = _grid_or_default(grid, phi.domain)
    gap, where = _pointwise_gap(make_A(Phi, Psi), make_A(phi, psi), grid)
    xs = _points(grid)
    alpha, beta, gamma, res = _common_slope_fit(
        [phi(x) for x in xs], [Phi(x) for x in xs],
        [psi(x) for x in xs], [Psi(x) for x in xs],
    )
    return _report(gap, where, {"alpha": alpha, "beta": beta, "gamma": gamma}, res, tol)
