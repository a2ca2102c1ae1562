"""Continuous strictly monotone bijections between real intervals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import exprlang
from .errors import DomainError, MonotonicityError, NoConvergence, RangeError

__all__ = [
    "Interval",
    "Direction",
    "GeneratorClass",
    "MonotoneFn",
    "UNIT_RAY",
    "POSITIVE",
    "REAL",
    "DEFAULT_TOL",
    "GUARD",
    "check_monotone",
    "image_of",
    "identity",
    "from_text",
    "compose",
    "pointwise_product",
    "pointwise_quotient",
    "pointwise_sum",
    "pointwise_difference",
    "iterate",
    "classify_generator",
    "fixpoint_scan",
]

DEFAULT_TOL = 1e-12
MAX_ITER = 200
GUARD = 1e-9
SPAN = 1e6
WINDOW = 50.0
VALIDATION_POINTS = 257


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty interval: lo={self.lo!r} must be < hi={self.hi!r}")
        if math.isinf(self.lo) and not self.lo_open or math.isinf(self.hi) and not self.hi_open:
            raise DomainError("infinite endpoints must be open")

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"1,inf"``, ``"(0,inf)"`` or ``"[1,10]"``; bare pairs are open."""
        s = text.strip()
        lo_open = hi_open = True
        if s[:1] in "([":
            lo_open = s[0] == "("
            s = s[1:]
        if s[-1:] in ")]":
            hi_open = s[-1] == ")"
            s = s[:-1]
        try:
            lo_s, hi_s = s.split(",")
            return cls(float(lo_s), float(hi_s), lo_open, hi_open)
        except ValueError as exc:
            raise DomainError(f"cannot parse interval {text!r}") from exc

    def __str__(self):
        def num(v):
            return "inf" if v == math.inf else "-inf" if v == -math.inf else f"{v:g}"

        return f"{'(' if self.lo_open else '['}{num(self.lo)},{num(self.hi)}{')' if self.hi_open else ']'}"

    def contains(self, x: float) -> bool:
        if x != x:
            return False
        if x < self.lo or (x == self.lo and self.lo_open):
            return False
        if x > self.hi or (x == self.hi and self.hi_open):
            return False
        return True

    def issubset(self, other: "Interval") -> bool:
        lo_ok = self.lo > other.lo or (self.lo == other.lo and (self.lo_open or not other.lo_open))
        hi_ok = self.hi < other.hi or (self.hi == other.hi and (self.hi_open or not other.hi_open))
        return lo_ok and hi_ok

    @property
    def multiplicative(self) -> bool:
        return self.lo >= 0

    def grid(self, n: int = VALIDATION_POINTS, *, guard: float = GUARD, span: float = SPAN,
             window: float = WINDOW) -> list[float]:
        """Sample points inside the interval, geometric on positive half-lines.

        Open finite endpoints are avoided by a relative guard band; the
        default for ``(1, inf)`` is ``n`` geometric points in ``[1+guard, span]``.
        """
        lo, hi = self.lo, self.hi
        lo_eff = None if math.isinf(lo) else (lo + guard * max(1.0, abs(lo)) if self.lo_open else lo)
        hi_eff = None if math.isinf(hi) else (hi - guard * max(1.0, abs(hi)) if self.hi_open else hi)
        if n == 1:
            pts = [lo_eff if lo_eff is not None else (hi_eff if hi_eff is not None else 0.0)]
        elif lo_eff is not None and hi_eff is None:
            if lo >= 0:
                start = lo_eff if lo > 0 else max(lo_eff, 1.0 / span)
                pts = np.geomspace(start, max(span, 10 * start), n)
            else:
                pts = np.linspace(lo_eff, lo_eff + 2 * window, n)
        elif lo_eff is not None and hi_eff is not None:
            start = lo_eff if lo_eff > 0 else None
            if start is not None and hi_eff / start > 100:
                pts = np.geomspace(start, hi_eff, n)
            else:
                pts = np.linspace(lo_eff, hi_eff, n)
        elif hi_eff is not None:
            pts = np.linspace(hi_eff - 2 * window, hi_eff, n)
        else:
            pts = np.linspace(-window, window, n)
        return [float(p) for p in pts]


UNIT_RAY = Interval(1.0, math.inf)
POSITIVE = Interval(0.0, math.inf)
REAL = Interval(-math.inf, math.inf)


class Direction(enum.IntEnum):
    INCREASING = 1
    DECREASING = -1


class GeneratorClass(enum.Enum):
    ABOVE = "Above"
    BELOW = "Below"
    MIXED = "Mixed"
    HAS_INTERIOR_FIXPOINT = "HasInteriorFixpoint"


# ---------------------------------------------------------------------------
# validation helpers


def check_monotone(func: Callable[[float], float], domain: Interval, *, points: int = VALIDATION_POINTS,
                   expect: Direction | None = None, positive: bool = False):
    """Sample ``func`` on ``domain.grid(points)`` and return ``(direction, xs, ys)``.

    Values that overflow at the ends of the grid are trimmed; a NaN anywhere,
    or an infinity in the interior, means the function is undefined there.
    """
    xs = domain.grid(points)
    ys = [func(x) for x in xs]
    for x, y in zip(xs, ys):
        if y != y:
            raise DomainError(f"function undefined at x={x!r}")
    finite = [i for i, y in enumerate(ys) if math.isfinite(y)]
    if not finite:
        raise DomainError("function is not finite anywhere on the validation grid")
    first, last = finite[0], finite[-1]
    if last - first + 1 != len(finite):
        raise DomainError("function is not finite on a contiguous part of the grid")
    xs, ys = xs[first:last + 1], ys[first:last + 1]
    if positive:
        for x, y in zip(xs, ys):
            if y <= 0:
                raise DomainError(f"function leaves (0, inf): f({x!r}) = {y!r}")
    if len(ys) < 2:
        raise MonotonicityError("too few finite samples to decide monotonicity")
    diffs = [b - a for a, b in zip(ys, ys[1:])]
    if all(d > 0 for d in diffs):
        direction = Direction.INCREASING
    elif all(d < 0 for d in diffs):
        direction = Direction.DECREASING
    else:
        up = diffs[0] > 0
        bad = next(i for i, d in enumerate(diffs) if (d <= 0 if up else d >= 0))
        raise MonotonicityError(
            f"not strictly monotone near x={xs[bad]!r}..{xs[bad + 1]!r}"
        )
    if expect is not None and direction != expect:
        raise MonotonicityError(f"expected a {expect.name.lower()} function, got {direction.name.lower()}")
    return direction, xs, ys


FAR = 1e300


def _limit(func, endpoint: float, fallback: float) -> float:
    """``func`` at ``endpoint``; at an infinite end fall back to a far finite point."""
    probes = [endpoint]
    if math.isinf(endpoint):
        probes.append(math.copysign(FAR, endpoint))
    for p in probes:
        try:
            v = func(p)
        except (ValueError, ArithmeticError):
            continue
        if v == v:
            return float(v)
    return float(fallback)


def image_of(func, domain: Interval, direction: Direction, xs=None, ys=None) -> Interval:
    """Image of ``domain`` under a monotone ``func`` from its endpoint limits."""
    if xs is None:
        xs = domain.grid(9)
        ys = [func(x) for x in xs]
    a = _limit(func, domain.lo, ys[0])
    b = _limit(func, domain.hi, ys[-1])
    if direction == Direction.INCREASING:
        lo, hi, lo_open, hi_open = a, b, domain.lo_open, domain.hi_open
    else:
        lo, hi, lo_open, hi_open = b, a, domain.hi_open, domain.lo_open
    return Interval(lo, hi, lo_open or math.isinf(lo), hi_open or math.isinf(hi))


# ---------------------------------------------------------------------------
# the function type


def _bisect_inverse(fn: "MonotoneFn", y: float, tol: float, max_iter: int) -> float:
    dom = fn.domain
    sign = int(fn.direction)
    raw = fn.func

    def h(x):
        return sign * (raw(x) - y)

    lo_lim, hi_lim = dom.lo, dom.hi
    if dom.contains(y):
        seed = y
    elif math.isfinite(lo_lim) and math.isfinite(hi_lim):
        seed = 0.5 * (lo_lim + hi_lim)
    elif math.isfinite(lo_lim):
        seed = lo_lim + max(1.0, abs(lo_lim))
    elif math.isfinite(hi_lim):
        seed = hi_lim - max(1.0, abs(hi_lim))
    else:
        seed = 0.0

    hs = h(seed)
    if hs == 0:
        return seed
    step = max(1.0, abs(seed))
    a = b = seed
    for _ in range(max_iter):
        if hs < 0:
            # move right
            cand = b + step
            if cand >= hi_lim or (cand == hi_lim and dom.hi_open):
                cand = 0.5 * (b + hi_lim)
            a, b = b, cand
            hb = h(b)
            if hb >= 0 or hb != hb:
                break
        else:
            cand = a - step
            if cand <= lo_lim:
                cand = 0.5 * (a + lo_lim)
            a, b = cand, a
            ha = h(a)
            if ha <= 0:
                break
        step *= 2
    else:
        raise NoConvergence(f"could not bracket f^-1({y!r}) within {max_iter} expansions")

    ytol = tol * max(1.0, abs(y))
    for _ in range(max_iter):
        if a > 0 and b > 2 * a:
            m = math.sqrt(a * b)
        else:
            m = 0.5 * (a + b)
        if m <= a or m >= b:
            return m
        fm = raw(m)
        if abs(fm - y) <= ytol:
            return m
        if sign * (fm - y) < 0:
            a = m
        else:
            b = m
    if b - a <= 1e3 * tol * max(1.0, abs(a)):
        return 0.5 * (a + b)
    raise NoConvergence(f"bisection for f^-1({y!r}) did not converge in {max_iter} steps")


@dataclass(frozen=True, eq=False)
class MonotoneFn:
    """A continuous strictly monotone bijection ``domain -> codomain``.

    ``func`` is the raw evaluator; calling the object checks the domain.
    ``inverse_func`` is a closed-form inverse when one is known; otherwise
    :meth:`invert` brackets and bisects.  ``power`` records ``a`` when the
    function is known to equal ``x**a``.
    """

    func: Callable[[float], float]
    domain: Interval
    codomain: Interval
    direction: Direction = Direction.INCREASING
    inverse_func: Callable[[float], float] | None = None
    label: str = "f"
    expr: exprlang.Expr | None = field(default=None, repr=False)
    inverse_expr: exprlang.Expr | None = field(default=None, repr=False)
    power: float | None = None

    @property
    def increasing(self) -> bool:
        return self.direction == Direction.INCREASING

    def __call__(self, x: float) -> float:
        if not self.domain.contains(x):
            raise DomainError(f"{self.label}: x={x!r} outside domain {self.domain}")
        y = self.func(x)
        if y != y:
            raise DomainError(f"{self.label}: undefined at x={x!r}")
        return y

    def invert(self, y: float, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> float:
        """Return ``x`` with ``f(x) = y``."""
        if not self.codomain.contains(y):
            raise RangeError(f"{self.label}: y={y!r} outside codomain {self.codomain}")
        if self.inverse_func is not None:
            return self.inverse_func(y)
        return _bisect_inverse(self, y, tol, max_iter)

    def inverse(self) -> "MonotoneFn":
        return MonotoneFn(
            func=self.invert,
            domain=self.codomain,
            codomain=self.domain,
            direction=self.direction,
            inverse_func=self.func,
            label=f"{self.label}^-1",
            expr=self.inverse_expr,
            inverse_expr=self.expr,
            power=None if not self.power else 1.0 / self.power,
        )

    def image(self, interval: Interval) -> Interval:
        if interval == self.domain:
            return self.codomain
        return image_of(self.func, interval, self.direction)

    def with_label(self, label: str) -> "MonotoneFn":
        return replace(self, label=label)

    def unparse(self) -> str | None:
        return None if self.expr is None else exprlang.unparse(self.expr)


def identity(domain: Interval = UNIT_RAY) -> MonotoneFn:
    return MonotoneFn(float, domain, domain, Direction.INCREASING, float, "x",
                      exprlang.X, exprlang.X, 1.0)


def from_text(text: str, domain: Interval = UNIT_RAY, *, positive: bool = False,
              label: str | None = None) -> MonotoneFn:
    """Shorthand for ``to_monotone(parse(text), domain)``."""
    return exprlang.to_monotone(exprlang.parse(text), domain, positive=positive, label=label)


# ---------------------------------------------------------------------------
# algebra


def compose(f: MonotoneFn, g: MonotoneFn) -> MonotoneFn:
    """``f o g``; the inverse chains ``g^-1 o f^-1``."""
    if not g.codomain.issubset(f.domain):
        raise DomainError(f"cannot compose: codomain {g.codomain} of {g.label} not inside domain {f.domain} of {f.label}")
    ff, gf = f.func, g.func
    expr = inv_expr = None
    if f.expr is not None and g.expr is not None:
        expr = exprlang.fold(exprlang.Compose(f.expr, g.expr))
    if f.inverse_expr is not None and g.inverse_expr is not None:
        inv_expr = exprlang.fold(exprlang.Compose(g.inverse_expr, f.inverse_expr))
    return MonotoneFn(
        func=lambda x: ff(gf(x)),
        domain=g.domain,
        codomain=f.image(g.codomain),
        direction=Direction(int(f.direction) * int(g.direction)),
        inverse_func=lambda y: g.invert(f.invert(y)),
        label=f"({f.label})o({g.label})",
        expr=expr,
        inverse_expr=inv_expr,
        power=f.power * g.power if f.power and g.power else None,
    )


def _pointwise(f: MonotoneFn, g: MonotoneFn, op: str, *, positive_inputs: bool,
               expect: Direction | None, points: int) -> MonotoneFn:
    if f.domain != g.domain:
        raise DomainError(f"domains differ: {f.domain} vs {g.domain}")
    if positive_inputs and (f.codomain.lo < 0 or g.codomain.lo < 0):
        raise DomainError("pointwise product/quotient requires functions into (0, inf)")
    ff, gf = f.func, g.func
    if op == "*":
        func = lambda x: ff(x) * gf(x)  # noqa: E731
    elif op == "/":
        func = lambda x: ff(x) / gf(x)  # noqa: E731
    elif op == "+":
        func = lambda x: ff(x) + gf(x)  # noqa: E731
    else:
        func = lambda x: ff(x) - gf(x)  # noqa: E731
    direction, xs, ys = check_monotone(func, f.domain, points=points, expect=expect)
    expr = None
    if f.expr is not None and g.expr is not None:
        expr = exprlang.fold(exprlang.BinOp(op, f.expr, g.expr))
    power = None
    if f.power and g.power:
        power = {"*": f.power + g.power, "/": f.power - g.power}.get(op) or None
    return MonotoneFn(
        func=func,
        domain=f.domain,
        codomain=image_of(func, f.domain, direction, xs, ys),
        direction=direction,
        label=f"({f.label}){op}({g.label})",
        expr=expr,
        power=power,
    )


def pointwise_product(f: MonotoneFn, g: MonotoneFn, *, points: int = VALIDATION_POINTS) -> MonotoneFn:
    """``x -> f(x) g(x)`` for two positive functions of the same direction."""
    if f.direction != g.direction:
        raise MonotonicityError("pointwise product needs both factors increasing or both decreasing")
    return _pointwise(f, g, "*", positive_inputs=True, expect=f.direction, points=points)


def pointwise_quotient(f: MonotoneFn, g: MonotoneFn, *, expect: Direction | None = None,
                       points: int = VALIDATION_POINTS) -> MonotoneFn:
    return _pointwise(f, g, "/", positive_inputs=True, expect=expect, points=points)


def pointwise_sum(f: MonotoneFn, g: MonotoneFn, *, points: int = VALIDATION_POINTS) -> MonotoneFn:
    if f.direction != g.direction:
        raise MonotonicityError("pointwise sum needs both terms of the same direction")
    return _pointwise(f, g, "+", positive_inputs=False, expect=f.direction, points=points)


def pointwise_difference(f: MonotoneFn, g: MonotoneFn, *, expect: Direction | None = None,
                         points: int = VALIDATION_POINTS) -> MonotoneFn:
    return _pointwise(f, g, "-", positive_inputs=False, expect=expect, points=points)


def iterate(g: MonotoneFn, n: int) -> MonotoneFn:
    """The ``n``-th iterate of ``g``; negative ``n`` iterates the inverse."""
    if g.domain != g.codomain:
        raise DomainError(f"{g.label} does not map its domain {g.domain} onto itself ({g.codomain})")
    if n == 0:
        return identity(g.domain)
    base = g if n > 0 else g.inverse()
    out = base
    for _ in range(abs(n) - 1):
        out = compose(base, out)
    return out.with_label(f"{g.label}^{n}")


# ---------------------------------------------------------------------------
# generators on (1, inf)


def _generator_grid(grid) -> list[float]:
    if grid is None:
        return UNIT_RAY.grid(33)
    return [float(x) for x in grid]


def classify_generator(g: MonotoneFn, grid: Sequence[float] | None = None, *,
                       tol: float = DEFAULT_TOL) -> GeneratorClass:
    """Compare ``g(x)`` with ``x`` on a grid inside ``(1, inf)``."""
    xs = _generator_grid(grid)
    if not xs:
        raise ValueError("grid must be nonempty")
    above = below = fixed = 0
    for x in xs:
        y = g(x)
        if abs(y - x) <= tol * max(1.0, abs(x)):
            fixed += 1
        elif y > x:
            above += 1
        elif 1 < y < x:
            below += 1
    if fixed or (above and below):
        return GeneratorClass.HAS_INTERIOR_FIXPOINT
    if above == len(xs):
        return GeneratorClass.ABOVE
    if below == len(xs):
        return GeneratorClass.BELOW
    return GeneratorClass.MIXED


def fixpoint_scan(g: MonotoneFn, grid: Sequence[float] | None = None, *,
                  tol: float = DEFAULT_TOL) -> list[float]:
    """Approximate fixpoints of ``g`` inside ``grid``'s span.

    Exact hits on grid points are reported as is; sign changes of ``g(x) - x``
    between neighbours are refined by bisection.
    """
    xs = sorted(_generator_grid(grid) if grid is not None else g.domain.grid(65))
    found: list[float] = []

    def d(x):
        return g(x) - x

    ds = [d(x) for x in xs]
    for i, (x, dx) in enumerate(zip(xs, ds)):
        if abs(dx) <= tol * max(1.0, abs(x)):
            found.append(x)
            continue
        if i + 1 < len(xs):
            dn = ds[i + 1]
            if abs(dn) <= tol * max(1.0, abs(xs[i + 1])):
                continue
            if (dx < 0) != (dn < 0):
                a, b, da = x, xs[i + 1], dx
                for _ in range(MAX_ITER):
                    m = 0.5 * (a + b)
                    if m <= a or m >= b:
                        break
                    dm = d(m)
                    if (dm < 0) == (da < 0):
                        a, da = m, dm
                    else:
                        b = m
                found.append(0.5 * (a + b))
    return found
