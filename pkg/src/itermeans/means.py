"""Constructors for two-variable operations built from monotone generators.

``make_C`` and ``make_D`` build the composition operations
``(f o g)^-1(f(x) * g(y))`` and ``(f o g)^-1(f(x) + g(y))``; they are usually
*not* means and no such claim is made here.  The remaining constructors
(``make_G``, ``make_A``, the quasi-geometric and quasi-arithmetic means and
the two mean-type mappings) always produce strict means.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Callable

from .errors import DomainError, MonotonicityError
from .monofunc import (
    POSITIVE,
    REAL,
    UNIT_RAY,
    Direction,
    Interval,
    MonotoneFn,
    compose,
    from_text,
    pointwise_difference,
    pointwise_product,
    pointwise_quotient,
    pointwise_sum,
)

__all__ = [
    "BivarOp",
    "MeanPair",
    "make_C",
    "make_D",
    "make_G",
    "make_A",
    "conjugate_G_to_A",
    "quasi_geometric",
    "quasi_arithmetic",
    "geometric_mean",
    "arithmetic_mean",
    "theorem5_MN",
    "corollary2_MN",
    "window",
]

DEFAULT_WINDOW = 50.0


@dataclass(frozen=True, eq=False)
class BivarOp:
    """A two-variable operation on ``domain x domain``."""

    func: Callable[[float, float], float]
    domain: Interval
    label: str = "op"
    provenance: str = ""

    def __call__(self, x: float, y: float) -> float:
        return self.func(x, y)

    def relabel(self, label: str, provenance: str | None = None) -> "BivarOp":
        return replace(self, label=label, provenance=self.provenance if provenance is None else provenance)

    @functools.cached_property
    def mean_report(self):
        """:class:`~itermeans.verify.MeanReport` on the default grid, computed once."""
        from .verify import check_mean, default_pair_grid

        return check_mean(self, default_pair_grid(self.domain, 12))


@dataclass(frozen=True)
class MeanPair:
    first: BivarOp
    second: BivarOp

    def __post_init__(self):
        if self.first.domain != self.second.domain:
            raise DomainError(f"mean pair domains differ: {self.first.domain} vs {self.second.domain}")

    @property
    def domain(self) -> Interval:
        return self.first.domain

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self.first(x, y), self.second(x, y)


def _common_domain(f: MonotoneFn, g: MonotoneFn) -> Interval:
    if f.domain != g.domain:
        raise DomainError(f"generators live on different domains: {f.domain} vs {g.domain}")
    return f.domain


def make_C(f: MonotoneFn, g: MonotoneFn) -> BivarOp:
    """``(x, y) -> (f o g)^-1(f(x) g(y))``."""
    domain = _common_domain(f, g)
    if domain.lo < 0:
        raise DomainError("C_{f,g} needs a multiplicative interval inside [0, inf)")
    fg = compose(f, g)

    def op(x, y):
        return fg.invert(f(x) * g(y))

    return BivarOp(op, domain, f"C[{f.label},{g.label}]", "make_C")


def make_D(f: MonotoneFn, g: MonotoneFn) -> BivarOp:
    """``(x, y) -> (f o g)^-1(f(x) + g(y))``."""
    domain = _common_domain(f, g)
    fg = compose(f, g)

    def op(x, y):
        return fg.invert(f(x) + g(y))

    return BivarOp(op, domain, f"D[{f.label},{g.label}]", "make_D")


def make_G(f: MonotoneFn, g: MonotoneFn) -> BivarOp:
    """Generalized weighted quasi-geometric mean ``(f g)^-1(f(x) g(y))``."""
    domain = _common_domain(f, g)
    if f.direction != g.direction:
        raise MonotonicityError("G_{f,g} needs f and g of the same monotonicity")
    prod = pointwise_product(f, g)

    def op(x, y):
        return prod.invert(f(x) * g(y))

    return BivarOp(op, domain, f"G[{f.label},{g.label}]", "make_G")


def make_A(phi: MonotoneFn, psi: MonotoneFn) -> BivarOp:
    """Generalized weighted quasi-arithmetic mean ``(phi + psi)^-1(phi(x) + psi(y))``."""
    domain = _common_domain(phi, psi)
    if phi.direction != psi.direction:
        raise MonotonicityError("A_{phi,psi} needs phi and psi of the same monotonicity")
    total = pointwise_sum(phi, psi)

    def op(x, y):
        return total.invert(phi(x) + psi(y))

    return BivarOp(op, domain, f"A[{phi.label},{psi.label}]", "make_A")


@functools.lru_cache(maxsize=None)
def _log_fn() -> MonotoneFn:
    return from_text("log(x)", POSITIVE)


def conjugate_G_to_A(f: MonotoneFn, g: MonotoneFn) -> tuple[MonotoneFn, MonotoneFn]:
    """``(log o f, log o g)``, so that ``make_A`` of the pair equals ``make_G(f, g)``."""
    for h in (f, g):
        if h.codomain.lo < 0 or (h.codomain.lo == 0 and not h.codomain.lo_open):
            raise DomainError(f"{h.label} must take positive values, codomain is {h.codomain}")
    log = _log_fn()
    return compose(log, f), compose(log, g)


def quasi_geometric(f: MonotoneFn) -> BivarOp:
    """``G_f(x, y) = f^-1(sqrt(f(x) f(y)))``."""

    def op(x, y):
        return f.invert(math.sqrt(f(x) * f(y)))

    return BivarOp(op, f.domain, f"Gf[{f.label}]", "quasi_geometric")


def quasi_arithmetic(f: MonotoneFn) -> BivarOp:
    """``A_f(x, y) = f^-1((f(x) + f(y)) / 2)``."""

    def op(x, y):
        return f.invert(0.5 * (f(x) + f(y)))

    return BivarOp(op, f.domain, f"Af[{f.label}]", "quasi_arithmetic")


def geometric_mean(domain: Interval = UNIT_RAY) -> BivarOp:
    return BivarOp(lambda x, y: math.sqrt(x * y), domain, "geometric", "geometric_mean")


def arithmetic_mean(domain: Interval = UNIT_RAY) -> BivarOp:
    return BivarOp(lambda x, y: 0.5 * (x + y), domain, "arithmetic", "arithmetic_mean")


def _require_increasing(*fns: MonotoneFn):
    for h in fns:
        if h.direction != Direction.INCREASING:
            raise MonotonicityError(f"{h.label} must be strictly increasing")


def theorem5_MN(f: MonotoneFn, g: MonotoneFn) -> MeanPair:
    """The mapping ``M = f^-1(g(y)/g(x) f(x))``, ``N = f^-1(g(x)/g(y) f(y))``.

    Needs ``f``, ``g`` and ``f/g`` increasing on ``(0, inf)``; then
    ``M = G_{f/g, g}`` and ``N = G_{g, f/g}`` and ``G_f`` is the invariant mean.
    """
    _require_increasing(f, g)
    _common_domain(f, g)
    pointwise_quotient(f, g, expect=Direction.INCREASING)

    def m(x, y):
        return f.invert(g(y) / g(x) * f(x))

    def n(x, y):
        return f.invert(g(x) / g(y) * f(y))

    return MeanPair(
        BivarOp(m, f.domain, f"M[{f.label},{g.label}]", "theorem5_MN"),
        BivarOp(n, f.domain, f"N[{f.label},{g.label}]", "theorem5_MN"),
    )


def corollary2_MN(f: MonotoneFn, g: MonotoneFn) -> MeanPair:
    """The additive mirror ``M = f^-1(g(y) - g(x) + f(x))``, ``N = f^-1(g(x) - g(y) + f(y))``.

    Needs ``f``, ``g`` and ``f - g`` increasing; ``A_f`` is then invariant.
    """
    _require_increasing(f, g)
    _common_domain(f, g)
    pointwise_difference(f, g, expect=Direction.INCREASING)

    def m(x, y):
        return f.invert(g(y) - g(x) + f(x))

    def n(x, y):
        return f.invert(g(x) - g(y) + f(y))

    return MeanPair(
        BivarOp(m, f.domain, f"M[{f.label},{g.label}]", "corollary2_MN"),
        BivarOp(n, f.domain, f"N[{f.label},{g.label}]", "corollary2_MN"),
    )


def window(width: float = DEFAULT_WINDOW) -> Interval:
    """Finite stand-in ``(-width, width)`` for the real line."""
    if width == math.inf:
        return REAL
    return Interval(-width, width)
