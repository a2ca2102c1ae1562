import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itermeans.errors import DomainError, MonotonicityError, RangeError
from itermeans.monofunc import (
    DEFAULT_TOL,
    POSITIVE,
    REAL,
    UNIT_RAY,
    Direction,
    GeneratorClass,
    Interval,
    MonotoneFn,
    check_monotone,
    classify_generator,
    compose,
    fixpoint_scan,
    from_text,
    identity,
    iterate,
    pointwise_difference,
    pointwise_product,
    pointwise_quotient,
    pointwise_sum,
)

# inversion is bisection to relative tolerance 1e-12; round trips may lose 10x that
ROUND_TRIP = 10 * DEFAULT_TOL


class TestInterval:
    def test_parse_forms(self):
        assert Interval.parse("1,inf") == UNIT_RAY
        assert Interval.parse("(0,inf)") == POSITIVE
        closed = Interval.parse("[1,10]")
        assert not closed.lo_open and not closed.hi_open

    def test_str_round_trip(self):
        for iv in (UNIT_RAY, POSITIVE, REAL, Interval(1, 10, False, False)):
            assert Interval.parse(str(iv)) == iv

    def test_open_endpoints(self):
        assert not UNIT_RAY.contains(1.0)
        assert UNIT_RAY.contains(1.0 + 1e-12)
        assert not UNIT_RAY.contains(math.nan)

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            Interval(2.0, 1.0)

    def test_default_grid_on_unit_ray(self):
        pts = UNIT_RAY.grid(257)
        assert len(pts) == 257
        assert pts[0] == pytest.approx(1 + 1e-9, rel=1e-15)
        assert pts[-1] == pytest.approx(1e6)
        assert all(a < b for a, b in zip(pts, pts[1:]))

    def test_subset(self):
        assert Interval(2, math.inf).issubset(UNIT_RAY)
        assert not POSITIVE.issubset(UNIT_RAY)


class TestEvalInvert:
    def test_eval(self):
        assert from_text("x^2")(3.0) == 9.0
        assert identity()(7.25) == 7.25
        assert from_text("x^(1/(1-1/2))")(3.0) == pytest.approx(9.0, rel=1e-15)

    def test_invert(self):
        f = from_text("x^2")
        assert f.invert(9.0) == pytest.approx(3.0, rel=1e-12)
        assert f.invert(16.0) == pytest.approx(4.0, rel=1e-12)

    def test_invert_example_two_composite(self):
        # (f o g)(x) = x^(1/(w(1-w))) at w = 1/2 is x^4
        f = from_text("x^(1/(0.5*(1-0.5)))")
        assert f.invert(36.0) == pytest.approx(math.sqrt(6), rel=1e-12)

    def test_bisection_without_symbolic_inverse(self):
        f = from_text("x+x^3")
        assert f.inverse_func is None
        assert f.invert(10.0) == pytest.approx(2.0, abs=ROUND_TRIP * 2.0)

    def test_decreasing_bisection(self):
        f = from_text("1/(x+x^3)", POSITIVE)
        assert f.direction == Direction.DECREASING
        assert f.invert(0.1) == pytest.approx(2.0, abs=ROUND_TRIP * 2.0)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            from_text("x^2")(0.5)

    def test_outside_codomain(self):
        with pytest.raises(RangeError):
            from_text("x^2").invert(0.5)

    @settings(max_examples=50)
    @given(st.floats(1.0, 1e5, exclude_min=True))
    def test_round_trip(self, x):
        f = from_text("x+log(x)")
        assert abs(f.invert(f(x)) - x) <= ROUND_TRIP * max(1.0, abs(x))


class TestCompose:
    def test_powers(self):
        assert compose(from_text("x^2"), from_text("x^3"))(2.0) == 64.0

    def test_identity(self):
        g = from_text("x+log(x)")
        fg = compose(identity(), g)
        for x in (1.5, 4.0, 90.0):
            assert fg(x) == g(x)

    def test_example_two_composition(self):
        fg = compose(from_text("x^(1/0.5)"), from_text("x^(1/(1-0.5))"))
        assert fg(2.0) == pytest.approx(16.0, rel=1e-15)
        assert fg.power == 4.0

    def test_two_decreasing_make_increasing(self):
        r = from_text("1/x", POSITIVE)
        rr = compose(r, r)
        assert rr.direction == Direction.INCREASING
        check_monotone(rr, Interval(0.1, 10), expect=Direction.INCREASING)

    def test_codomain_must_fit(self):
        with pytest.raises(DomainError):
            compose(from_text("x^2"), from_text("x", POSITIVE))


class TestPointwise:
    def test_product(self):
        assert pointwise_product(from_text("x"), from_text("x"))(3.0) == 9.0
        assert pointwise_product(from_text("x^2"), from_text("x^3"))(2.0) == 32.0

    def test_example_two_product(self):
        p = pointwise_product(from_text("x^(1/0.5)"), from_text("x^(1/(1-0.5))"))
        assert p(2.0) == pytest.approx(16.0)
        assert p.invert(16.0) == pytest.approx(2.0, rel=1e-12)

    def test_mixed_directions_rejected(self):
        with pytest.raises(MonotonicityError):
            pointwise_product(from_text("x", POSITIVE), from_text("1/x", POSITIVE))

    def test_quotient_and_difference_validate(self):
        q = pointwise_quotient(from_text("x^3", POSITIVE), from_text("x", POSITIVE), expect=Direction.INCREASING)
        assert q(3.0) == pytest.approx(9.0)
        with pytest.raises(MonotonicityError):
            pointwise_quotient(from_text("x", POSITIVE), from_text("x^3", POSITIVE), expect=Direction.INCREASING)
        with pytest.raises(MonotonicityError):
            pointwise_difference(from_text("x"), from_text("2*x"), expect=Direction.INCREASING)

    def test_sum(self):
        assert pointwise_sum(from_text("x"), from_text("x^2"))(3.0) == 12.0


class TestIterate:
    def test_forward(self):
        assert iterate(from_text("x^2"), 3)(2.0) == 256.0

    def test_backward(self):
        assert iterate(from_text("x^2"), -2)(16.0) == pytest.approx(2.0, rel=1e-12)

    def test_zero(self):
        assert iterate(from_text("x^2"), 0)(5.0) == 5.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(-4, 4), st.integers(-4, 4), st.floats(1.01, 2.0))
    def test_composition_law(self, m, n, x):
        # a bijection of (1, inf) without a symbolic inverse
        g = from_text("(x^2+x)/2")
        inner = iterate(g, n)(x)
        lhs = iterate(g, m + n)(x)
        rhs = iterate(g, m)(inner)
        assert lhs == pytest.approx(rhs, rel=1e-9)


class TestGenerators:
    def test_classes(self):
        assert classify_generator(from_text("x^2")) == GeneratorClass.ABOVE
        assert classify_generator(from_text("x^(1/2)")) == GeneratorClass.BELOW
        assert classify_generator(identity()) == GeneratorClass.HAS_INTERIOR_FIXPOINT

    def test_interior_crossing(self):
        # (x^2+3)/4 meets the diagonal at 3
        assert classify_generator(from_text("x^2/4+3/4")) == GeneratorClass.HAS_INTERIOR_FIXPOINT

    @pytest.mark.parametrize("w", [0.2, 0.5, 0.9])
    def test_inverse_of_below_is_above(self, w):
        r = from_text(f"x^{w}")
        grid = np.geomspace(1.01, 1e3, 25)
        assert classify_generator(r, grid) == GeneratorClass.BELOW
        assert classify_generator(r.inverse(), grid) == GeneratorClass.ABOVE

    def test_fixpoints(self):
        assert fixpoint_scan(from_text("x^2")) == []
        assert fixpoint_scan(from_text("x^(1/2)")) == []
        found = fixpoint_scan(from_text("x^2", POSITIVE))
        assert len(found) == 1 and found[0] == pytest.approx(1.0, abs=1e-9)


class TestMonotoneFnType:
    def test_frozen(self):
        f = from_text("x^2")
        with pytest.raises(AttributeError):
            f.label = "g"

    def test_inverse_object(self):
        f = from_text("x^3")
        inv = f.inverse()
        assert inv(27.0) == pytest.approx(3.0)
        assert inv.invert(3.0) == pytest.approx(27.0)
        assert isinstance(inv, MonotoneFn)
