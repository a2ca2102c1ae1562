import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itermeans.errors import DivergenceError, GeneratorClassError, MonotonicityError
from itermeans.iterprod import (
    MAX_TERMS,
    convergence_report,
    evaluate_product,
    infinite_product,
    iterative_mean,
    product_iterative_mean,
    product_partial,
)
from itermeans.monofunc import POSITIVE, from_text

NON_POWER_MEAN = iterative_mean(from_text("x^2+x-1"))


class TestProductPartial:
    def test_single_factor(self):
        assert product_partial(from_text("x^2"), 0, 3.0) == 3.0

    def test_two_steps(self):
        # 4 * 4^(1/2) * 4^(1/4)
        assert product_partial(from_text("x^2"), 2, 4.0) == pytest.approx(8 * math.sqrt(2), rel=1e-14)

    def test_approaches_limit(self):
        assert product_partial(from_text("x^2"), 60, 3.0) == pytest.approx(9.0, rel=1e-12)

    def test_needs_above_generator(self):
        with pytest.raises(GeneratorClassError):
            product_partial(from_text("x^(1/2)"), 3, 2.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1.001, 1e3), st.integers(0, 30))
    def test_nondecreasing_in_n(self, x, n):
        g = from_text("x^(3/2)")
        assert product_partial(g, n + 1, x) >= product_partial(g, n, x)

    def test_increasing_in_x(self):
        g = from_text("x^2+x-1")
        vals = [product_partial(g, 5, x) for x in np.geomspace(1.1, 50, 12)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestInfiniteProduct:
    def test_square(self):
        assert infinite_product(from_text("x^2"))(3.0) == pytest.approx(9.0, rel=1e-12)

    def test_weight_one_third(self):
        f = infinite_product(from_text("x^(1/(1-1/3))"))
        assert f(2.0) == pytest.approx(8.0, rel=1e-12)

    def test_below_generator_diverges(self):
        with pytest.raises(DivergenceError):
            infinite_product(from_text("x^(1/2)"))

    def test_decreasing_generator_rejected(self):
        with pytest.raises(MonotonicityError):
            infinite_product(from_text("1/x", POSITIVE))

    def test_power_shortcut_inverse(self):
        f = infinite_product(from_text("x^2"))
        assert f.power == 2.0
        assert f.invert(36.0) == pytest.approx(6.0, rel=1e-14)
        slow = infinite_product(from_text("x^2"), power_shortcut=False)
        assert slow.inverse_func is None
        assert slow.invert(36.0) == pytest.approx(6.0, rel=1e-10)

    def test_scale_multiplier(self):
        f = infinite_product(from_text("x^2"), scale=3.0)
        assert f(2.0) == pytest.approx(12.0, rel=1e-12)

    @pytest.mark.parametrize("text", ["x^2", "x^(4/3)", "x^2+x-1", "x*(1+log(x))"])
    def test_functional_equation(self, text):
        g = from_text(text)
        f = infinite_product(g)
        for x in np.geomspace(1.01, 50, 15):
            assert f(g(x)) == pytest.approx(f(x) * g(x), rel=1e-8)

    def test_value_dominates_x(self):
        f = infinite_product(from_text("x^2+x-1"))
        for x in (1.2, 3.0, 40.0):
            assert f(x) >= x

    def test_max_terms_exhaustion(self):
        with pytest.raises(DivergenceError):
            infinite_product(from_text("x^(1.001)"), max_terms=50)


class TestEvaluateProduct:
    def test_below_fails_at_first_term(self):
        ev = evaluate_product(from_text("x^(1/2)").invert, 2.0)
        assert not ev.converged and ev.terms == 1

    def test_rejects_points_outside(self):
        assert not evaluate_product(from_text("x^2").invert, 1.0).converged

    def test_tail_bound_covers_error(self):
        g = from_text("x^2")
        for x in (1.5, 10.0, 1e3):
            ev = evaluate_product(g.invert, x)
            truncation = math.expm1(math.log(x) * 0.5 ** ev.terms)
            assert ev.tail_bound >= truncation


class TestConvergenceReport:
    def test_converged(self):
        rep = convergence_report(from_text("x^2"), [1.5, 2, 10], tol=1e-10)
        assert rep.converged and rep.divergence_witness is None
        assert rep.max_tail_bound <= 1e-10

    def test_diverged(self):
        rep = convergence_report(from_text("x^(1/2)"), [2.0])
        assert not rep.converged and rep.divergence_witness == 2.0

    def test_empty(self):
        rep = convergence_report(from_text("x^2"), [])
        assert rep.converged and rep.terms_used == []

    def test_default_is_max_terms(self):
        assert MAX_TERMS == 10_000


class TestIterativeMeans:
    def test_square_generator(self):
        cg = iterative_mean(from_text("x^2"))
        assert cg(4, 9) == pytest.approx(6.0, rel=1e-12)
        assert cg(5, 5) == pytest.approx(5.0, rel=1e-12)

    def test_weight_one_third(self):
        cg = iterative_mean(from_text("x^(3/2)"))
        assert cg(8, 4096) == pytest.approx(64.0, rel=1e-12)

    @pytest.mark.parametrize("w", [0.25, 0.5, 0.75])
    def test_power_closed_form(self, w):
        cg = iterative_mean(from_text(f"x^(1/(1-{w}))"))
        for x in np.geomspace(1.01, 100, 20):
            for y in np.geomspace(1.01, 100, 20):
                assert cg(x, y) == pytest.approx(x ** (1 - w) * y ** w, rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1.01, 1e3), st.floats(1.01, 1e3))
    def test_strict_internality_non_power(self, x, y):
        cg = NON_POWER_MEAN
        v = cg(x, y)
        lo, hi = min(x, y), max(x, y)
        if hi - lo > 1e-6 * hi:
            assert lo < v < hi
        assert cg(x, x) == pytest.approx(x, rel=1e-9)

    def test_product_iterative_mean(self):
        assert product_iterative_mean(from_text("x^(1/2)"))(4, 16) == pytest.approx(8.0, rel=1e-12)
        cr = product_iterative_mean(from_text("x^(1/3)"))
        assert cr(8, 8) == pytest.approx(8.0, rel=1e-12)
        assert cr(8, 64) == pytest.approx(32.0, rel=1e-12)

    def test_product_iterative_mean_needs_below(self):
        with pytest.raises(GeneratorClassError):
            product_iterative_mean(from_text("x^2"))
