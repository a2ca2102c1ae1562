import math

import numpy as np
import pytest

from itermeans.errors import DivergenceError
from itermeans.iterprod import infinite_product, iterative_mean
from itermeans.means import BivarOp, geometric_mean, make_C, make_G
from itermeans.monofunc import POSITIVE, UNIT_RAY, compose, from_text
from itermeans.verify import (
    GRID_CERTIFIED,
    check_mean,
    check_reflexive_C,
    default_pair_grid,
    eq11_residual,
    equality_A,
    equality_C,
    equality_D,
    equality_G,
    pair_grid,
    remark5_residual,
    remark5_search,
    symmetry_analysis,
    theorem4_construct,
)

PTS = pair_grid(np.geomspace(1.01, 100, 12))


class TestCheckMean:
    def test_geometric(self):
        rep = check_mean(geometric_mean(), PTS)
        assert rep.reflexive and rep.internal and rep.strict and rep.symmetric
        assert rep.internality_witness is None
        assert rep.grid_size == len(PTS)

    def test_fourth_power_composite_is_not_a_mean(self):
        C = make_C(from_text("x^4"), from_text("x^4"))
        rep = check_mean(C, [(4.0, 9.0)])
        assert not rep.internal
        x, y, value = rep.internality_witness
        assert (x, y) == (4.0, 9.0) and value == pytest.approx(math.sqrt(6))

    def test_projection_is_not_strict(self):
        rep = check_mean(BivarOp(lambda x, y: x, UNIT_RAY), PTS)
        assert rep.reflexive and rep.internal and not rep.strict
        assert not rep.symmetric
        assert rep.is_mean and not rep.is_strict_mean

    def test_failing_evaluation_gives_nan_witness(self):
        def broken(x, y):
            raise ArithmeticError("boom")

        rep = check_mean(BivarOp(broken, UNIT_RAY), [(2.0, 3.0)])
        assert not rep.internal and math.isnan(rep.internality_witness[2])

    def test_default_grid(self):
        pts = default_pair_grid(UNIT_RAY, 5)
        assert len(pts) == 25 and min(min(p) for p in pts) > 1


class TestReflexivity:
    def test_product_partner(self):
        g = from_text("x^2")
        assert check_reflexive_C(infinite_product(g), g)

    def test_mismatched(self):
        assert not check_reflexive_C(from_text("x^2"), from_text("x^3"))

    def test_squares(self):
        assert check_reflexive_C(from_text("x^2"), from_text("x^2"))

    def test_non_power_product_partner(self):
        g = from_text("x*(1+log(x))")
        f = infinite_product(g)
        assert check_reflexive_C(f, g, np.geomspace(1.01, 100, 20))
        assert check_mean(iterative_mean(g), PTS).is_strict_mean
        assert not check_reflexive_C(compose(f, from_text("x^2")), g, np.geomspace(1.01, 100, 20))


class TestSymmetry:
    def test_squares(self):
        rep = symmetry_analysis(from_text("x^2"), from_text("x^2"))
        assert rep.symmetric and rep.c == pytest.approx(1.0)
        assert rep.square_generator and rep.geometric_mean_case

    def test_scaled(self):
        rep = symmetry_analysis(from_text("x^2"), from_text("3*x^2"))
        assert rep.symmetric and rep.c == pytest.approx(3.0) and rep.proportional

    def test_asymmetric(self):
        f, g = from_text("x^2"), from_text("x^3")
        assert not symmetry_analysis(f, g).symmetric
        C = make_C(f, g)
        assert C(2, 3) != pytest.approx(C(3, 2))


class TestConjugateGeneratorConstruction:
    def test_square(self):
        f, g = theorem4_construct(from_text("x^2"))
        for x in (1.5, 3.0, 20.0):
            assert g(x) == pytest.approx(x ** 2, rel=1e-10)
            assert f(x) == pytest.approx(x ** 2, rel=1e-10)

    def test_fourth_power(self):
        f, g = theorem4_construct(from_text("x^4"))
        assert g(3.0) == pytest.approx(3 ** (4 / 3), rel=1e-10)
        assert f(3.0) == pytest.approx(3 ** 4, rel=1e-10)

    def test_below_diverges(self):
        with pytest.raises(DivergenceError):
            theorem4_construct(from_text("x^(1/2)"))


class TestCompositeEquation:
    def test_square(self):
        rep = eq11_residual(from_text("x^2"), [2.0])
        assert rep.lhs_values[0] == pytest.approx(16.0, rel=1e-10)
        assert rep.rhs_values[0] == pytest.approx(2 ** (4 / 3), rel=1e-10)
        assert not rep.satisfied

    def test_fourth_power_exponents(self):
        x = 3.0
        rep = eq11_residual(from_text("x^4"), [x])
        assert math.log(rep.lhs_values[0]) / math.log(x) == pytest.approx(16 / 3, abs=1e-9)
        assert math.log(rep.rhs_values[0]) / math.log(x) == pytest.approx(16 / 13, abs=1e-9)

    def test_empty_grid(self):
        rep = eq11_residual(from_text("x^2"), [])
        assert rep.satisfied and rep.max_relative_gap == 0.0


class TestDerivativeSystem:
    @pytest.mark.parametrize(
        "abc, expected",
        [((2, 2, 2), (0, 0, 8)), ((2, 2, 1), (0, -1, 2)), ((1, 1, 1), (-1, -1, -1))],
    )
    def test_residual(self, abc, expected):
        assert remark5_residual(*abc) == expected

    def test_point_box(self):
        assert remark5_search(2, 2, 10).min_norm == pytest.approx(8.0)

    def test_refinement_never_worse(self):
        res = remark5_search(1, 10, 30)
        assert res.min_norm <= res.grid_min_norm
        assert all(1 <= v <= 10 for v in res.argmin)

    def test_rejects_box_below_one(self):
        with pytest.raises(ValueError):
            remark5_search(0.5, 2, 10)


class TestEqualityC:
    def test_identical(self):
        f, g = from_text("x^2"), from_text("x^3")
        rep = equality_C(f, g, f, g)
        assert rep.equal and rep.fitted_params["a"] == pytest.approx(1.0)
        assert rep.note == GRID_CERTIFIED and not rep.anomaly

    def test_scaled(self):
        g = from_text("x^3")
        rep = equality_C(from_text("5*x^2"), g, from_text("x^2"), g)
        assert rep.equal and rep.fitted_params["a"] == pytest.approx(5.0)

    def test_different(self):
        f = from_text("x^2")
        rep = equality_C(f, from_text("x^3"), f, from_text("x^2"))
        assert not rep.equal and not rep.structural_match


class TestEqualityD:
    def test_shift(self):
        x = from_text("x")
        rep = equality_D(from_text("2*x+3"), x, from_text("2*x"), x)
        assert rep.equal and rep.fitted_params["a"] == pytest.approx(3.0)

    def test_different(self):
        f = from_text("2*x")
        assert not equality_D(f, from_text("x"), f, from_text("2*x")).equal

    def test_identical(self):
        f, g = from_text("x^2"), from_text("x")
        rep = equality_D(f, g, f, g)
        assert rep.equal and rep.fitted_params["a"] == pytest.approx(0.0, abs=1e-12)


class TestEqualityG:
    def test_identical(self):
        f, g = from_text("x"), from_text("x^2")
        p = equality_G(f, g, f, g).fitted_params
        assert (p["a"], p["b"], p["c"]) == pytest.approx((1, 1, 1))

    def test_planted(self):
        rep = equality_G(from_text("x"), from_text("x^2"), from_text("4*(x)^2"), from_text("9*(x^2)^2"))
        assert rep.equal
        assert rep.fitted_params == pytest.approx({"a": 2, "b": 4, "c": 9})

    def test_mismatched_exponents(self):
        f, g = from_text("x"), from_text("x^2")
        rep = equality_G(f, g, from_text("x^2"), from_text("(x^2)^3"))
        assert not rep.equal
        G1, G2 = make_G(f, g), make_G(from_text("x^2"), from_text("(x^2)^3"))
        assert G1(2, 8) != pytest.approx(G2(2, 8))

    def test_fit_and_verify_on_disjoint_grids(self):
        f, g = from_text("x+log(x)"), from_text("x^2")
        fbar, gbar = from_text("2*(x+log(x))^3"), from_text("5*x^6")
        fit = equality_G(f, g, fbar, gbar, grid=pair_grid(np.geomspace(1.1, 30, 8)))
        check = equality_G(f, g, fbar, gbar, grid=pair_grid(np.geomspace(1.3, 70, 9)))
        assert fit.equal and check.equal
        assert fit.fitted_params["a"] == pytest.approx(3.0)


class TestEqualityA:
    def test_identical(self):
        phi, psi = from_text("x"), from_text("x^2")
        p = equality_A(phi, psi, phi, psi).fitted_params
        assert (p["alpha"], p["beta"], p["gamma"]) == pytest.approx((1, 0, 0), abs=1e-9)

    def test_affine(self):
        phi, psi = from_text("x"), from_text("x^2")
        rep = equality_A(phi, psi, from_text("2*x+1"), from_text("2*x^2-3"))
        assert rep.equal
        p = rep.fitted_params
        assert (p["alpha"], p["beta"], p["gamma"]) == pytest.approx((2, 1, -3))

    def test_square_is_different(self):
        x = from_text("x")
        rep = equality_A(x, x, from_text("x^2"), x)
        assert not rep.equal
        assert rep.max_residual > 1e-3

    def test_anomaly_flag(self):
        # scaling only one of the generators keeps the structure check off
        phi, psi = from_text("x", POSITIVE), from_text("x", POSITIVE)
        rep = equality_A(phi, psi, from_text("2*x", POSITIVE), psi)
        assert not rep.equal and not rep.structural_match and not rep.anomaly
