"""
Tests for kernel.py - Green's function, basis and right-hand sides.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from optimal_quadrature.errors import DimensionError, InvalidParameterError, SolvabilityError
from optimal_quadrature.expsum import green_mp, make_context
from optimal_quadrature.kernel import (
    BasisKind,
    MultiplierSet,
    ProblemConfig,
    basis_integral,
    check_order,
    conjugate_basis,
    exactness_basis,
    f_value,
    g1,
    g2,
    green_double_integral,
    green_value,
    p_value,
    q_value,
)


class TestCheckOrder:
    """Test validation of the space order."""

    def test_odd_orders_accepted(self):
        assert check_order(1) == 1
        assert check_order(np.int64(5)) == 5

    def test_even_order_rejected(self):
        with pytest.raises(InvalidParameterError, match="m must be odd"):
            check_order(2)

    def test_nonpositive_order_rejected(self):
        with pytest.raises(InvalidParameterError, match="positive"):
            check_order(-1)

    def test_non_integer_order_rejected(self):
        with pytest.raises(InvalidParameterError, match="integer"):
            check_order(1.5)
        with pytest.raises(InvalidParameterError, match="integer"):
            check_order(True)


class TestProblemConfig:
    """Test grid configuration."""

    def test_grid(self):
        config = ProblemConfig(3, 4)
        assert config.h == 0.25
        assert config.pairs == 1
        np.testing.assert_allclose(config.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_too_few_nodes(self):
        with pytest.raises(SolvabilityError, match="N \\+ 1 >= m"):
            ProblemConfig(5, 3)

    def test_smallest_solvable_grid(self):
        assert ProblemConfig(5, 4).N == 4

    def test_invalid_interval_count(self):
        with pytest.raises(InvalidParameterError, match="N must be a positive integer"):
            ProblemConfig(1, 0)


class TestGreenValue:
    """Test the Green's function G_m."""

    def test_vanishes_at_origin(self):
        for m in (1, 3, 5, 7):
            assert green_value(m, 0.0) == 0.0

    def test_m1_closed_form(self):
        assert green_value(1, 0.5) == pytest.approx(math.sinh(0.5) / 2, rel=1e-14)
        assert green_value(1, 0.5) == pytest.approx(0.2605477, abs=1e-7)
        assert green_value(1, 5.0) == pytest.approx(math.sinh(5.0) / 2, rel=1e-14)

    def test_even(self):
        x = np.linspace(-6.0, 6.0, 25)
        for m in (1, 3, 5):
            np.testing.assert_allclose(green_value(m, x), green_value(m, -x), rtol=0, atol=0)

    def test_even_at_random_points(self):
        x = np.random.default_rng(11).uniform(-2.0, 2.0, 1000)
        for m in (1, 3, 5):
            values = green_value(m, x)
            assert np.all(np.abs(values - green_value(m, -x)) <= 1e-14 * (1 + np.abs(values)))

    def test_m1_solves_the_ode_away_from_origin(self):
        # G_1'' - G_1 = 0 for x != 0, by central differences
        step = 1e-4
        x = np.concatenate([np.linspace(0.01, 0.1, 10), -np.linspace(0.01, 0.1, 10)])
        second = (green_value(1, x + step) - 2 * green_value(1, x) + green_value(1, x - step)) / step ** 2
        assert np.max(np.abs(second - green_value(1, x))) <= 1e-6

    def test_shape_preserved(self):
        x = np.linspace(0.0, 1.0, 6).reshape(2, 3)
        assert green_value(3, x).shape == (2, 3)
        assert isinstance(green_value(3, 0.25), float)

    @pytest.mark.parametrize("m", [1, 3, 5, 7])
    def test_matches_extended_precision(self, m):
        ctx = make_context(40)
        for x in (1e-3, 0.3, 1.0, 3.9, 4.1, 7.5):
            expected = float(green_mp(ctx, m, x))
            assert green_value(m, x) == pytest.approx(expected, rel=1e-12)


class TestFValue:
    """Test f_m, the Green's function integrated over [0, 1]."""

    def test_m1_values(self):
        assert f_value(1, 0.0) == pytest.approx((math.cosh(1.0) - 1.0) / 2, rel=1e-14)
        assert f_value(1, 0.0) == pytest.approx(0.2715403, abs=1e-7)
        assert f_value(1, 0.5) == pytest.approx(math.cosh(0.5) - 1.0, rel=1e-14)
        assert f_value(1, 0.5) == pytest.approx(0.1276260, abs=1e-7)

    @pytest.mark.parametrize("m", [3, 5])
    def test_matches_quadrature(self, m):
        for x in (0.0, 0.25, 0.6, 1.0):
            expected, _ = integrate.quad(
                lambda t: green_value(m, t - x), 0.0, 1.0, points=[x], epsabs=1e-15, epsrel=1e-13
            )
            assert f_value(m, x) == pytest.approx(expected, rel=1e-10, abs=1e-15)

    @pytest.mark.parametrize("m", [1, 3, 5])
    def test_matches_quadrature_at_random_points(self, m):
        for x in np.random.default_rng(m).uniform(0.0, 1.0, 200):
            left, _ = integrate.quad(lambda t: green_value(m, t - x), 0.0, x, epsabs=1e-15, epsrel=1e-13)
            right, _ = integrate.quad(lambda t: green_value(m, t - x), x, 1.0, epsabs=1e-15, epsrel=1e-13)
            assert f_value(m, x) == pytest.approx(left + right, abs=1e-11)

    def test_symmetric_about_midpoint(self):
        x = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(f_value(3, x), f_value(3, 1.0 - x), rtol=1e-13)

    def test_outside_unit_interval(self):
        expected, _ = integrate.quad(lambda t: green_value(1, t + 0.5), 0.0, 1.0, epsabs=1e-15)
        assert f_value(1, -0.5) == pytest.approx(expected, rel=1e-12)


class TestGreenDoubleIntegral:
    """Test the double integral of G_m over the unit square."""

    def test_m1(self):
        assert green_double_integral(1) == pytest.approx(math.sinh(1.0) - 1.0, rel=1e-14)

    @pytest.mark.parametrize("m", [1, 3, 5])
    def test_matches_quadrature(self, m):
        expected, _ = integrate.quad(lambda x: f_value(m, x), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
        assert green_double_integral(m) == pytest.approx(expected, rel=1e-10, abs=1e-14)


class TestQValue:
    """Test the tail function Q."""

    def test_m1(self):
        assert q_value(1, 0.0) == pytest.approx((1.0 - math.exp(-1.0)) / 2, rel=1e-14)
        assert q_value(1, 0.0) == pytest.approx(0.3160603, abs=1e-7)
        assert q_value(1, 1.0) == pytest.approx((math.e - 1.0) / 2, rel=1e-14)

    def test_m3_extended_precision(self):
        ctx = make_context(50)
        x = ctx.mpf("-0.2")
        expected = ctx.exp(x) * (1 - ctx.exp(-1)) / 2
        theta = 2 * ctx.pi / 3
        c, s = ctx.cos(theta), ctx.sin(theta)
        expected += ctx.exp(x * c) * (ctx.cos(x * s) - ctx.exp(-c) * ctx.cos((x - 1) * s))
        assert q_value(3, -0.2) == pytest.approx(float(expected), rel=1e-13)

    def test_array_input(self):
        values = q_value(3, np.array([-0.5, 0.0, 1.5]))
        assert values.shape == (3,)
        assert values[1] == pytest.approx(q_value(3, 0.0))


class TestPValue:
    """Test the exponential polynomial P."""

    def test_zero_coefficients(self):
        mult = MultiplierSet(0.0, (0.0,), (0.0,))
        np.testing.assert_array_equal(p_value(3, np.linspace(-1.0, 2.0, 7), mult), 0.0)

    def test_m1_is_decaying_exponential(self):
        mult = MultiplierSet(1.0)
        x = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(p_value(1, x, mult), np.exp(-x), rtol=1e-15)

    def test_m3_at_origin(self):
        assert p_value(3, 0.0, MultiplierSet(2.0, (3.0,), (5.0,))) == pytest.approx(5.0)

    def test_m3_matches_basis(self):
        mult = MultiplierSet(2.0, (3.0,), (5.0,))
        basis = exactness_basis(3)
        x = np.linspace(-1.0, 2.0, 13)
        expected = 2.0 * np.exp(-x) + 3.0 * basis[1](x) + 5.0 * basis[2](x)
        np.testing.assert_allclose(p_value(3, x, mult), expected, rtol=1e-13)

    def test_order_mismatch(self):
        with pytest.raises(DimensionError, match="expected 3 multipliers"):
            p_value(3, 0.0, MultiplierSet(1.0))


class TestMultiplierSet:
    """Test multiplier packing."""

    def test_vector_round_trip(self):
        mult = MultiplierSet.from_vector([1.0, 2.0, 3.0, 4.0, 5.0])
        assert mult.d0 == 1.0
        assert mult.d1 == (2.0, 3.0)
        assert mult.d2 == (4.0, 5.0)
        assert mult.order == 5
        np.testing.assert_array_equal(mult.as_vector(), [1.0, 2.0, 3.0, 4.0, 5.0])

    def test_even_vector_rejected(self):
        with pytest.raises(DimensionError, match="odd length"):
            MultiplierSet.from_vector([1.0, 2.0])

    def test_unequal_pairs_rejected(self):
        with pytest.raises(DimensionError, match="equal length"):
            MultiplierSet(1.0, (2.0,), ())

    def test_to_dict(self):
        assert MultiplierSet(1.0, (2.0,), (3.0,)).to_dict() == {"d0": 1.0, "d1": [2.0], "d2": [3.0]}


class TestExactnessBasis:
    """Test the exactness basis and its integrals."""

    def test_sizes_and_order(self):
        for m in (1, 3, 5, 7):
            basis = exactness_basis(m)
            assert len(basis) == m
            assert basis[0].kind is BasisKind.EXP
        basis = exactness_basis(5)
        assert [b.kind for b in basis[1:]] == [
            BasisKind.EXP_COS, BasisKind.EXP_COS, BasisKind.EXP_SIN, BasisKind.EXP_SIN,
        ]

    def test_m3_members(self):
        x = np.linspace(0.0, 1.0, 5)
        exp_cos, exp_sin = exactness_basis(3)[1:]
        r3 = math.sqrt(3.0)
        np.testing.assert_allclose(exp_cos(x), np.exp(x / 2) * np.cos(r3 * x / 2), rtol=1e-14)
        np.testing.assert_allclose(exp_sin(x), np.exp(x / 2) * np.sin(r3 * x / 2), atol=1e-15)

    def test_exponential_integral(self):
        assert basis_integral(exactness_basis(1)[0]) == pytest.approx(0.6321206, abs=1e-7)

    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_integrals_match_quadrature(self, m):
        for b in exactness_basis(m):
            expected, _ = integrate.quad(b, 0.0, 1.0, epsabs=1e-15, epsrel=1e-14)
            assert basis_integral(b) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_g1_g2_match_basis_integrals(self):
        basis = exactness_basis(5)
        for k in (1, 2):
            assert g1(5, k) == pytest.approx(basis_integral(basis[k]), rel=1e-14)
            assert g2(5, k) == pytest.approx(basis_integral(basis[2 + k]), rel=1e-14)

    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_conjugate_form_is_same_basis(self, m):
        x = np.linspace(0.0, 1.0, 9)
        by_key = {(b.kind, b.k): b for b in exactness_basis(m)}
        for b in conjugate_basis(m):
            np.testing.assert_allclose(b(x), by_key[(b.kind, b.k)](x), rtol=1e-13, atol=1e-15)

    def test_label(self):
        assert exactness_basis(1)[0].label() == "exp(-1x)"
        assert "cos" in exactness_basis(3)[1].label()
