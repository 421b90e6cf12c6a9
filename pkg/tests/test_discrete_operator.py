"""
Tests for discrete_operator.py - the discrete analogue of d^{2m}/dx^{2m} - 1.
"""

import math
from fractions import Fraction

import pytest

from optimal_quadrature import discrete_operator
from optimal_quadrature.closed_form import m3_parameters
from optimal_quadrature.discrete_operator import build, float_coefficients, for_grid
from optimal_quadrature.errors import (
    DegenerateStepError,
    InvalidParameterError,
    OperatorIntegrityError,
    RootPairingError,
)


class TestBuildM1:
    """Test D_1, which has no roots."""

    def test_constants(self, float_operator):
        op = float_operator(1, 0.1)
        assert op.roots == ()
        assert float(op.K) == pytest.approx(math.sinh(0.1), rel=1e-15)
        assert float(op.K1) == 0.0
        assert float(op.M1) == pytest.approx(-2 * math.cosh(0.1), rel=1e-15)

    def test_values(self, float_operator):
        op = float_operator(1, 0.1)
        assert op.value(0) == pytest.approx(-2 * math.cosh(0.1) / math.sinh(0.1), rel=1e-14)
        assert op.value(0) == pytest.approx(-20.0666, abs=1e-4)
        assert op.value(1) == pytest.approx(1 / math.sinh(0.1), rel=1e-14)
        assert op.value(-1) == op.value(1)
        assert op.value(1) == pytest.approx(9.9833, abs=1e-4)
        for beta in (2, -2, 7, 40):
            assert op.value(beta) == 0.0

    def test_delta_identity(self, float_operator):
        assert float_operator(1, 0.1).verify_delta(10) <= 1e-12

    def test_annihilation(self, float_operator):
        residuals = float_operator(1, 0.1).annihilation_residuals(10)
        assert set(residuals) == {"exp(+x)", "exp(-x)"}
        assert max(residuals.values()) <= 1e-12

    def test_total_mass(self, operator_m1):
        h = 0.1
        expected = (2 - 2 * math.cosh(h)) / math.sinh(h)
        assert float(operator_m1.total_mass()) == pytest.approx(expected, rel=1e-12)


class TestBuildM3:
    """Test D_3 against the m = 3 closed-form scalars."""

    def test_roots_inside_disk(self, operator_m3):
        assert len(operator_m3.poly_p) == 5
        assert len(operator_m3.roots) == 2
        assert all(abs(r) < 1 for r in operator_m3.roots)
        assert operator_m3.decay < 1

    def test_leading_coefficient(self, operator_m3):
        params = m3_parameters(10)
        assert float(operator_m3.K) == pytest.approx(params.Kc, rel=1e-13)

    def test_monic_coefficients(self, operator_m3):
        params = m3_parameters(10)
        K = operator_m3.K
        assert float(-operator_m3.K1 / K) == pytest.approx(params.K1c, rel=1e-13)
        assert float(operator_m3.poly_p[2] / K) == pytest.approx(params.K2c, rel=1e-13)

    def test_roots_match_closed_form(self, operator_m3):
        params = m3_parameters(10)
        taus = sorted([params.tau1, params.tau2], key=abs)
        roots = sorted(operator_m3.lambdas(), key=abs)
        for root, tau in zip(roots, taus):
            assert abs(root - tau) <= 1e-12

    def test_reciprocal_pairing(self, operator_m3):
        assert operator_m3.pairing_residual() <= 1e-10

    def test_values_real_and_even(self, operator_m3):
        assert operator_m3.imaginary_residual(100) <= 1e-10
        for beta in range(6):
            assert operator_m3.value(-beta) == operator_m3.value(beta)

    def test_exact_values_match_direct(self, operator_m3):
        ctx = operator_m3.ctx
        values = operator_m3.exact_values(30)
        for beta in (0, 1, 2, 3, 17, 30):
            direct = operator_m3.exact_value(beta)
            assert abs(values[beta] - direct) <= ctx.mpf(10) ** -(ctx.dps - 8) * (1 + abs(direct))

    @pytest.mark.parametrize("N", [5, 10, 20])
    def test_delta_identity(self, operator_factory, N):
        assert operator_factory(3, N).verify_delta(30) <= 1e-9

    def test_annihilation(self, operator_m3_fine):
        residuals = operator_m3_fine.annihilation_residuals(30)
        assert len(residuals) == 6
        assert max(residuals.values()) <= 1e-9

    def test_decay_bound(self, operator_m3):
        assert operator_m3.decay_bound_ratio(100) <= 1 + 1e-9

    def test_decay_bound_from_second_value_is_loose(self, operator_m3):
        # |D(beta)| <= |D(2)| rho^{beta-2} overshoots by about 14 percent; the amplitude-sum bound holds
        rho = operator_m3.decay
        d2 = abs(operator_m3.value(2))
        ratio = max(abs(operator_m3.value(b)) / (d2 * rho ** (b - 2)) for b in range(2, 101))
        assert 1.1 < ratio < 1.2
        assert operator_m3.decay_bound_ratio(100) <= 1 + 1e-9

    def test_float_step(self, float_operator, operator_m3):
        op = float_operator(3, 0.1)
        assert op.value(2) == pytest.approx(operator_m3.value(2), rel=1e-12)


class TestBuildM5:
    """Test D_5."""

    def test_roots(self, operator_factory):
        op = operator_factory(5, 20)
        assert len(op.roots) == 4
        assert len(op.poly_p) == 9
        assert op.pairing_residual() <= 1e-10

    def test_delta_identity(self, operator_factory):
        assert operator_factory(5, 20).verify_delta(30) <= 1e-8

    def test_annihilation(self, operator_factory):
        residuals = operator_factory(5, 20).annihilation_residuals(30)
        assert len(residuals) == 10
        assert max(residuals.values()) <= 1e-8

    def test_decay_bound(self, operator_factory):
        assert operator_factory(5, 20).decay_bound_ratio(100) <= 1 + 1e-9


class TestAcrossSteps:
    """Delta identity, annihilation and root structure over several float steps."""

    @pytest.mark.parametrize("m,h", [(1, 0.2), (1, 0.1), (1, 0.05), (5, 0.2), (5, 0.1)])
    def test_delta_identity(self, float_operator, m, h):
        assert float_operator(m, h).verify_delta(30) <= (1e-8 if m == 5 else 1e-9)

    @pytest.mark.parametrize("m,h", [(1, 0.2), (1, 0.1), (1, 0.05), (5, 0.2), (5, 0.1)])
    def test_annihilation(self, float_operator, m, h):
        assert float_operator(m, h).verify_annihilation(30) <= (1e-8 if m == 5 else 1e-9)

    @pytest.mark.parametrize("h", [0.2, 0.1])
    def test_m5_roots(self, float_operator, h):
        op = float_operator(5, h)
        assert len(op.roots) == 4
        assert all(abs(r) < 1 for r in op.roots)
        assert op.pairing_residual() <= 1e-10
        assert op.imaginary_residual(100) <= 1e-10
        assert op.decay_bound_ratio(100) <= 1 + 1e-9


class TestHalfLineSum:
    """Test the closed-form geometric tails."""

    @pytest.mark.parametrize("start", [-2, 0, 1, 3])
    def test_matches_direct_sum(self, operator_m3, start):
        ctx = operator_m3.ctx
        w = ctx.mpf("0.9")
        direct = ctx.fsum(operator_m3.exact_value(g) * w ** g for g in range(start, 400))
        closed = operator_m3.half_line_sum(start, w)
        assert abs(closed - direct) <= ctx.mpf(10) ** -25 * (1 + abs(direct))

    def test_divergent_series(self, operator_m3):
        ctx = operator_m3.ctx
        w = ctx.mpf("1.1") / abs(operator_m3.roots[-1])
        with pytest.raises(OperatorIntegrityError, match="diverges"):
            operator_m3.half_line_sum(2, w)

    def test_total_mass_matches_direct_sum(self, operator_m3):
        ctx = operator_m3.ctx
        values = operator_m3.exact_values(300)
        direct = values[0] + 2 * ctx.fsum(values[1:])
        assert abs(operator_m3.total_mass() - direct) <= ctx.mpf(10) ** -25


class TestBuildErrors:
    """Test validation and failure reporting."""

    def test_even_order(self):
        with pytest.raises(InvalidParameterError, match="m must be odd"):
            build(4, 0.1)

    @pytest.mark.parametrize("h", [0.0, -0.1, 1.5])
    def test_step_out_of_range(self, h):
        with pytest.raises(InvalidParameterError, match="h must lie"):
            build(3, h)

    def test_window_too_small(self, operator_m3):
        with pytest.raises(InvalidParameterError, match="window"):
            operator_m3.verify_delta(3)

    def test_root_on_unit_circle(self, monkeypatch):
        monkeypatch.setattr(discrete_operator, "UNIT_CIRCLE_GAP", 1.0)
        with pytest.raises(DegenerateStepError, match="unit circle"):
            build(3, Fraction(1, 10))

    def test_wrong_root_split(self, monkeypatch):
        def outside_only(ctx, coeffs):
            return [ctx.mpc(2), ctx.mpc(3), ctx.mpc(4), ctx.mpc(5)]

        monkeypatch.setattr(discrete_operator, "_locate_roots", outside_only)
        with pytest.raises(RootPairingError, match="expected 2 roots"):
            build(3, Fraction(1, 10))

    def test_symbol_degree_too_high(self, monkeypatch):
        original = discrete_operator._poly_add

        def padded(ctx, p, q):
            return original(ctx, p, q) + [ctx.mpf(1)]

        monkeypatch.setattr(discrete_operator, "_poly_add", padded)
        with pytest.raises(OperatorIntegrityError, match="degree above 4"):
            build(3, Fraction(1, 10))


class TestFloatCoefficients:
    """Test the double-precision summary."""

    def test_summary(self, operator_m3):
        summary = float_coefficients(operator_m3)
        assert summary["m"] == 3
        assert summary["h"] == pytest.approx(0.1)
        assert len(summary["roots"]) == 2
        assert len(summary["a1"]) == 1
        assert summary["K"] == pytest.approx(float(operator_m3.K))

    def test_grid_step_is_exact(self):
        op = for_grid(1, 3)
        ctx = op.ctx
        assert op.step == ctx.mpf(1) / 3
        assert op.step != ctx.mpf(1 / 3)
