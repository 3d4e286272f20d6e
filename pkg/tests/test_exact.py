import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate
from scipy import stats

from confradius.eigen import EigenSpectrum, ShapeRatios
from confradius.errors import DomainError, InvalidProbability
from confradius.exact import (
    Method,
    chi2_2d_value,
    equal_sigma_3d_argument,
    factor,
    factor_1d,
    factor_2d,
    factor_3d,
    factor_3d_equal_sigma,
    prob,
    prob_1d,
    prob_2d,
    prob_3d,
    tail_2d,
    tail_3d,
)
from confradius.oracle import McConfig, mc_prob, mc_quantile
from confradius.special import integrate
from oracles import bisect, disc_grid_probability, polar_tail_integrand, simpson

# Frozen from independent routes (bisection on erf, mpmath at 30 digits).
FACTOR_1D_050 = 0.6744897501960817
PROB_1D_AT_1 = 0.6826894921370859
SEP_FACTOR = 1.5381722544550523
X_EQUAL_SIGMA_095 = 3.9073639516255900
FACTOR_2D_R05_095 = 2.0358587202855070


def cartesian_prob_3d(e, m, n):
    """P(|x| < e) by scipy's nested Cartesian quadrature, erf in the x direction."""

    def strip(y, z):
        rem = e * e - y * y - z * z
        if rem <= 0.0:
            return 0.0
        return math.erf(math.sqrt(rem) / math.sqrt(2.0)) * stats.norm.pdf(y, scale=m) * stats.norm.pdf(z, scale=n)

    val, _ = sci_integrate.dblquad(
        strip, -e, e,
        lambda z: -math.sqrt(max(e * e - z * z, 0.0)),
        lambda z: math.sqrt(max(e * e - z * z, 0.0)),
        epsabs=1e-12, epsrel=1e-12,
    )
    return val


class TestProb1D:
    def test_zero(self):
        assert prob_1d(0.0) == 0.0

    def test_196_gives_95(self):
        assert prob_1d(1.96) == pytest.approx(0.95, abs=1e-4)

    def test_one_sigma_against_density_quadrature(self):
        brute = simpson(lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -1.0, 1.0, n=2000)
        assert brute == pytest.approx(PROB_1D_AT_1, abs=1e-13)
        assert prob_1d(1.0) == pytest.approx(PROB_1D_AT_1, abs=1e-4)
        assert prob_1d(1.0) == pytest.approx(brute, abs=1e-13)

    def test_negative(self):
        with pytest.raises(DomainError):
            prob_1d(-0.1)


class TestFactor1D:
    def test_anchor(self):
        res = factor_1d(0.95)
        assert res.factor == pytest.approx(1.95996, abs=1e-4)
        assert res.method is Method.EXACT_1D
        assert res.ratios.dim == 1

    def test_median_against_bisection(self):
        oracle = bisect(lambda e: prob_1d(e) - 0.5, 0.0, 5.0)
        assert oracle == pytest.approx(FACTOR_1D_050, abs=1e-14)
        assert factor_1d(0.5).factor == pytest.approx(FACTOR_1D_050, abs=1e-12)

    @pytest.mark.parametrize("p", [1e-6, 0.1, 0.5, 0.9, 0.99, 0.999999])
    def test_round_trip(self, p):
        assert prob_1d(factor_1d(p).factor) == pytest.approx(p, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(InvalidProbability):
            factor_1d(1.0)


class TestProb2D:
    def test_isotropic_anchor(self):
        assert prob_2d(2.447, 1.0) == pytest.approx(0.95, abs=1e-4)

    @pytest.mark.parametrize("r", [0.0, 1e-7, 1e-5, 1e-3])
    def test_thin_limit(self, r):
        assert prob_2d(1.96, r) == pytest.approx(0.95, abs=1e-3)

    @pytest.mark.parametrize("e,r", [(0.7, 0.2), (2.0, 0.5), (2.6, 0.85), (1.4, 0.05)])
    def test_against_disc_grid(self, e, r):
        assert prob_2d(e, r) == pytest.approx(disc_grid_probability(e, 1.0, r), abs=1e-6)

    @pytest.mark.parametrize("v", [1.5, 3.0, 10.0, 100.0])
    @pytest.mark.parametrize("e", [0.5, 1.5, 2.5, 4.0])
    def test_against_plain_polar_integrand(self, e, v):
        tail = integrate(polar_tail_integrand(e, v), 0.0, 2 * math.pi)
        assert prob_2d(e, 1 / math.sqrt(v)) == pytest.approx(1.0 - tail, abs=1e-9)

    def test_continuity_at_one(self):
        assert prob_2d(2.0, 1.0 - 1e-12) == pytest.approx(prob_2d(2.0, 1.0), abs=1e-10)

    def test_continuity_at_cutoff(self):
        assert tail_2d(2.0, 1.01e-6) == pytest.approx(tail_2d(2.0, 0.99e-6), abs=1e-10)

    def test_zero_radius(self):
        assert prob_2d(0.0, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            prob_2d(-1.0, 0.5)
        with pytest.raises(DomainError):
            prob_2d(1.0, 1.5)


class TestFactor2D:
    def test_isotropic(self):
        assert factor_2d(1.0, 0.95).factor == pytest.approx(2.4477, abs=1e-3)

    def test_v3(self):
        f = factor_2d(1 / math.sqrt(3), 0.95).factor
        assert f == pytest.approx(2.07, abs=0.01)

    def test_thin(self):
        assert factor_2d(0.0, 0.95).factor == pytest.approx(1.95996, abs=1e-4)

    def test_half_against_mpmath_value(self):
        assert factor_2d(0.5, 0.95).factor == pytest.approx(FACTOR_2D_R05_095, abs=1e-8)

    def test_result_metadata(self):
        res = factor_2d(0.3, 0.9)
        assert res.method is Method.EXACT_2D and res.ratios.r == 0.3 and res.confidence == 0.9


class TestProb3D:
    def test_isotropic_anchor(self):
        assert prob_3d(2.795, 1.0, 1.0) == pytest.approx(0.95, abs=1e-3)

    @pytest.mark.parametrize("e,m", [(0.8, 0.3), (2.0, 0.6), (3.1, 0.95)])
    def test_flat_reduces_to_2d(self, e, m):
        assert prob_3d(e, m, 0.0) == prob_2d(e, m)
        # the quadrature path just above the cutoff agrees too
        assert prob_3d(e, m, 1e-5) == pytest.approx(prob_2d(e, m), abs=1e-8)

    def test_line_reduces_to_1d(self):
        assert prob_3d(1.5, 0.0, 0.0) == prob_1d(1.5)

    @pytest.mark.parametrize("e,m,n", [(2.5, 0.7, 0.4), (1.0, 0.3, 0.2), (3.0, 0.9, 0.5), (2.0, 0.999, 0.998)])
    def test_against_cartesian_quadrature(self, e, m, n):
        assert prob_3d(e, m, n) == pytest.approx(cartesian_prob_3d(e, m, n), abs=1e-9)

    def test_against_monte_carlo(self):
        spec = EigenSpectrum((1.0, 0.6, 0.3))
        e = 2.2
        p_hat, se = mc_prob(spec, e, McConfig(samples=10**7, seed=7, confidence=0.95))
        assert abs(prob_3d(e, 0.6, 0.3) - p_hat) <= 3 * se

    def test_isotropic_uses_gamma(self):
        assert prob_3d(2.0, 1.0, 1.0) == pytest.approx(1.0 - tail_3d(2.0, 1.0, 1.0), abs=1e-15)

    def test_quadrature_near_isotropic(self):
        assert prob_3d(2.0, 1.0 - 1e-9, 1.0 - 1e-9) == pytest.approx(prob_3d(2.0, 1.0, 1.0), abs=1e-8)


class TestFactor3D:
    def test_isotropic(self):
        assert factor_3d(1.0, 1.0, 0.95).factor == pytest.approx(2.795, abs=2e-3)

    def test_line(self):
        assert factor_3d(0.0, 0.0, 0.95).factor == pytest.approx(1.96, abs=1e-3)

    def test_flat(self):
        assert factor_3d(1.0, 0.0, 0.95).factor == pytest.approx(2.4477, abs=2e-3)

    def test_swap(self):
        assert factor_3d(0.3, 0.7, 0.95).factor == factor_3d(0.7, 0.3, 0.95).factor


class TestEqualSigma3D:
    def test_anchor(self):
        assert equal_sigma_3d_argument(0.95) == pytest.approx(3.908, abs=2e-3)
        assert equal_sigma_3d_argument(0.95) == pytest.approx(X_EQUAL_SIGMA_095, abs=1e-11)
        assert factor_3d_equal_sigma(0.95).factor == pytest.approx(2.795, abs=2e-3)

    def test_sep(self):
        assert factor_3d_equal_sigma(0.5).factor == pytest.approx(SEP_FACTOR, abs=1e-10)
        assert factor_3d_equal_sigma(0.5).factor == pytest.approx(1.5382, abs=1e-4)

    def test_sep_against_monte_carlo_median(self):
        q, se = mc_quantile(EigenSpectrum((1.0, 1.0, 1.0)), McConfig(10**6, seed=21, confidence=0.5))
        assert abs(q - SEP_FACTOR) <= 3 * se

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.68, 0.9, 0.95, 0.99, 0.999])
    def test_two_paths_agree(self, p):
        assert factor_3d(1.0, 1.0, p).factor == pytest.approx(factor_3d_equal_sigma(p).factor, abs=1e-6)
        # and the quadrature path just off the corner
        near = factor_3d(1.0 - 1e-9, 1.0 - 1e-9, p).factor
        assert near == pytest.approx(factor_3d_equal_sigma(p).factor, abs=1e-6)


class TestInvariants:
    @pytest.mark.parametrize("shape", [ShapeRatios.line(), ShapeRatios.planar(0.4), ShapeRatios.spatial(0.7, 0.2)])
    def test_monotone_in_radius(self, shape):
        es = np.linspace(0.0, 6.0, 61)
        ps = [prob(e, shape) for e in es]
        assert all(b > a for a, b in zip(ps, ps[1:]) if b < 1.0 - 1e-12)

    def test_factor_2d_monotone_in_r(self):
        fs = [factor_2d(r, 0.8).factor for r in np.linspace(0, 1, 41)]
        assert all(b >= a for a, b in zip(fs, fs[1:]))

    def test_factor_3d_monotone(self):
        grid = np.linspace(0, 1, 6)
        for n in grid:
            fs = [factor_3d(m, n, 0.9).factor for m in grid if m >= n]
            assert all(b >= a for a, b in zip(fs, fs[1:]))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 6.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    def test_symmetry(self, e, m, n):
        assert prob_3d(e, m, n) == pytest.approx(prob_3d(e, n, m), abs=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 1.0), st.floats(0.05, 0.995))
    def test_sandwich_2d(self, r, p):
        f = factor_2d(r, p).factor
        assert factor_1d(p).factor <= f <= chi2_2d_value(p)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 0.995))
    def test_sandwich_3d(self, m, n, p):
        f = factor_3d(m, n, p).factor
        assert factor_1d(p).factor <= f <= factor_3d_equal_sigma(p).factor

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 0.995))
    def test_round_trip(self, m, n, p):
        shape3 = ShapeRatios.spatial(m, n)
        assert prob(factor(shape3, p).factor, shape3) == pytest.approx(p, abs=1e-8)
        shape2 = ShapeRatios.planar(m)
        assert prob(factor(shape2, p).factor, shape2) == pytest.approx(p, abs=1e-8)

    @pytest.mark.parametrize("shape", [ShapeRatios.line(), ShapeRatios.planar(0.3), ShapeRatios.spatial(0.5, 0.1)])
    def test_normalization(self, shape):
        assert prob(12.0, shape) > 1.0 - 1e-12

    @pytest.mark.parametrize("e", [0.3, 1.0, 2.0, 3.5])
    def test_boundary_reduction(self, e):
        assert abs(prob_2d(e, 0.0) - prob_1d(e)) <= 1e-8
        assert abs(tail_2d(e, 2e-6) - math.erfc(e / math.sqrt(2))) <= 1e-8
