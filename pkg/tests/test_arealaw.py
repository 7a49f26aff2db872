import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from stablearea import arealaw
from stablearea.arealaw import (
    AlphaContext,
    CdfTable,
    ToleranceError,
    cdf,
    density,
    density_many,
    density_tail_asymptote,
    density_zero_asymptote,
    fractional_moment,
    moment_by_quadrature,
    sample_area,
    sample_area_shifted,
    series_floor,
)
from stablearea.dist import ParameterError, RngState
from stablearea.specfun import DomainError
from stablearea.stats import ks_one_sample, ks_two_sample, moment_test


def closed_form_alpha2(x):
    x = np.asarray(x, dtype=float)
    return special.gamma(2 / 3) * x ** (-4 / 3) * np.exp(-1 / (9 * x)) / (2 * np.pi * 3 ** (1 / 6))


def mellin_inversion(alpha, x, c=0.0, h=0.01, t_max=80.0):
    """Trapezoid rule on the vertical line Re s = c of the moment function.

    f(x) = (1/π) ∫_0^∞ Re[M(c+it) x^{-(c+it)-1}] dt, with M built from
    complex log-gamma.  Completely separate from the series code.
    """
    b = alpha + 1.0
    t = np.arange(0.0, t_max + h / 2, h)
    s = c + 1j * t
    lm = (s * np.log(b) + special.loggamma(alpha / b) + special.loggamma(1 - b * s)
          - special.loggamma(alpha / b - s) - special.loggamma(1 - s))
    g = np.real(np.exp(lm - (s + 1) * np.log(x)))
    w = np.full(t.size, h)
    w[0] = w[-1] = h / 2
    return float(np.sum(w * g) / np.pi)


class TestContext:
    def test_alpha2_constants(self):
        c = AlphaContext(2.0)
        assert c.c_alpha == pytest.approx(1 / 9, rel=1e-15)
        assert c.tail_power == pytest.approx(-4 / 3, rel=1e-15)
        assert c.zero_power == pytest.approx(-4 / 3, rel=1e-15)
        assert c.zero_exp_power == -1.0

    @pytest.mark.parametrize("a", [0.99, 2.01, math.nan])
    def test_out_of_range(self, a):
        with pytest.raises(ParameterError):
            AlphaContext(a)

    def test_accepts_plain_float(self):
        assert fractional_moment(1.5, 0.0) == 1.0


class TestFractionalMoment:
    @pytest.mark.parametrize("s", [-2.0, -1.0, 0.3, 0.49, 1.0, 3.0])
    def test_alpha1(self, s):
        assert fractional_moment(1.0, s) == pytest.approx(2.0**-s, rel=1e-12)

    def test_alpha2_inverse_moment(self):
        # E[A^{-1}] = E[9 G_{1/3}] = 3
        assert fractional_moment(2.0, -1.0) == pytest.approx(3.0, rel=1e-13)

    @pytest.mark.parametrize("s", [-3.0, -0.7, 0.1, 0.3])
    def test_alpha2_against_gamma_law(self, s):
        ref = 9.0**-s * special.gamma(1 / 3 - s) / special.gamma(1 / 3)
        assert fractional_moment(2.0, s) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("a", [1.2, 1.5, 2.0])
    def test_pole(self, a):
        with pytest.raises(DomainError):
            fractional_moment(a, 1.0 / (a + 1.0))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1.05, 2.0), st.floats(-3.0, 0.3))
    def test_log_convex_in_s(self, a, s):
        # log E[A^s] is convex: midpoint value below the chord
        h = 0.01
        if s + h >= 1.0 / (a + 1.0):
            return
        lm = math.log(fractional_moment(a, s - h))
        l0 = math.log(fractional_moment(a, s))
        lp = math.log(fractional_moment(a, s + h))
        assert l0 <= 0.5 * (lm + lp) + 1e-12


class TestSampling:
    def test_moment_matches(self):
        a, s = 1.5, -0.5
        b = sample_area(a, 100_000, RngState(1))
        rep = moment_test(b, s, fractional_moment(a, s), 200, RngState(2))
        assert abs(rep.z_score) < 4.0

    def test_near_two_matches_boundary_law(self):
        b = sample_area(2.0 - 1e-9, 20_000, RngState(3))
        ref = 1.0 / (9.0 * np.random.default_rng(4).gamma(1 / 3, 200_000))
        assert ks_two_sample(b, ref).passed

    def test_positive(self):
        assert np.all(sample_area(1.5, 1_000_000, RngState(5)).values > 0)

    def test_boundaries(self):
        assert np.all(sample_area(1.0, 10, RngState(6)).values == 0.5)
        b = sample_area(2.0, 20_000, RngState(7))
        assert ks_one_sample(b, lambda x: special.gammaincc(1 / 3, 1 / (9 * x))).passed

    def test_deterministic(self):
        a = sample_area(1.3, 100, RngState(8, 3)).values
        assert np.array_equal(a, sample_area(1.3, 100, RngState(8, 3)).values)

    def test_shifted_reduces_to_base(self):
        a = sample_area(1.5, 1000, RngState(9)).values
        b = sample_area_shifted(1.5, 0.0, 1.0, 1000, RngState(9)).values
        assert np.array_equal(a, b)

    def test_shift_by_five(self):
        s = sample_area_shifted(1.5, 5.0, 1.0, 100_000, RngState(10)).values - 5.0
        base = sample_area(1.5, 100_000, RngState(11)).values
        # compare a bounded functional; the mean itself is infinite
        f = lambda v: np.exp(-v)
        se = math.hypot(f(s).std() / math.sqrt(s.size), f(base).std() / math.sqrt(base.size))
        assert abs(f(s).mean() - f(base).mean()) <= 4 * se

    def test_shifted_bad_level(self):
        with pytest.raises(ParameterError):
            sample_area_shifted(1.5, 0.0, 0.0, 3, RngState(0))


class TestDensity:
    def test_alpha2_at_one(self):
        d = density(2.0, 1.0, 1e-10)
        assert d.regime == arealaw.SERIES
        ref = math.gamma(2 / 3) * math.exp(-1 / 9) / (2 * math.pi * 3 ** (1 / 6))
        assert d.value == pytest.approx(ref, rel=1e-12)

    def test_alpha2_at_half(self):
        assert density(2.0, 0.5).value == pytest.approx(float(closed_form_alpha2(0.5)), rel=1e-8)

    def test_mellin_oracle(self):
        d = density(1.5, 2.0)
        assert abs(d.value - mellin_inversion(1.5, 2.0)) <= 1e-6 * d.value

    @pytest.mark.parametrize("a, x", [(1.2, 0.5), (1.8, 0.3), (1.5, 40.0), (1.35, 1.0)])
    def test_mellin_oracle_more_points(self, a, x):
        assert density(a, x).value == pytest.approx(mellin_inversion(a, x), rel=1e-8)

    def test_error_bound_is_honest_alpha2(self):
        xs = np.geomspace(0.03, 1e5, 300)
        v, r, e = density_many(2.0, xs, 1e-10)
        ser = r == arealaw.SERIES
        assert ser.sum() > 250
        actual = np.abs(v[ser] - closed_form_alpha2(xs[ser]))
        assert np.all(actual <= e[ser] + 4e-16 * v[ser])

    def test_regime_switch(self):
        a = 1.5
        x0 = series_floor(a)
        assert density(a, x0 * 1.01).regime == arealaw.SERIES
        low = density(a, x0 / 2)
        assert low.regime == arealaw.ZERO_ASYMPTOTE and low.error_bound == math.inf
        assert low.value == pytest.approx(float(density_zero_asymptote(a, x0 / 2)))

    def test_vector_matches_scalar(self):
        xs = np.array([3.0, 0.2, 1e4, 0.7])
        v, _, _ = density_many(1.7, xs)
        for x, val in zip(xs, v):
            assert density(1.7, x).value == val

    @pytest.mark.parametrize("x", [0.0, -1.0, math.inf])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            density(1.5, x)

    def test_alpha1_has_no_density(self):
        with pytest.raises(DomainError):
            density(1.0, 0.5)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1.05, 2.0), st.floats(-1.0, 6.0))
    def test_positive(self, a, lx):
        assert density(a, 10.0**lx).value > 0


class TestAsymptotes:
    def test_zero_asymptote_alpha2_is_closed_form(self):
        xs = np.geomspace(1e-3, 1e3, 50)
        assert np.allclose(density_zero_asymptote(2.0, xs), closed_form_alpha2(xs), rtol=1e-13, atol=0)

    def test_zero_asymptote_vanishes_at_zero(self):
        assert density_zero_asymptote(1.5, 1e-4) == 0.0 or density_zero_asymptote(1.5, 1e-4) < 1e-300

    @pytest.mark.parametrize("a", [1.2, 1.5, 1.8])
    def test_zero_ratio_tends_to_one(self, a):
        # the ratio improves as x decreases towards the certified floor
        x0 = series_floor(a)
        r = [density(a, x).value / density_zero_asymptote(a, x) for x in (8 * x0, 4 * x0, 2 * x0, x0)]
        assert all(abs(r[i + 1] - 1) < abs(r[i] - 1) for i in range(3))

    def test_tail_ratio(self):
        assert 0.99 <= density(1.5, 1e6).value / density_tail_asymptote(1.5, 1e6) <= 1.01

    def test_tail_alpha2(self):
        assert density(2.0, 1e6).value / closed_form_alpha2(1e6) == pytest.approx(1.0, rel=1e-10)
        assert 0.99 <= closed_form_alpha2(1e6) / density_tail_asymptote(2.0, 1e6) <= 1.01


class TestIntegrals:
    @pytest.mark.parametrize("a", [1.2, 1.5, 1.8, 2.0])
    def test_mass(self, a):
        m, err = arealaw.total_mass(a)
        assert abs(m - 1.0) <= max(err, 1e-9) and err < 1e-4

    @pytest.mark.parametrize("a", [1.3, 1.9])
    @pytest.mark.parametrize("s", [-1.5, -0.3, 0.25])
    def test_moments(self, a, s):
        if s >= 1 / (a + 1):
            pytest.skip("outside the moment domain")
        q, err = moment_by_quadrature(a, s)
        assert q == pytest.approx(fractional_moment(a, s), rel=1e-5)

    @pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
    def test_cdf_alpha2_closed_form(self, x):
        assert cdf(2.0, x) == pytest.approx(special.gammaincc(1 / 3, 1 / (9 * x)), abs=1e-6)

    def test_cdf_far_right_alpha12(self):
        assert abs(cdf(1.2, 1e8) - 1.0) <= 1e-4

    @pytest.mark.parametrize("a", [1.5, 1.8, 2.0])
    def test_cdf_far_right_equals_tail_mass(self, a):
        # above 1e8 the remaining mass is the integrated power tail
        ctx = AlphaContext(a)
        tail = ctx.tail_const * ctx.beta * 1e8 ** (-1.0 / ctx.beta)
        assert 1.0 - cdf(a, 1e8) == pytest.approx(tail, rel=2e-2)

    def test_cdf_monotone(self):
        xs = np.geomspace(1e-2, 1e5, 60)
        v = cdf(1.5, xs)
        assert np.all(np.diff(v) >= 0)

    def test_cdf_alpha1_step(self):
        assert cdf(1.0, 0.49) == 0.0 and cdf(1.0, 0.5) == 1.0

    def test_cdf_tolerance_error(self):
        with pytest.raises(ToleranceError):
            cdf(1.2, 1.0, eps=1e-12)

    @pytest.mark.parametrize("a", [1.2, 2.0])
    def test_cdf_table_matches_quadrature(self, a):
        t = CdfTable(a)
        xs = np.array([0.05, 0.3, 1.0, 7.0, 300.0, 5e3])
        assert np.allclose(t(xs), cdf(a, xs), atol=2e-6, rtol=0)
