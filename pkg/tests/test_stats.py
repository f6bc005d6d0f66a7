import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from goalrate.stats import (
    LowExpectedCountWarning,
    TestConfig as Config,
    bootstrap_mean_diff,
    chisq_gof,
    chisq_sf,
    kolmogorov_sf,
    ks_normality,
    ols_fit,
    shapiro_wilk,
    shapiro_wilk_coefficients,
    student_t_sf,
)


class TestChisqSf:
    def test_zero_is_full_mass(self):
        for df in (1, 2, 7, 44, 200):
            assert chisq_sf(0.0, df) == 1.0

    def test_df2_closed_form(self):
        assert chisq_sf(10.0, 2) == pytest.approx(math.exp(-5), abs=1e-15)

    def test_df1_against_normal_two_tail(self):
        # chi2_1 tail at z^2 equals P(|Z| > z) = erfc(z / sqrt 2)
        z = 1.959963984540054
        assert chisq_sf(z * z, 1) == pytest.approx(math.erfc(z / math.sqrt(2)), rel=1e-12)
        assert chisq_sf(3.841, 1) == pytest.approx(0.05, abs=1e-4)

    @pytest.mark.parametrize("df", [1, 2, 5, 21, 44, 89, 150, 200])
    @pytest.mark.parametrize("x", [0.01, 1.0, 17.3, 44.0, 120.0, 300.0, 500.0])
    def test_relative_accuracy_against_mpmath(self, x, df):
        ref = float(mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(x) / 2, regularized=True))
        if ref < 1e-290:
            pytest.skip("reference underflows double precision")
        assert chisq_sf(x, df) == pytest.approx(ref, rel=1e-10)

    def test_errors(self):
        with pytest.raises(ValueError):
            chisq_sf(1.0, 0)
        with pytest.raises(ValueError):
            chisq_sf(-1.0, 3)


class TestChisqGof:
    def test_exact_fit(self):
        r = chisq_gof([10, 20, 30], [1 / 6, 2 / 6, 3 / 6])
        assert r.statistic == pytest.approx(0, abs=1e-12)
        assert r.pvalue == pytest.approx(1.0)

    def test_hand_computed(self):
        r = chisq_gof([10, 20, 30], [1 / 3, 1 / 3, 1 / 3])
        # (10-20)^2/20 + 0 + (30-20)^2/20
        assert r.statistic == pytest.approx(10.0, abs=1e-12)
        assert r.df == 2
        assert r.pvalue == pytest.approx(math.exp(-5), rel=1e-9)

    def test_zero_prob_with_mass_is_error(self):
        with pytest.raises(ValueError, match="infinite"):
            chisq_gof([1, 2, 3], [0.0, 0.5, 0.5])

    def test_zero_prob_zero_obs_is_fine(self):
        r = chisq_gof([0, 20, 20], [0.0, 0.5, 0.5])
        assert r.statistic == 0

    def test_low_expected_warns(self):
        with pytest.warns(LowExpectedCountWarning):
            r = chisq_gof([1, 2, 3], [1 / 3] * 3)
        assert r.low_expected
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert not chisq_gof([10, 20, 30], [1 / 3] * 3).low_expected

    @pytest.mark.parametrize("obs, probs", [
        ([1, 2], [0.5, 0.4]),
        ([1, 2], [0.5, 0.25, 0.25]),
        ([0, 0], [0.5, 0.5]),
    ])
    def test_bad_input(self, obs, probs):
        with pytest.raises(ValueError):
            chisq_gof(obs, probs)

    @given(st.lists(st.integers(1, 200), min_size=2, max_size=12), st.data())
    def test_permutation_invariant(self, obs, data):
        w = data.draw(st.lists(st.floats(0.1, 10), min_size=len(obs), max_size=len(obs)))
        p = np.array(w) / sum(w)
        perm = data.draw(st.permutations(range(len(obs))))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowExpectedCountWarning)
            a = chisq_gof(obs, p)
            b = chisq_gof(np.array(obs)[perm], p[perm])
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12)
        assert 0 <= a.pvalue <= 1 and math.isfinite(a.pvalue)

    def test_pvalue_decreasing_in_statistic(self):
        xs = np.linspace(0, 200, 400)
        ps = [chisq_sf(x, 44) for x in xs]
        assert all(a >= b for a, b in zip(ps, ps[1:]))


class TestStudentT:
    def test_zero(self):
        for df in (1, 3, 43):
            assert student_t_sf(0.0, df) == 0.5

    def test_cauchy(self):
        assert student_t_sf(1.0, 1) == pytest.approx(0.5 - math.atan(1.0) / math.pi, rel=1e-14)

    def test_limits(self):
        assert student_t_sf(math.inf, 5) == 0.0
        assert student_t_sf(1e12, 5) < 1e-50

    @pytest.mark.parametrize("df", [1, 2, 3, 10, 43, 100, 200])
    @pytest.mark.parametrize("t", [0.1, 1.0, 2.5, 3.1, 8.0, 30.0])
    def test_relative_accuracy_against_mpmath(self, t, df):
        # upper tail = 1/2 I_{df/(df+t^2)}(df/2, 1/2)
        ref = float(mpmath.betainc(mpmath.mpf(df) / 2, 0.5, 0, mpmath.mpf(df) / (df + mpmath.mpf(t) ** 2),
                                   regularized=True) / 2)
        assert student_t_sf(t, df) == pytest.approx(ref, rel=1e-10)

    @given(st.floats(-50, 50), st.integers(1, 200))
    def test_symmetry(self, t, df):
        assert student_t_sf(t, df) + student_t_sf(-t, df) == pytest.approx(1.0, abs=1e-12)


class TestOls:
    def test_hand_computed(self):
        fit = ols_fit([1, 2, 3], [1, 2, 4])
        # Sxy = 3, Sxx = 2
        assert fit.slope == pytest.approx(1.5, abs=1e-12)
        assert fit.intercept == pytest.approx(-2 / 3, abs=1e-12)

    def test_exact_line(self):
        x = np.arange(46, 91)
        fit = ols_fit(x, 13.0 + 0.25 * x)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(fit.residuals, 0, atol=1e-10)
        assert fit.pvalue_slope == 0.0

    def test_t_test_matches_definition(self):
        rng = np.random.default_rng(5)
        x = np.arange(46, 91, dtype=float)
        y = 13 + 0.2 * x + rng.normal(0, 5, 45)
        fit = ols_fit(x, y)
        # independent route: normal equations through lstsq
        design = np.column_stack([np.ones_like(x), x])
        beta, rss, *_ = np.linalg.lstsq(design, y, rcond=None)
        cov = rss[0] / 43 * np.linalg.inv(design.T @ design)
        se = math.sqrt(cov[1, 1])
        assert fit.slope == pytest.approx(beta[1], rel=1e-10)
        assert fit.slope_se == pytest.approx(se, rel=1e-10)
        t = beta[1] / se
        two_tail = float(mpmath.betainc(21.5, 0.5, 0, 43 / (43 + t * t), regularized=True))
        assert fit.pvalue_slope == pytest.approx(two_tail, rel=1e-9)
        assert fit.r_squared == pytest.approx(1 - rss[0] / np.sum((y - y.mean()) ** 2), rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError, match="constant"):
            ols_fit([2, 2, 2], [1, 2, 3])
        with pytest.raises(ValueError, match="at least 3"):
            ols_fit([1, 2], [1, 2])

    @settings(max_examples=50)
    @given(st.lists(st.floats(-100, 100), min_size=45, max_size=45), st.floats(-1e3, 1e3))
    def test_shift_moves_intercept_only(self, noise, c):
        x = np.arange(46, 91, dtype=float)
        y = 20 + 0.1 * x + np.array(noise)
        a, b = ols_fit(x, y), ols_fit(x, y + c)
        assert b.intercept - a.intercept == pytest.approx(c, abs=1e-8)
        assert b.slope == pytest.approx(a.slope, abs=1e-10)
        assert abs(a.residuals.sum()) <= 1e-9 * max(1.0, np.abs(y).max()) * len(y)


class TestNormality:
    def test_ks_on_normal_quantiles(self):
        n = 100
        from statistics import NormalDist
        sample = [NormalDist().inv_cdf((i - 0.5) / n) for i in range(1, n + 1)]
        r = ks_normality(sample)
        assert r.pvalue > 0.99

    def test_kolmogorov_limits(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(1e-6) == 1.0
        assert 0 <= kolmogorov_sf(10.0) < 1e-80

    def test_kolmogorov_known_value(self):
        # K(1.36) = 0.95 is the classical 5% critical point
        assert kolmogorov_sf(1.358) == pytest.approx(0.05, abs=1e-3)
        # mpmath sum as an independent route
        z = mpmath.mpf("0.83")
        ref = 2 * mpmath.nsum(lambda k: (-1) ** (k - 1) * mpmath.exp(-2 * k * k * z * z), [1, mpmath.inf])
        assert kolmogorov_sf(0.83) == pytest.approx(float(ref), abs=1e-12)

    @pytest.mark.parametrize("name", ["normal", "exponential", "uniform"])
    def test_frozen_reference_vectors(self, oracle, name):
        ref = oracle("normality_oracle.json")["vectors"][name]
        sw = shapiro_wilk(ref["x"])
        ks = ks_normality(ref["x"])
        assert sw.statistic == pytest.approx(ref["sw_w"], abs=1e-6)
        assert sw.pvalue == pytest.approx(ref["sw_p"], abs=1e-4)
        assert ks.statistic == pytest.approx(ref["ks_d"], abs=1e-9)
        assert ks.pvalue == pytest.approx(ref["ks_p"], abs=1e-6)

    def test_sw_coefficients_unit_norm_antisymmetric(self):
        for n in (3, 4, 5, 6, 11, 12, 45, 500):
            a = shapiro_wilk_coefficients(n)
            assert float(a @ a) == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(a, -a[::-1], atol=1e-15)

    def test_sw_n3_closed_form(self):
        # W of an equally spaced triple is 1
        assert shapiro_wilk([1, 2, 3]).statistic == pytest.approx(1.0)
        assert shapiro_wilk([1, 2, 3]).pvalue == pytest.approx(1.0)

    @settings(max_examples=60)
    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=60))
    def test_sw_bounds(self, xs):
        assume(np.ptp(xs) > 1e-6 * max(1.0, np.abs(xs).max()))
        r = shapiro_wilk(xs)
        assert 0 < r.statistic <= 1
        assert 0 <= r.pvalue <= 1

    def test_errors(self):
        with pytest.raises(ValueError):
            shapiro_wilk([1, 2])
        with pytest.raises(ValueError, match="variance"):
            shapiro_wilk([3, 3, 3, 3])
        with pytest.raises(ValueError):
            ks_normality([1, 2, 3, 4])
        with pytest.raises(ValueError, match="variance"):
            ks_normality([5] * 8)


class TestBootstrap:
    def test_constant_vectors(self):
        s = bootstrap_mean_diff([3.0] * 10, [3.0] * 10, 200, seed=1)
        assert np.all(s.samples == 0) and s.sd == 0

    def test_deterministic(self):
        a, b = np.arange(45.0), np.arange(45.0) ** 1.1
        s1 = bootstrap_mean_diff(a, b, 500, seed=42)
        s2 = bootstrap_mean_diff(a, b, 500, seed=42)
        assert s1.samples.tobytes() == s2.samples.tobytes()
        assert bootstrap_mean_diff(a, b, 500, seed=43).samples.tobytes() != s1.samples.tobytes()

    def test_worker_count_irrelevant(self):
        rng = np.random.default_rng(0)
        a, b = rng.poisson(22, 45), rng.poisson(28, 45)
        ref = bootstrap_mean_diff(a, b, 1000, seed=9).samples.tobytes()
        for w in (2, 3, 8):
            assert bootstrap_mean_diff(a, b, 1000, seed=9, workers=w).samples.tobytes() == ref

    def test_summary_moments(self):
        s = bootstrap_mean_diff(np.arange(10.0), np.arange(10.0) * 2, 300, seed=3)
        assert s.mean == pytest.approx(s.samples.mean())
        assert s.sd == pytest.approx(s.samples.std(ddof=1))

    def test_errors(self):
        with pytest.raises(ValueError):
            bootstrap_mean_diff([], [1.0], 10, 0)
        with pytest.raises(ValueError):
            bootstrap_mean_diff([1.0], [1.0], 0, 0)


def test_config_alpha():
    assert Config().alpha == 0.05
    for bad in (0, 1, -0.1, 1.5):
        with pytest.raises(ValueError):
            Config(bad)
