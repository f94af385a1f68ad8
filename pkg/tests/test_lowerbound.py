import math

import numpy as np
import pytest
from scipy.special import ndtr

from hdclt.lowerbound import (fit_power_law, poisson_approx_check,
                              rademacher_gaussian_max_cdf, rate_curve,
                              skewness_gamma, threshold_xn,
                              two_point_marginal_tail)
from hdclt.matcore import CovarianceModel
from hdclt.sampler import DistributionSpec, sample_scaled_sums


class TestThreshold:
    def test_half_probability_root(self):
        # e^{-1/d} = 0.5 at d = 1/log 2; the threshold is the normal median
        assert abs(threshold_xn(1.0 / math.log(2.0))) <= 1e-12

    def test_forward_consistency_at_d50(self):
        x = threshold_xn(50)
        assert float(ndtr(x)) ** 50 == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_sqrt_two_log_d_trend(self):
        d = 10**6
        assert threshold_xn(d) == pytest.approx(math.sqrt(2 * math.log(d)),
                                                rel=0.10)

    def test_positive_d_required(self):
        with pytest.raises(ValueError):
            threshold_xn(0.0)


class TestSkewness:
    def test_two_point_closed_form(self):
        gamma = skewness_gamma(DistributionSpec.two_point(2.0, 1), n=100)
        p = 0.25
        expected = (1 - 2 * p) / math.sqrt(100 * p * (1 - p))
        assert gamma == pytest.approx(expected, rel=1e-12)
        assert gamma == pytest.approx(0.11547, abs=1e-5)


class TestMarginalTail:
    def test_enumeration_matches_monte_carlo(self):
        B, n, x = 2.0, 50, 1.5
        exact = two_point_marginal_tail(B, n, x)
        draws = sample_scaled_sums(DistributionSpec.two_point(B, 1), n,
                                   200_000, seed=3).ravel()
        p_hat = float(np.mean(draws > x))
        se = math.sqrt(exact * (1 - exact) / draws.size)
        assert p_hat == pytest.approx(exact, abs=4 * se)

    def test_degenerate_thresholds(self):
        assert two_point_marginal_tail(2.0, 10, 1e9) == 0.0
        assert two_point_marginal_tail(2.0, 10, -1e9) == pytest.approx(1.0)


class TestPoissonApprox:
    def test_pure_gaussian_hits_inverse_e(self):
        spec = DistributionSpec.gaussian(CovarianceModel.identity(50))
        rec = poisson_approx_check(spec, n=10, d=50, reps=50_000, seed=5)
        assert rec.f_hat == pytest.approx(math.exp(-1.0), abs=3 * rec.se_f)

    def test_residual_fields_consistent(self):
        spec = DistributionSpec.two_point(2.0, 20)
        rec = poisson_approx_check(spec, n=200, d=20, reps=50_000, seed=7)
        assert rec.residual == pytest.approx(
            abs(rec.f_hat - math.exp(-rec.lambda_hat)))
        assert rec.residual_bound == pytest.approx(
            rec.lambda_hat**2 / rec.d)
        assert rec.lambda_hat <= 10.0


class TestPowerLawFit:
    def test_exact_power_law(self):
        xs = [250.0, 500.0, 1000.0, 2000.0]
        ys = [3.0 * x**-0.5 for x in xs]
        slope, se, intercept = fit_power_law(xs, ys)
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert se <= 1e-12
        assert intercept == pytest.approx(math.log(3.0), abs=1e-10)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            fit_power_law([1.0], [1.0])


class TestRateCurve:
    def test_null_gaussian_has_no_trend(self):
        spec = DistributionSpec.gaussian(CovarianceModel.identity(10))
        curve = rate_curve(spec, 10, [100, 200, 400, 800], reps=20_000,
                           seed=9, ref_factor=2)
        # distances are pure noise, so no statistically resolved slope
        assert abs(curve.slope) <= max(2.0 * curve.slope_se, 0.5)
        for p in curve.points:
            assert p.distance <= 5.0 / math.sqrt(20_000)

    def test_ascending_n_required(self):
        spec = DistributionSpec.rademacher(3)
        with pytest.raises(ValueError):
            rate_curve(spec, 3, [200, 100], reps=1000)


class TestZeroSkewExactOracle:
    def test_reference_limit(self):
        # huge n: the coordinate law is essentially N(0, 2)
        x = np.array([1.0, 2.0, 3.0])
        val = rademacher_gaussian_max_cdf(100_000, 20, x)
        ref = ndtr(x / math.sqrt(2.0)) ** 20
        np.testing.assert_allclose(val, ref, atol=1e-4)

    def test_inverse_n_rate(self):
        # the zero-skewness smooth-case distance decays like n^{-1}; the
        # Monte Carlo criterion at R=1e6 cannot resolve these 1e-4 scale
        # distances, so the rate is verified on the exact enumeration
        xs = np.linspace(-1.0, 5.0, 4001)
        dists = []
        for n in (100, 200, 400):
            exact = rademacher_gaussian_max_cdf(n, 20, xs)
            ref = ndtr(xs / math.sqrt(2.0)) ** 20
            dists.append(float(np.max(np.abs(exact - ref))))
        slope, _, _ = fit_power_law([100.0, 200.0, 400.0], dists)
        assert -1.35 <= slope <= -0.65
        assert dists[0] == pytest.approx(5.33e-4, rel=0.05)
