"""Precision-form update: frozen examples, oracle equivalence, invariants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from womkalman import Belief, bayes_update, kalman_gain


def direct_conditioning(theta_bar, var0, s, var_e):
    """Independent oracle: condition the joint Gaussian (theta, s) directly.

    mean = theta_bar + (s - theta_bar) * var0 / (var0 + var_e)
    var  = var0 * var_e / (var0 + var_e)
    """
    w = var0 / (var0 + var_e)
    return theta_bar + (s - theta_bar) * w, var0 * var_e / (var0 + var_e)


class TestBayesUpdateExamples:
    def test_symmetric_half_weight(self):
        post = bayes_update(Belief(0.0, 1.0), observation=2.0, obs_precision=1.0)
        assert post.mean == 1.0
        assert post.precision == 2.0

    def test_flat_prior_returns_observation(self):
        post = bayes_update(Belief(5.0, 0.0), observation=3.0, obs_precision=4.0)
        assert post.mean == 3.0
        assert post.precision == 4.0

    def test_against_direct_conditioning(self):
        # prior precision 2 -> var0 = 1/2; obs precision 1 -> var_e = 1
        post = bayes_update(Belief(1.0, 2.0), observation=4.0, obs_precision=1.0)
        mean, var = direct_conditioning(1.0, 0.5, 4.0, 1.0)
        assert post.mean == pytest.approx(mean, rel=1e-15)
        assert post.precision == pytest.approx(1.0 / var, rel=1e-15)
        assert post.mean == pytest.approx(2.0, abs=1e-15)
        assert post.precision == pytest.approx(3.0, abs=1e-15)


class TestKalmanGainExamples:
    def test_equal_precisions(self):
        assert kalman_gain(1.0, 1.0) == 0.5

    def test_flat_prior_gain_is_one(self):
        assert kalman_gain(0.0, 7.0) == 1.0

    def test_hand_value(self):
        assert kalman_gain(3.0, 1.0) == 0.25


class TestValidation:
    def test_rejects_nonpositive_obs_precision(self):
        with pytest.raises(ValueError):
            kalman_gain(1.0, 0.0)
        with pytest.raises(ValueError):
            bayes_update(Belief(0.0, 1.0), 1.0, -2.0)

    def test_rejects_nonfinite_inputs(self):
        with pytest.raises(ValueError):
            bayes_update(Belief(0.0, 1.0), math.nan, 1.0)
        with pytest.raises(ValueError):
            bayes_update(Belief(0.0, 1.0), math.inf, 1.0)
        with pytest.raises(ValueError):
            kalman_gain(math.nan, 1.0)
        with pytest.raises(ValueError):
            Belief(math.inf, 1.0)
        with pytest.raises(ValueError):
            Belief(0.0, -1.0)

    def test_variance_helpers(self):
        assert Belief(0.0, 0.0).variance == math.inf
        assert Belief.from_variance(1.0, math.inf).precision == 0.0
        assert Belief.from_variance(1.0, 0.25).precision == 4.0
        with pytest.raises(ValueError):
            Belief.from_variance(0.0, -1.0)


finite_means = st.floats(min_value=-1e6, max_value=1e6)
variances = st.floats(min_value=1e-6, max_value=1e6)


class TestProperties:
    @given(finite_means, variances, finite_means, variances)
    @settings(max_examples=500)
    def test_precision_additivity_exact(self, theta_bar, var0, s, var_e):
        post = bayes_update(Belief(theta_bar, 1.0 / var0), s, 1.0 / var_e)
        assert post.precision == 1.0 / var0 + 1.0 / var_e

    @given(finite_means, variances, finite_means, variances)
    @settings(max_examples=500)
    def test_matches_direct_conditioning(self, theta_bar, var0, s, var_e):
        """Precision-form update == joint-Gaussian conditioning to 1e-12.

        Mean discrepancy is scaled by max(|theta_bar|, |s|, tiny): the
        posterior mean is a convex combination of the two, so their size is
        its natural scale.
        """
        post = bayes_update(Belief(theta_bar, 1.0 / var0), s, 1.0 / var_e)
        mean, var = direct_conditioning(theta_bar, var0, s, var_e)
        scale = max(abs(theta_bar), abs(s), 1e-300)
        assert abs(post.mean - mean) <= 1e-12 * scale
        assert abs(post.variance - var) <= 1e-12 * var

    @given(st.floats(min_value=0.0, max_value=1e12), st.floats(min_value=1e-12, max_value=1e12))
    @settings(max_examples=500)
    def test_gain_range(self, prior_prec, obs_prec):
        alpha = kalman_gain(prior_prec, obs_prec)
        assert 0.0 < alpha <= 1.0
        if prior_prec == 0.0:
            assert alpha == 1.0
        elif prior_prec / obs_prec > 1e-15:
            # strict inequality holds once the prior is above rounding level
            assert alpha < 1.0

    @given(finite_means, variances, finite_means, variances)
    @settings(max_examples=500)
    def test_posterior_mean_between_prior_and_observation(self, theta_bar, var0, s, var_e):
        post = bayes_update(Belief(theta_bar, 1.0 / var0), s, 1.0 / var_e)
        lo, hi = min(theta_bar, s), max(theta_bar, s)
        slack = 1e-12 * max(abs(theta_bar), abs(s), 1.0)
        assert lo - slack <= post.mean <= hi + slack
