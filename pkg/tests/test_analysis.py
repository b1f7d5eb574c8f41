"""Tests for the Monte Carlo runner, empirical ROC construction, and AUC forms."""

import math

import numpy as np
import pytest
from scipy import integrate

from ambc_detect.analysis import (
    AucInputs,
    auc_closed_form,
    auc_inputs,
    auc_trapezoid,
    ber,
    empirical_roc,
    run_trials,
    wilson_interval,
)
from ambc_detect.channel import LinkBudget, NoiseModel
from ambc_detect.detectors import DetectorConfig, HypothesisMoments
from ambc_detect.specfun import q_function, q_inverse
from ambc_detect.sysmodel import ScenarioParams

BUDGET = LinkBudget(sigma_sr_sq=1.0, sigma_st_sq=1.0, sigma_tr_sq=1.0, noise_var_w=0.5)


def make_params(**overrides) -> ScenarioParams:
    base = dict(
        p_s_w=1.0,
        budget=BUDGET,
        noise=NoiseModel(family="cscg", variance_w=0.5),
        n_samples=16,
        signal_model="iid_cscg",
    )
    base.update(overrides)
    return ScenarioParams(**base)


class TestWilsonInterval:
    def test_symmetric_midpoint(self):
        lo, hi = wilson_interval(50, 100)
        assert lo == pytest.approx(0.40383, abs=1e-4)
        assert hi == pytest.approx(0.59617, abs=1e-4)

    def test_contains_proportion(self):
        for k, n in ((3, 50), (490, 500), (1, 10_000)):
            lo, hi = wilson_interval(k, n)
            assert 0.0 <= lo <= k / n <= hi <= 1.0

    def test_zero_and_full_counts_stay_in_unit_interval(self):
        assert wilson_interval(0, 40)[0] == 0.0
        assert wilson_interval(40, 40)[1] == 1.0

    def test_narrows_with_samples(self):
        w_small = wilson_interval(10, 100)
        w_big = wilson_interval(1000, 10_000)
        assert (w_big[1] - w_big[0]) < (w_small[1] - w_small[0])

    def test_rejects_impossible_counts(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 4)


class TestErrorRate:
    def test_weighted_combination(self):
        # 0.7 * 0.01 + 0.3 * (1 - 0.8)
        assert ber(0.01, 0.8, prior_h0=0.7, prior_h1=0.3) == pytest.approx(0.067)

    def test_equal_priors_default(self):
        assert ber(0.1, 0.9) == pytest.approx(0.1)

    def test_perfect_detector(self):
        assert ber(0.0, 1.0) == 0.0

    def test_rejects_rates_outside_unit_interval(self):
        with pytest.raises(ValueError):
            ber(1.2, 0.5)

    def test_rejects_inconsistent_priors(self):
        with pytest.raises(ValueError):
            ber(0.1, 0.9, prior_h0=0.6, prior_h1=0.6)


class TestEmpiricalRoc:
    def test_hand_worked_staircase(self):
        roc = empirical_roc(np.array([0.0, 1.0, 2.0]), np.array([1.5, 2.5]))
        np.testing.assert_allclose(roc.pf, [0.0, 1 / 3, 2 / 3])
        np.testing.assert_allclose(roc.pd, [0.5, 1.0, 1.0])
        assert auc_trapezoid(roc) == pytest.approx(11 / 12)

    def test_pf_strictly_increasing(self):
        rng = np.random.default_rng(0)
        roc = empirical_roc(rng.normal(0, 1, 500), rng.normal(1, 1, 500))
        assert np.all(np.diff(roc.pf) > 0)
        assert np.all(np.diff(roc.pd) >= 0)
        assert np.all((roc.pf >= 0) & (roc.pf <= 1))
        assert np.all((roc.pd >= 0) & (roc.pd <= 1))

    def test_separated_scores_dominate_chance(self):
        rng = np.random.default_rng(1)
        roc = empirical_roc(rng.normal(0, 1, 2000), rng.normal(2, 1, 2000))
        assert auc_trapezoid(roc) > 0.9

    def test_identical_distributions_near_chance(self):
        rng = np.random.default_rng(2)
        roc = empirical_roc(rng.normal(0, 1, 4000), rng.normal(0, 1, 4000))
        assert auc_trapezoid(roc) == pytest.approx(0.5, abs=0.03)

    def test_rejects_empty_scores(self):
        with pytest.raises(ValueError):
            empirical_roc(np.array([]), np.array([1.0]))


class TestClosedFormAuc:
    def test_no_separation_is_chance(self):
        assert auc_closed_form(AucInputs(a=0.0, b=1.0)) == pytest.approx(0.5)

    def test_hand_value(self):
        # Q(-1 / sqrt(2)) = 1 - Q(0.70711)
        assert auc_closed_form(AucInputs(a=-1.0, b=1.0)) == pytest.approx(
            1.0 - q_function(1.0 / math.sqrt(2.0)), rel=1e-12
        )

    def test_inputs_from_moments_sign_convention(self):
        moments = HypothesisMoments(
            form="gaussian", mean_h0=1.0, mean_h1=3.0, var_h0=2.0, var_h1=4.0
        )
        inputs = auc_inputs(moments)
        assert inputs.a == pytest.approx(-1.0)
        assert inputs.b == pytest.approx(math.sqrt(0.5))
        assert auc_closed_form(inputs) > 0.5

    def test_matches_direct_quadrature_of_roc_integral(self):
        # AUC = int Q(b t + a) phi(t) dt over the standardized threshold axis
        inputs = AucInputs(a=-1.3, b=0.8)

        def integrand(t):
            return q_function(inputs.b * t + inputs.a) * math.exp(-t * t / 2) / math.sqrt(2 * math.pi)

        direct, _ = integrate.quad(integrand, -np.inf, np.inf)
        assert auc_closed_form(inputs) == pytest.approx(direct, abs=1e-9)

    def test_matches_pf_domain_trapezoid(self):
        inputs = AucInputs(a=-0.9, b=1.1)
        pf = np.linspace(1e-9, 1 - 1e-9, 200_001)
        pd = q_function(q_inverse(pf) * inputs.b + inputs.a)
        assert auc_closed_form(inputs) == pytest.approx(float(np.trapezoid(pd, pf)), abs=1e-5)

    def test_rejects_nonpositive_deviation_ratio(self):
        with pytest.raises(ValueError):
            AucInputs(a=0.0, b=0.0)


class TestTrialRunner:
    def test_same_seed_reproduces_summary(self):
        params = make_params()
        det = DetectorConfig("ted")
        a = run_trials(params, det, 300, seed=9)
        b = run_trials(params, det, 300, seed=9)
        assert a == b

    def test_different_seeds_differ(self):
        params = make_params()
        det = DetectorConfig("ted")
        a = run_trials(params, det, 300, seed=9)
        b = run_trials(params, det, 300, seed=10)
        assert (a.false_alarms, a.detections) != (b.false_alarms, b.detections)

    def test_counts_are_consistent(self):
        params = make_params()
        summary = run_trials(params, DetectorConfig("ted"), 500, seed=3)
        assert summary.n_h0 + summary.n_h1 == 500
        assert summary.empirical_pf == summary.false_alarms / summary.n_h0
        assert summary.empirical_pd == summary.detections / summary.n_h1
        misses = summary.n_h1 - summary.detections
        assert summary.empirical_ber == (summary.false_alarms + misses) / 500

    def test_fixed_channel_false_alarm_calibration(self):
        params = make_params(n_samples=128)
        summary = run_trials(
            params, DetectorConfig("ted"), 4000, seed=17, target_pf=0.1, channel_mode="fixed"
        )
        se = math.sqrt(0.1 * 0.9 / summary.n_h0)
        assert abs(summary.empirical_pf - 0.1) < 4 * se

    def test_scores_encode_decisions(self):
        params = make_params()
        summary, scores = run_trials(
            params, DetectorConfig("ted"), 400, seed=5, collect_scores=True
        )
        assert scores.scores_h0.size == summary.n_h0
        assert scores.scores_h1.size == summary.n_h1
        assert int(np.sum(scores.scores_h0 > 0)) == summary.false_alarms
        assert int(np.sum(scores.scores_h1 > 0)) == summary.detections

    def test_single_hypothesis_priors(self):
        params = make_params(prior_h0=0.0, prior_h1=1.0)
        summary = run_trials(params, DetectorConfig("ted"), 100, seed=2)
        assert summary.n_h0 == 0
        assert math.isnan(summary.empirical_pf)
        assert summary.n_h1 == 100

    def test_fingerprint_tracks_protocol(self):
        params = make_params()
        det = DetectorConfig("ted")
        fixed = run_trials(params, det, 50, seed=1, channel_mode="fixed")
        fading = run_trials(params, det, 50, seed=1, channel_mode="fading")
        assert fixed.config_fingerprint != fading.config_fingerprint

    def test_parameter_modes_change_fingerprint(self):
        params = make_params(signal_model="constant_unit")
        det = DetectorConfig("jced")
        avg = run_trials(params, det, 60, seed=4, threshold_mode="genie")
        genie = run_trials(
            params, det, 60, seed=4, threshold_mode="genie", param_mode="genie"
        )
        assert avg.config_fingerprint != genie.config_fingerprint

    def test_genie_parameters_require_genie_thresholds(self):
        params = make_params()
        with pytest.raises(ValueError):
            run_trials(
                params, DetectorConfig("ied"), 10, seed=0,
                threshold_mode="average", param_mode="genie",
            )

    def test_rejects_unknown_modes(self):
        params = make_params()
        with pytest.raises(ValueError):
            run_trials(params, DetectorConfig("ted"), 10, seed=0, channel_mode="ergodic")
        with pytest.raises(ValueError):
            run_trials(params, DetectorConfig("ted"), 10, seed=0, threshold_mode="oracle")
        with pytest.raises(ValueError):
            run_trials(params, DetectorConfig("ted"), 0, seed=0)

    def test_roc_from_collected_scores(self):
        params = make_params(n_samples=64, p_s_w=2.0)
        _, scores = run_trials(
            params,
            DetectorConfig("ted"),
            2000,
            seed=21,
            channel_mode="fixed",
            collect_scores=True,
        )
        roc = empirical_roc(scores.scores_h0, scores.scores_h1)
        assert np.all(np.diff(roc.pf) > 0)
        assert auc_trapezoid(roc) > 0.5
