"""Per-user paired gains, gamma fits, and curve agreement summaries."""

import numpy as np
import pytest

from fountaincell import (AnalyticCurve, CcdfCurve, CodingParams, DomainError,
                          GridMismatchError, PerUserRecord, SampleSizeError,
                          Window, curve_diff, d_gain_rank_correlation,
                          fit_gamma, make_realization,
                          paired_gain_bootstrap_sd, per_user_report,
                          run_paired_trials)


class TestGammaFit:
    def test_recovers_known_parameters(self):
        x = np.random.default_rng(123).gamma(3.0, 2.0, size=10_000)
        fit = fit_gamma(x)
        assert fit.shape == pytest.approx(3.0, rel=0.1)
        assert fit.scale == pytest.approx(2.0, rel=0.1)
        assert fit.ks_distance < 0.02
        assert fit.n_samples == 10_000

    def test_truncation_filter(self):
        x = np.random.default_rng(5).gamma(3.0, 2.0, size=5_000)
        xt = np.minimum(x, 8.0)
        fit = fit_gamma(xt, n_max=8.0)
        assert fit.n_samples == int(np.sum(xt < 8.0))
        # without the filter the truncation spike drags the fit
        assert fit_gamma(xt).n_samples == 5_000

    def test_constant_sample_rejected(self):
        with pytest.raises(DomainError):
            fit_gamma(np.full(200, 5.0))

    def test_too_few_samples(self):
        with pytest.raises(SampleSizeError):
            fit_gamma(np.random.default_rng(1).gamma(3.0, 2.0, size=50))

    def test_nonpositive_rejected(self):
        x = np.concatenate([np.random.default_rng(2).gamma(3.0, 2.0, 200),
                            [-1.0]])
        with pytest.raises(DomainError):
            fit_gamma(x)


@pytest.fixture(scope="module")
def small_paired():
    net = make_realization(1.0, Window(6.0), 3.0,
                           np.random.default_rng(np.random.SeedSequence(4)))
    params = CodingParams(40.0, 60, 3.0)
    trials = run_paired_trials(net, params, 500,
                               np.random.default_rng(np.random.SeedSequence(8)))
    return net, trials


class TestPairedTrials:
    def test_minimum_trials_enforced(self):
        net = make_realization(1.0, Window(6.0), 3.0,
                               np.random.default_rng(np.random.SeedSequence(4)))
        with pytest.raises(SampleSizeError):
            run_paired_trials(net, CodingParams(40.0, 60, 3.0), 10,
                              np.random.default_rng(0))

    def test_shapes_and_coupling(self, small_paired):
        net, trials = small_paired
        assert trials.t_rateless.shape == (500, net.n_pairs)
        # common draws: fixed-rate success implies rateless success
        assert not np.any(trials.success_fixed & ~trials.success_rateless)
        assert np.all(trials.t_rateless >= 1)
        assert np.all(trials.t_rateless <= trials.n_max)

    def test_per_user_records(self, small_paired):
        net, trials = small_paired
        records = per_user_report(net, CodingParams(40.0, 60, 3.0), 500,
                                  np.random.default_rng(np.random.SeedSequence(8)))
        assert len(records) == net.n_pairs
        for r in records:
            assert r.ps_rateless >= r.ps_fixed
            assert 1.0 <= r.mean_t <= 60.0
            assert r.censored == (r.ps_fixed == 0.0)
            if r.censored:
                assert r.gain_gr == np.inf
            else:
                # pathwise coupling plus mean_t <= N force the gain above 1
                assert r.gain_gr >= 1.0

    def test_bootstrap_sd(self, small_paired):
        net, trials = small_paired
        sd = paired_gain_bootstrap_sd(
            trials, np.random.default_rng(np.random.SeedSequence(77)),
            n_boot=100)
        assert sd.shape == (net.n_pairs,)
        ps_f = trials.success_fixed.mean(axis=0)
        assert np.all(np.isfinite(sd[ps_f >= 0.05]))
        assert np.all(sd[ps_f == 0.0] == np.inf)
        assert np.all(sd[np.isfinite(sd)] >= 0.0)


def _flat_sim_curve(n: int = 10) -> CcdfCurve:
    grid = np.arange(1, n + 1, dtype=float)
    values = np.linspace(1.0, 0.0, n)
    return CcdfCurve(t_grid=grid, values=values,
                     lo=np.clip(values - 0.05, 0.0, 1.0),
                     hi=np.clip(values + 0.05, 0.0, 1.0), n_samples=100)


class TestCurveDiff:
    def test_identical_curves(self):
        sim = _flat_sim_curve()
        analytic = AnalyticCurve(t_grid=sim.t_grid, values=sim.values.copy(),
                                 kind="ccdf_ub_thm1")
        d = curve_diff(sim, analytic)
        assert d.n_points == 10
        assert d.max_abs_diff == 0.0
        assert d.frac_inside_ci == 1.0
        assert d.frac_bound_respected == 1.0

    def test_bound_violation_detected(self):
        sim = _flat_sim_curve()
        low = np.clip(sim.values - 0.3, 0.0, 1.0)
        analytic = AnalyticCurve(t_grid=sim.t_grid, values=low,
                                 kind="ccdf_ub_thm1")
        d = curve_diff(sim, analytic, ci_slack_halfwidths=2.0)
        assert d.frac_bound_respected < 1.0
        assert d.max_abs_diff == pytest.approx(0.3)

    def test_grid_mismatch(self):
        sim = _flat_sim_curve()
        analytic = AnalyticCurve(t_grid=sim.t_grid + 0.5,
                                 values=sim.values.copy(), kind="ccdf_ub_thm1")
        with pytest.raises(GridMismatchError):
            curve_diff(sim, analytic)
        shorter = AnalyticCurve(t_grid=sim.t_grid[:-1],
                                values=sim.values[:-1], kind="ccdf_ub_thm1")
        with pytest.raises(GridMismatchError):
            curve_diff(sim, shorter)


def _record(pair_id, d, gain, censored=False):
    return PerUserRecord(pair_id=pair_id, d=d, ps_rateless=1.0, ps_fixed=0.5,
                         mean_t=10.0, rate_rateless=2.0, rate_fixed=1.0,
                         gain_gr=gain, censored=censored)


class TestRankCorrelation:
    def test_perfectly_opposed(self):
        records = [_record(i, float(i + 1), 10.0 - i) for i in range(5)]
        assert d_gain_rank_correlation(records) == pytest.approx(-1.0)

    def test_censored_excluded(self):
        records = [_record(i, float(i + 1), 10.0 - i) for i in range(5)]
        records.append(_record(5, 0.1, np.inf, censored=True))
        assert d_gain_rank_correlation(records) == pytest.approx(-1.0)

    def test_too_few(self):
        with pytest.raises(SampleSizeError):
            d_gain_rank_correlation([_record(0, 1.0, 2.0),
                                     _record(1, 2.0, 1.5)])

    def test_real_records_in_range(self, small_paired):
        net, _ = small_paired
        records = per_user_report(net, CodingParams(40.0, 60, 3.0), 500,
                                  np.random.default_rng(np.random.SeedSequence(8)))
        rho = d_gain_rank_correlation(records)
        assert -1.0 <= rho <= 1.0
