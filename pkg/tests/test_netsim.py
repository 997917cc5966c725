"""Slot-level transmission engine and pooled Monte Carlo runners."""

import numpy as np
import pytest

from fountaincell import (CodingParams, DomainError, FadingDraw, Mode,
                          NetworkRealization, SampleSizeError, SimConfig,
                          Window, draw_fading, estimate_typical_ccdf,
                          make_realization, ps_fixed, run_continuous_mode,
                          run_fixed_rate_sweep, run_paired_sweeps, run_pooled,
                          run_trial, simulate_packet_times)


def single_pair_net() -> NetworkRealization:
    # one BS, one user, no interference anywhere
    return NetworkRealization(
        bs_points=np.array([[1.0, 1.0]]),
        user_points=np.array([[1.5, 1.0]]),
        link_distance=np.array([0.5]),
        pathloss_matrix=np.array([[0.5 ** -3.0]]),
        window=Window(10.0), alpha=3.0)


class TestEngineNoInterference:
    # with I = 0 the SIR is infinite, so accumulation finishes in slot 1
    @pytest.mark.parametrize("mode", [Mode.RATELESS_ACK, Mode.CONTINUOUS])
    def test_accumulating_modes_decode_first_slot(self, mode):
        net = single_pair_net()
        fad = FadingDraw(gains=np.array([[2.0]]))
        t, success, avg = simulate_packet_times(
            net, fad, CodingParams(75.0, 50, 3.0), mode)
        assert t.tolist() == [1] and success.tolist() == [True]
        assert avg.tolist() == [0.0]

    def test_fixed_rate_tests_once_at_n(self):
        net = single_pair_net()
        fad = FadingDraw(gains=np.array([[2.0]]))
        t, success, _ = simulate_packet_times(
            net, fad, CodingParams(75.0, 50, 3.0), Mode.FIXED_RATE)
        assert t.tolist() == [50] and success.tolist() == [True]

    def test_run_trial_outcome_fields(self):
        net = single_pair_net()
        out = run_trial(net, FadingDraw(gains=np.array([[2.0]])),
                        CodingParams(75.0, 50, 3.0), Mode.RATELESS_ACK)
        assert len(out) == 1
        assert out[0].pair_id == 0 and out[0].T_slots == 1
        assert out[0].success and out[0].D == 0.5


def test_continuous_matches_closed_form():
    # constant interference => T = floor(K / log2(1+SIR)) + 1, truncated at N
    net = make_realization(1.0, Window(8.0), 3.5,
                           np.random.default_rng(np.random.SeedSequence(5)))
    fad = draw_fading(net.n_pairs,
                      np.random.default_rng(np.random.SeedSequence(11)))
    params = CodingParams(75.0, 200, 3.5)
    t, success, _ = simulate_packet_times(net, fad, params, Mode.CONTINUOUS)
    power = fad.gains * net.pathloss_matrix
    sig = power.diagonal().copy()
    inter = power.sum(axis=1) - sig
    that = np.floor(75.0 / np.log2(1.0 + sig / inter)) + 1
    assert np.array_equal(t, np.minimum(that, 200).astype(np.int64))
    assert np.array_equal(success, that <= 200)
    assert 0 < success.sum() < net.n_pairs  # both branches exercised


def brute_force_rateless(net, fad, k_bits, n_slots):
    # independent reference: recompute interference from the alive set each slot
    n = net.n_pairs
    power = fad.gains * net.pathloss_matrix
    sig = power.diagonal().copy()
    np.fill_diagonal(power, 0.0)
    alive = np.ones(n, dtype=bool)
    cum = np.zeros(n)
    t = np.full(n, n_slots, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    for m in range(1, n_slots + 1):
        cum += power[:, alive].sum(axis=1)
        avg = cum / m
        sir = np.divide(sig, avg, out=np.full(n, np.inf), where=avg > 0)
        newly = ~done & (k_bits < m * np.log2(1.0 + sir))
        t[newly] = m
        done |= newly
        alive &= ~newly
        if not alive.any():
            break
    return t, done


@pytest.mark.parametrize("seed", [1, 2])
def test_incremental_interference_matches_brute_force(seed):
    net = make_realization(1.0, Window(8.0), 3.0,
                           np.random.default_rng(np.random.SeedSequence(seed)))
    fad = draw_fading(net.n_pairs,
                      np.random.default_rng(np.random.SeedSequence(1000 + seed)))
    params = CodingParams(75.0, 120, 3.0)
    t, success, _ = simulate_packet_times(net, fad, params, Mode.RATELESS_ACK)
    t_ref, success_ref = brute_force_rateless(net, fad, 75.0, 120)
    assert np.array_equal(t, t_ref)
    assert np.array_equal(success, success_ref)


class TestPairedSweeps:
    def test_coupling_and_ordering(self):
        cfg = SimConfig(alpha=3.0, window_side=10.0, realizations=3,
                        fading_trials=2, master_seed=9)
        fixed, rateless = run_paired_sweeps(cfg, (20, 50, 120))
        assert [p.n_max for p in fixed] == [20, 50, 120]
        assert [p.n_max for p in rateless] == [20, 50, 120]
        for pf, pr in zip(fixed, rateless):
            assert pf.n_samples == pr.n_samples
            # pathwise: every fixed-rate success decodes under rateless too
            assert pr.n_success >= pf.n_success
            assert pr.ps_hat >= pf.ps_hat
            assert pr.mean_t <= pr.n_max
            assert pf.ps_lo <= pf.ps_hat <= pf.ps_hi
            assert pr.rate >= pf.rate

    def test_fixed_sweep_tracks_analytic(self):
        # at alpha = 4 the distance-model bias is well under the tolerance
        cfg = SimConfig(alpha=4.0, window_side=20.0, realizations=20,
                        fading_trials=1, master_seed=424)
        for p in run_fixed_rate_sweep(cfg, (20, 60, 120)):
            analytic = ps_fixed(CodingParams(75.0, p.n_max, 4.0))
            assert abs(p.ps_hat - analytic) <= 0.03


class TestPooled:
    def test_worker_count_invariance(self):
        cfg = SimConfig(alpha=3.5, window_side=10.0, n_max=80,
                        realizations=4, fading_trials=2, master_seed=31)
        a = run_pooled(cfg, workers=1)
        b = run_pooled(cfg, workers=2)
        for name in ("trial_id", "pair_id", "d", "t_slots", "success"):
            assert np.array_equal(getattr(a, name), getattr(b, name)), name
        assert a.mode is b.mode and a.n_max == b.n_max

    def test_continuous_mode_rate_gain(self):
        cfg = SimConfig(alpha=4.0, window_side=10.0, n_max=60,
                        realizations=3, fading_trials=1, master_seed=12,
                        mode=Mode.CONTINUOUS)
        res = run_continuous_mode(cfg)
        assert res.gbar_r_hat >= 1.0
        assert res.curve.values[0] == 1.0
        assert res.n_samples == res.curve.n_samples

    def test_too_few_samples(self):
        cfg = SimConfig(alpha=3.0, window_side=6.0, realizations=1,
                        fading_trials=1, master_seed=3)
        with pytest.raises(SampleSizeError):
            estimate_typical_ccdf(cfg)


class TestFading:
    def test_draw_shape_and_positivity(self):
        fad = draw_fading(7, np.random.default_rng(0))
        assert fad.gains.shape == (7, 7)
        assert np.all(fad.gains > 0)

    def test_validation(self):
        with pytest.raises(DomainError):
            FadingDraw(gains=np.ones(4))
        with pytest.raises(DomainError):
            FadingDraw(gains=np.array([[1.0, 0.0], [1.0, 1.0]]))

    def test_mismatched_net(self):
        net = single_pair_net()
        with pytest.raises(DomainError):
            simulate_packet_times(net, FadingDraw(gains=np.ones((2, 2))),
                                  CodingParams(75.0, 50, 3.0),
                                  Mode.RATELESS_ACK)


def test_fractional_n_max_rejected():
    net = single_pair_net()
    with pytest.raises(DomainError):
        simulate_packet_times(net, FadingDraw(gains=np.array([[1.0]])),
                              CodingParams(75.0, 10.5, 3.0),
                              Mode.RATELESS_ACK)
