"""Discrete-slot Monte Carlo engine for the coded downlink.

One trial = one network realization plus one quasi-static fading draw.
Received power from BS k at user i is gains[i,k] * pathloss[i,k], fixed
for the whole packet.  Per slot n the engine accumulates the running-mean
interference Ihat_i(n) and tests K < n * log2(1 + S_i / Ihat_i(n)); in
RATELESS_ACK mode a successful BS falls silent from slot n+1 on
(simultaneous slot-end updates, so pair order cannot matter), in
CONTINUOUS mode interferers never stop, and FIXED_RATE is the single
test at n = N under full interference.

Interference is maintained incrementally: a running per-user total with
the silenced BS's column subtracted on shutdown.  Sampled slots recompute
the sum directly and assert agreement; monotonicity of I and Ihat >= I
are asserted every slot.

Trials are embarrassingly parallel: every realization gets its own
SeedSequence child spawned from the master seed, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import multiprocessing as mp
from dataclasses import dataclass

import numpy as np

from .curves import CcdfCurve, empirical_ccdf, wilson_interval
from .errors import DomainError, SampleSizeError
from .geometry import NetworkRealization, Window, make_realization

__all__ = [
    "Mode",
    "FadingDraw",
    "LinkOutcome",
    "draw_fading",
    "simulate_packet_times",
    "run_trial",
    "PooledOutcomes",
    "run_pooled",
    "estimate_typical_ccdf",
    "SweepPoint",
    "run_fixed_rate_sweep",
    "run_rateless_sweep",
    "run_paired_sweeps",
    "ContinuousModeResult",
    "run_continuous_mode",
]


class Mode(enum.Enum):
    RATELESS_ACK = "RATELESS_ACK"
    FIXED_RATE = "FIXED_RATE"
    CONTINUOUS = "CONTINUOUS"


@dataclass(frozen=True, eq=False)
class FadingDraw:
    """|h|^2 per (user i, BS k): i.i.d. unit-mean exponential, one draw
    per packet (quasi-static)."""

    gains: np.ndarray

    def __post_init__(self) -> None:
        if self.gains.ndim != 2:
            raise DomainError("gains must be a 2-D array")
        if not np.all(self.gains > 0):
            raise DomainError("all fading gains must be positive")


def draw_fading(n_pairs: int, rng: np.random.Generator) -> FadingDraw:
    g = rng.exponential(1.0, size=(n_pairs, n_pairs))
    while np.any(g == 0.0):  # measure-zero, but the invariant is strict
        z = g == 0.0
        g[z] = rng.exponential(1.0, size=int(z.sum()))
    return FadingDraw(gains=g)


@dataclass(frozen=True)
class LinkOutcome:
    pair_id: int
    T_slots: int
    success: bool
    D: float
    mean_avg_interference_at_T: float


def _as_slots(n_max: float) -> int:
    n = int(n_max)
    if n != n_max or n < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    return n


_SPOT_CHECK_EVERY = 100  # recompute interference directly every 100 slots


def simulate_packet_times(net: NetworkRealization, fading: FadingDraw,
                          params, mode: Mode):
    """Array form of one trial: returns (T, success, avg_interference_at_T).

    T is the truncated packet time min(N, That) in slots; success means
    That <= N.  avg_interference_at_T is Ihat_i(T_i), a diagnostic.
    """
    n = net.n_pairs
    if fading.gains.shape != (n, n):
        raise DomainError("fading dimensions do not match the realization")
    n_slots = _as_slots(params.n_max)
    k_bits = params.k_bits

    power = fading.gains * net.pathloss_matrix
    sig = power.diagonal().copy()
    np.fill_diagonal(power, 0.0)  # power is interference-only from here on

    if mode is Mode.FIXED_RATE:
        # single decode test at n = N, everything transmitting (Ihat = I)
        avg = power.sum(axis=1)
        sir = np.divide(sig, avg, out=np.full(n, np.inf), where=avg > 0)
        success = k_bits < n_slots * np.log2(1.0 + sir)
        return (np.full(n, n_slots, dtype=np.int64), success, avg)

    shutdowns = mode is Mode.RATELESS_ACK
    i_vec = power.sum(axis=1)
    i_tol = 1e-9 * (1.0 + float(i_vec.max(initial=0.0)))
    cum_i = np.zeros(n)
    undecided = np.ones(n, dtype=bool)
    t_out = np.full(n, n_slots, dtype=np.int64)
    success = np.zeros(n, dtype=bool)
    avg_at_t = np.zeros(n)
    spot_mid = max(1, n_slots // 2)

    for m in range(1, n_slots + 1):
        cum_i += i_vec
        avg = cum_i / m
        if not np.all(avg >= i_vec - i_tol):
            raise AssertionError("running-mean interference fell below "
                                 "instantaneous (bookkeeping bug)")
        sir = np.divide(sig, avg, out=np.full(n, np.inf), where=avg > 0)
        newly = undecided & (k_bits < m * np.log2(1.0 + sir))
        if newly.any():
            t_out[newly] = m
            success[newly] = True
            avg_at_t[newly] = avg[newly]
            undecided &= ~newly
        if not undecided.any():
            break
        if shutdowns and newly.any():
            # successes fall silent starting next slot
            prev = i_vec
            i_vec = i_vec - power[:, newly].sum(axis=1)
            if not np.all(i_vec <= prev + i_tol):
                raise AssertionError("interference increased after a shutdown")
            if m % _SPOT_CHECK_EVERY == 0 or m == spot_mid:
                direct = power[:, undecided].sum(axis=1)
                err = np.abs(i_vec - direct)
                if not np.all(err <= 1e-9 * (1.0 + direct)):
                    raise AssertionError("incremental interference drifted "
                                         "from direct recomputation")

    if undecided.any():
        avg_at_t[undecided] = avg[undecided]
    return (t_out, success, avg_at_t)


def run_trial(net: NetworkRealization, fading: FadingDraw, params,
              mode: Mode) -> list[LinkOutcome]:
    """One trial as a list of per-pair outcomes."""
    t, success, avg = simulate_packet_times(net, fading, params, mode)
    return [LinkOutcome(pair_id=i, T_slots=int(t[i]), success=bool(success[i]),
                        D=float(net.link_distance[i]),
                        mean_avg_interference_at_T=float(avg[i]))
            for i in range(net.n_pairs)]


@dataclass(frozen=True, eq=False)
class PooledOutcomes:
    """Outcomes pooled over pairs, realizations, and fading draws."""

    trial_id: np.ndarray
    pair_id: np.ndarray
    d: np.ndarray
    t_slots: np.ndarray
    success: np.ndarray
    mode: Mode
    n_max: int


class _CodingView:
    # minimal params view handed to the engine by the runners
    def __init__(self, k_bits: float, n_max: float):
        self.k_bits = k_bits
        self.n_max = n_max


def _realization_seeds(config) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.master_seed).spawn(config.realizations)


def _pooled_job(args):
    (r, seed, intensity, side, wraparound, alpha, k_bits, n_max,
     fading_trials, mode) = args
    geo_ss, *fad_ss = seed.spawn(1 + fading_trials)
    net = make_realization(intensity, Window(side, wraparound), alpha,
                           np.random.default_rng(geo_ss))
    params = _CodingView(k_bits, n_max)
    rows = []
    for j, fs in enumerate(fad_ss):
        fading = draw_fading(net.n_pairs, np.random.default_rng(fs))
        t, success, _ = simulate_packet_times(net, fading, params, mode)
        trial = r * fading_trials + j
        rows.append((np.full(net.n_pairs, trial, dtype=np.int64),
                     np.arange(net.n_pairs, dtype=np.int64),
                     net.link_distance.copy(), t, success))
    return rows


def _map_jobs(job_fn, jobs, workers: int):
    if workers <= 1:
        return [job_fn(j) for j in jobs]
    with mp.get_context("fork").Pool(processes=workers) as pool:
        return pool.map(job_fn, jobs, chunksize=1)


def run_pooled(config, mode: Mode | None = None, workers: int = 1) -> PooledOutcomes:
    """Run config.realizations x config.fading_trials trials and pool them.

    Results are identical for any `workers`: every realization owns a
    spawned seed and outputs are concatenated in realization order.
    """
    mode = config.mode if mode is None else mode
    seeds = _realization_seeds(config)
    jobs = [(r, seeds[r], config.intensity, config.window_side,
             getattr(config, "wraparound", True), config.alpha,
             config.k_bits, config.n_max,
             config.fading_trials, mode)
            for r in range(config.realizations)]
    results = _map_jobs(_pooled_job, jobs, workers)
    rows = [row for res in results for row in res]
    trial, pair, d, t, success = (np.concatenate(col) for col in zip(*rows))
    return PooledOutcomes(trial_id=trial, pair_id=pair, d=d, t_slots=t,
                          success=success, mode=mode, n_max=int(config.n_max))


def estimate_typical_ccdf(config, workers: int = 1) -> CcdfCurve:
    """Spatially averaged CCDF of T for the configured mode."""
    pooled = run_pooled(config, workers=workers)
    if pooled.t_slots.size < 100:
        raise SampleSizeError(
            f"only {pooled.t_slots.size} pooled samples (< 100); "
            "increase realizations, fading_trials, or the window")
    return empirical_ccdf(pooled.t_slots, int(config.n_max),
                          label=pooled.mode.value)


@dataclass(frozen=True)
class SweepPoint:
    """Pooled per-N estimates for one transmission mode."""

    n_max: int
    n_samples: int
    n_success: int
    ps_hat: float
    ps_lo: float
    ps_hi: float
    mean_t: float
    rate: float


def _sweep_job(args):
    (r, seed, intensity, side, wraparound, alpha, k_bits,
     fading_trials, n_grid, paired) = args
    geo_ss, *fad_ss = seed.spawn(1 + fading_trials)
    net = make_realization(intensity, Window(side, wraparound), alpha,
                           np.random.default_rng(geo_ss))
    fadings = [draw_fading(net.n_pairs, np.random.default_rng(fs))
               for fs in fad_ss]
    out = []
    for n_max in n_grid:
        params = _CodingView(k_bits, n_max)
        agg = {m: [0, 0, 0.0] for m in paired}  # samples, successes, sum T
        for fading in fadings:
            per_mode = {}
            for m in paired:
                t, success, _ = simulate_packet_times(net, fading, params, m)
                per_mode[m] = (t, success)
                agg[m][0] += t.size
                agg[m][1] += int(success.sum())
                agg[m][2] += float(t.sum())
            if Mode.FIXED_RATE in per_mode and Mode.RATELESS_ACK in per_mode:
                fx, rl = per_mode[Mode.FIXED_RATE][1], per_mode[Mode.RATELESS_ACK][1]
                if np.any(fx & ~rl):
                    raise AssertionError(
                        "fixed-rate success without rateless success on a "
                        "paired draw (coupling violated)")
        out.append({m: tuple(v) for m, v in agg.items()})
    return out


def _run_sweeps(config, n_grid, modes, workers: int):
    n_grid = [int(v) for v in n_grid]
    if not n_grid:
        raise DomainError("n_grid must be non-empty")
    seeds = _realization_seeds(config)
    jobs = [(r, seeds[r], config.intensity, config.window_side,
             getattr(config, "wraparound", True), config.alpha, config.k_bits,
             config.fading_trials, tuple(n_grid), tuple(modes))
            for r in range(config.realizations)]
    results = _map_jobs(_sweep_job, jobs, workers)
    sweeps: dict[Mode, list[SweepPoint]] = {m: [] for m in modes}
    for i, n_max in enumerate(n_grid):
        for m in modes:
            samples = sum(res[i][m][0] for res in results)
            succ = sum(res[i][m][1] for res in results)
            sum_t = sum(res[i][m][2] for res in results)
            if samples == 0:
                raise SampleSizeError("sweep produced no samples")
            ps = succ / samples
            lo, hi = wilson_interval(succ, samples)
            mean_t = sum_t / samples
            if m is Mode.FIXED_RATE:
                rate = config.k_bits / n_max * ps
            else:
                rate = config.k_bits * ps / mean_t
            sweeps[m].append(SweepPoint(n_max=n_max, n_samples=samples,
                                        n_success=succ, ps_hat=ps,
                                        ps_lo=float(lo), ps_hi=float(hi),
                                        mean_t=mean_t, rate=rate))
    return sweeps


def run_fixed_rate_sweep(config, n_grid, workers: int = 1) -> list[SweepPoint]:
    """FIXED_RATE success probability and rate over an N grid."""
    return _run_sweeps(config, n_grid, (Mode.FIXED_RATE,), workers)[Mode.FIXED_RATE]


def run_rateless_sweep(config, n_grid, workers: int = 1) -> list[SweepPoint]:
    """RATELESS_ACK success probability, mean T, and rate over an N grid."""
    return _run_sweeps(config, n_grid, (Mode.RATELESS_ACK,), workers)[Mode.RATELESS_ACK]


def run_paired_sweeps(config, n_grid, workers: int = 1):
    """Both schemes on identical (realization, fading) draws per N.

    The pathwise coupling (fixed-rate success implies rateless success)
    is asserted inside every paired trial.
    Returns (fixed_points, rateless_points).
    """
    sweeps = _run_sweeps(config, n_grid, (Mode.FIXED_RATE, Mode.RATELESS_ACK),
                         workers)
    return sweeps[Mode.FIXED_RATE], sweeps[Mode.RATELESS_ACK]


@dataclass(frozen=True, eq=False)
class ContinuousModeResult:
    curve: CcdfCurve
    mean_t: float
    gbar_r_hat: float
    n_samples: int


def run_continuous_mode(config, workers: int = 1) -> ContinuousModeResult:
    """CONTINUOUS-mode trials: empirical CCDF plus the rate-gain estimate
    N/mean(T) (success-probability gain is 1 in this mode)."""
    pooled = run_pooled(config, mode=Mode.CONTINUOUS, workers=workers)
    if pooled.t_slots.size < 100:
        raise SampleSizeError(
            f"only {pooled.t_slots.size} pooled samples (< 100)")
    curve = empirical_ccdf(pooled.t_slots, int(config.n_max),
                           label=Mode.CONTINUOUS.value)
    mean_t = float(pooled.t_slots.mean())
    return ContinuousModeResult(curve=curve, mean_t=mean_t,
                                gbar_r_hat=float(config.n_max) / mean_t,
                                n_samples=int(pooled.t_slots.size))
