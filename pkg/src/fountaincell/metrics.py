"""Per-user comparisons, distribution fits, and curve agreement checks.

The per-user pipeline freezes one network realization and replays the
same fading draws through both schemes (common random numbers), so every
gain estimate is a paired comparison: fixed-rate success implies rateless
success pathwise and G_S >= 1 holds sample-by-sample, not just in the
mean.  Users whose fixed-rate scheme never succeeded get gain = +inf and
a censored flag; they are excluded from averages and correlations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammainc

from .analytics import AnalyticCurve
from .curves import CcdfCurve
from .errors import DomainError, GridMismatchError, SampleSizeError
from .geometry import NetworkRealization
from .netsim import Mode, draw_fading, simulate_packet_times

__all__ = [
    "PerUserRecord",
    "PairedTrials",
    "GammaFit",
    "CurveDiff",
    "run_paired_trials",
    "per_user_report",
    "records_from_trials",
    "paired_gain_bootstrap_sd",
    "fit_gamma",
    "curve_diff",
    "d_gain_rank_correlation",
]

_MIN_FADING_TRIALS = 500
_MIN_FIT_SAMPLES = 100


@dataclass(frozen=True)
class PerUserRecord:
    """One user's paired Monte Carlo summary on a fixed realization."""

    pair_id: int
    d: float
    ps_rateless: float
    ps_fixed: float
    mean_t: float
    rate_rateless: float
    rate_fixed: float
    gain_gr: float
    censored: bool


@dataclass(frozen=True, eq=False)
class PairedTrials:
    """Raw paired outcomes, (n_trials, n_pairs) arrays, for resampling."""

    t_rateless: np.ndarray
    success_rateless: np.ndarray
    success_fixed: np.ndarray
    d: np.ndarray
    k_bits: float
    n_max: int


@dataclass(frozen=True)
class GammaFit:
    shape: float
    scale: float
    ks_distance: float
    n_samples: int

    def __post_init__(self) -> None:
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("gamma fit requires positive shape and scale")
        if not 0.0 <= self.ks_distance <= 1.0:
            raise DomainError("KS distance must lie in [0, 1]")


def run_paired_trials(net: NetworkRealization, params, fading_trials: int,
                      rng: np.random.Generator) -> PairedTrials:
    """Replay fading_trials common draws through both schemes."""
    if fading_trials < _MIN_FADING_TRIALS:
        raise SampleSizeError(
            f"need at least {_MIN_FADING_TRIALS} fading trials for per-user "
            f"estimates, got {fading_trials}")
    n = net.n_pairs
    t_r = np.empty((fading_trials, n), dtype=np.int64)
    s_r = np.empty((fading_trials, n), dtype=bool)
    s_f = np.empty((fading_trials, n), dtype=bool)
    for j in range(fading_trials):
        fading = draw_fading(n, rng)
        t_r[j], s_r[j], _ = simulate_packet_times(net, fading, params,
                                                  Mode.RATELESS_ACK)
        _, s_f[j], _ = simulate_packet_times(net, fading, params,
                                             Mode.FIXED_RATE)
        if np.any(s_f[j] & ~s_r[j]):
            raise AssertionError("fixed-rate success without rateless success "
                                 "on a common fading draw (coupling violated)")
    return PairedTrials(t_rateless=t_r, success_rateless=s_r, success_fixed=s_f,
                        d=net.link_distance.copy(), k_bits=params.k_bits,
                        n_max=int(params.n_max))


def records_from_trials(trials: PairedTrials) -> list[PerUserRecord]:
    ps_r = trials.success_rateless.mean(axis=0)
    ps_f = trials.success_fixed.mean(axis=0)
    mean_t = trials.t_rateless.mean(axis=0)  # includes truncated failures at N
    rate_r = trials.k_bits * ps_r / mean_t
    rate_f = trials.k_bits / trials.n_max * ps_f
    records = []
    for i in range(trials.d.size):
        censored = trials.success_fixed[:, i].sum() == 0
        gain = np.inf if censored else float(rate_r[i] / rate_f[i])
        records.append(PerUserRecord(
            pair_id=i, d=float(trials.d[i]), ps_rateless=float(ps_r[i]),
            ps_fixed=float(ps_f[i]), mean_t=float(mean_t[i]),
            rate_rateless=float(rate_r[i]), rate_fixed=float(rate_f[i]),
            gain_gr=gain, censored=bool(censored)))
    return records


def per_user_report(net: NetworkRealization, params, fading_trials: int,
                    rng: np.random.Generator) -> list[PerUserRecord]:
    """Paired per-user gains on one realization; see module docstring."""
    return records_from_trials(run_paired_trials(net, params, fading_trials, rng))


def paired_gain_bootstrap_sd(trials: PairedTrials, rng: np.random.Generator,
                             n_boot: int = 200) -> np.ndarray:
    """Bootstrap SD of each user's gain_GR, resampling whole paired trials.

    The same resampled trial indices are used for numerator and denominator
    (and for every user), preserving the pairing.  Resamples with zero
    fixed-rate successes give an infinite gain and are dropped; a user with
    fewer than half the resamples finite gets SD = +inf.
    """
    n_trials, n_users = trials.t_rateless.shape
    gains = np.empty((n_boot, n_users))
    for b in range(n_boot):
        idx = rng.integers(0, n_trials, size=n_trials)
        ps_r = trials.success_rateless[idx].mean(axis=0)
        ps_f = trials.success_fixed[idx].mean(axis=0)
        mean_t = trials.t_rateless[idx].mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            gains[b] = np.where(ps_f > 0,
                                (trials.k_bits * ps_r / mean_t)
                                / (trials.k_bits / trials.n_max * ps_f),
                                np.inf)
    sd = np.empty(n_users)
    for i in range(n_users):
        g = gains[:, i]
        finite = g[np.isfinite(g)]
        sd[i] = finite.std(ddof=1) if finite.size >= n_boot // 2 else np.inf
    return sd


def fit_gamma(t_samples: np.ndarray, n_max: float | None = None) -> GammaFit:
    """Method-of-moments gamma fit plus the two-sided KS distance.

    Passing n_max drops samples truncated at the horizon first; the fit is
    only meaningful on uncensored packet times.  MoM is deliberate: with
    shape ~ 1-3 it is accurate enough and has no optimizer failure modes.
    """
    x = np.asarray(t_samples, dtype=float).ravel()
    if n_max is not None:
        x = x[x < n_max]
    if x.size < _MIN_FIT_SAMPLES:
        raise SampleSizeError(
            f"need at least {_MIN_FIT_SAMPLES} uncensored samples, got {x.size}")
    if not np.all(x > 0):
        raise DomainError("gamma samples must be positive")
    mean = x.mean()
    var = x.var(ddof=1)
    if var <= 0:
        raise DomainError("zero-variance sample admits no gamma fit")
    shape = mean * mean / var
    scale = var / mean
    xs = np.sort(x)
    cdf = gammainc(shape, xs / scale)
    i = np.arange(1, xs.size + 1)
    ks = float(np.max(np.maximum(cdf - (i - 1) / xs.size, i / xs.size - cdf)))
    return GammaFit(shape=float(shape), scale=float(scale), ks_distance=ks,
                    n_samples=int(xs.size))


@dataclass(frozen=True)
class CurveDiff:
    """Agreement summary between an empirical curve and an analytic one."""

    n_points: int
    max_abs_diff: float
    mean_abs_diff: float
    frac_inside_ci: float
    frac_bound_respected: float


def curve_diff(sim: CcdfCurve, analytic: AnalyticCurve,
               ci_slack_halfwidths: float = 2.0) -> CurveDiff:
    """Pointwise comparison on a shared grid.

    frac_inside_ci treats the analytic curve as exact (is it inside the
    simulated CI?); frac_bound_respected treats it as an upper bound
    (sim <= bound + slack * CI half-width).  The caller picks which one
    its curve kind promises.
    """
    if sim.t_grid.shape != analytic.t_grid.shape or \
            not np.allclose(sim.t_grid, analytic.t_grid, rtol=0.0, atol=1e-12):
        raise GridMismatchError("simulated and analytic grids differ")
    a = analytic.values
    diff = np.abs(sim.values - a)
    half = (sim.hi - sim.lo) / 2.0
    inside = (a >= sim.lo - 1e-12) & (a <= sim.hi + 1e-12)
    respected = sim.values <= a + ci_slack_halfwidths * half + 1e-12
    return CurveDiff(n_points=int(a.size),
                     max_abs_diff=float(diff.max()),
                     mean_abs_diff=float(diff.mean()),
                     frac_inside_ci=float(inside.mean()),
                     frac_bound_respected=float(respected.mean()))


def d_gain_rank_correlation(records: list[PerUserRecord]) -> float:
    """Spearman rank correlation of (link distance, gain), censored excluded."""
    pts = [(r.d, r.gain_gr) for r in records if not r.censored]
    if len(pts) < 3:
        raise SampleSizeError(
            f"need at least 3 non-censored users, got {len(pts)}")
    d, g = zip(*pts)
    rho = stats.spearmanr(d, g).statistic
    return float(rho)
