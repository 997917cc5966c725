"""Coverage and throughput of rateless-coded transmission in a Poisson
cellular downlink: closed-form analytics plus a slot-level Monte Carlo
engine on a torus window, cross-validated against each other."""

from .analytics import (AnalyticCurve, CodingParams, GainReport, analytic_curve,
                        ccdf_continuous, ccdf_tni, ccdf_thinning_exact_H,
                        ccdf_ub_theorem1, ccdf_ub_thinning, default_t_grid,
                        expected_T_ub, fneg_half_closed, fpos_half_closed,
                        gains_report, gbar_r, gbar_r_arctan_form,
                        mean_interferer_time_mu, mu_arctan_form, ps_fixed,
                        ps_rateless_lb, rate_fixed, theta_t)
from .config import (SimConfig, emit_config, load_config, parse_config,
                     with_overrides)
from .curves import CcdfCurve, empirical_ccdf, wilson_interval
from .errors import (ConfigError, ConvergenceError, DomainError,
                     GridMismatchError, RejectionBudgetError, SampleSizeError)
from .geometry import (NetworkRealization, Window, build_pathloss,
                       dump_realization_csv, make_realization, place_users,
                       sample_ppp, torus_distance)
from .metrics import (CurveDiff, GammaFit, PairedTrials, PerUserRecord,
                      curve_diff, d_gain_rank_correlation, fit_gamma,
                      paired_gain_bootstrap_sd, per_user_report,
                      records_from_trials, run_paired_trials)
from .netsim import (ContinuousModeResult, FadingDraw, LinkOutcome, Mode,
                     PooledOutcomes, SweepPoint, draw_fading,
                     estimate_typical_ccdf, run_continuous_mode,
                     run_fixed_rate_sweep, run_paired_sweeps, run_pooled,
                     run_rateless_sweep, run_trial, simulate_packet_times)
from .specfun import (DEFAULT_QUADRATURE, Delta, QuadratureSpec, adaptive_quad,
                      hyp2f1_neg_delta, hyp2f1_pos_delta, hyp2f1_series_oracle)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
