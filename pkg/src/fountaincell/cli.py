"""Command-line front end: analyze | simulate | compare | peruser.

Each subcommand is a pure function of (config, master_seed) to CSV bytes;
float formatting is fixed at 9 significant digits and every file begins
with the full config as commented key = value lines, so any artifact can
be reproduced from its own header.

Exit codes: 0 success, 2 config/domain error, 3 numeric-convergence
error, 4 sample-size refusal.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analytics import (CURVE_KINDS, analytic_curve, default_t_grid,
                        gains_report, mean_interferer_time_mu, mu_arctan_form)
from .config import SimConfig, emit_config, load_config, with_overrides
from .errors import (ConfigError, ConvergenceError, DomainError,
                     GridMismatchError, RejectionBudgetError, SampleSizeError)
from .geometry import Window, make_realization
from .metrics import (d_gain_rank_correlation, paired_gain_bootstrap_sd,
                      records_from_trials, run_paired_trials)
from .netsim import Mode, estimate_typical_ccdf, run_paired_sweeps, run_pooled

__all__ = ["main", "build_parser", "cmd_analyze", "cmd_simulate",
           "cmd_compare", "cmd_peruser"]

_COMPARE_GRID_DEFAULT = tuple(range(10, 121, 10))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.9g" % float(v)
    return str(v)


def _write_csv(path: str, config: SimConfig, columns, rows) -> str:
    lines = [f"# {ln}" for ln in emit_config(config).splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def cmd_analyze(config: SimConfig) -> list[str]:
    """Evaluate every analytic curve plus the gain report for the config.

    With alpha = 4 each row also carries the arctan-path value, an
    independent numerical route that must agree to 1e-8.
    """
    params = config.coding()
    dual = config.alpha == 4.0
    n_grid = np.asarray(config.n_grid if config.n_grid else _COMPARE_GRID_DEFAULT,
                        dtype=float)
    mu = mean_interferer_time_mu(params)
    rows = []
    for kind in CURVE_KINDS:
        grid = default_t_grid(config.n_max) if kind.startswith("ccdf") else n_grid
        curve = analytic_curve(params, kind, grid=grid, mu=mu,
                               crofton_c=config.crofton_c)
        alt = None
        if dual:
            mu_alt = mu_arctan_form(params)
            alt = analytic_curve(params, kind, grid=grid, mu=mu_alt,
                                 crofton_c=config.crofton_c, closed_form=True)
        for i, t in enumerate(curve.t_grid):
            rows.append((kind, t, curve.values[i],
                         alt.values[i] if alt is not None else ""))
    out = os.path.join(config.output_dir, "curves.csv")
    curves_path = _write_csv(out, config,
                             ("kind", "t", "value", "value_arctan"), rows)

    report = gains_report(params, crofton_c=config.crofton_c)
    gains_path = _write_csv(
        os.path.join(config.output_dir, "gains.csv"), config,
        ("k_bits", "alpha", "n_max", "crofton_c", "mu", "sir_gain_gamma",
         "gs_lower_bound", "gr", "gbar_r"),
        [(config.k_bits, config.alpha, config.n_max, config.crofton_c,
          report.mu, report.sir_gain_gamma, report.gs_lower_bound,
          report.gr, report.gbar_r)])
    return [curves_path, gains_path]


def cmd_simulate(config: SimConfig, workers: int = 1) -> list[str]:
    """Run the configured mode; write pooled outcomes and the empirical CCDF."""
    pooled = run_pooled(config, workers=workers)
    rows = [(pooled.trial_id[i], pooled.pair_id[i], pooled.d[i],
             pooled.t_slots[i], pooled.success[i], pooled.mode.value)
            for i in range(pooled.t_slots.size)]
    outcomes_path = _write_csv(
        os.path.join(config.output_dir, "outcomes.csv"), config,
        ("trial_id", "pair_id", "D", "T_slots", "success", "mode"), rows)

    curve = estimate_typical_ccdf(config, workers=workers)
    ccdf_rows = [(curve.t_grid[i], curve.values[i], curve.lo[i], curve.hi[i],
                  curve.n_samples)
                 for i in range(curve.t_grid.size)]
    ccdf_path = _write_csv(
        os.path.join(config.output_dir, "ccdf.csv"), config,
        ("t", "value", "lo", "hi", "n_samples"), ccdf_rows)
    return [outcomes_path, ccdf_path]


def _argmax_n(points) -> int:
    best = max(points, key=lambda p: p.rate)
    return best.n_max


def cmd_compare(config: SimConfig, workers: int = 1) -> list[str]:
    """Paired sweeps vs. analytics over the N grid: success probabilities,
    rates, and the optimal delay constraints N_f and N_r."""
    n_grid = config.n_grid if config.n_grid else _COMPARE_GRID_DEFAULT
    fixed, rateless = run_paired_sweeps(config, n_grid, workers=workers)

    grid = np.asarray(n_grid, dtype=float)
    params = config.coding()
    an_ps_f = analytic_curve(params, "ps_fixed", grid=grid,
                             crofton_c=config.crofton_c)
    an_ps_r = analytic_curve(params, "ps_rateless_lb", grid=grid,
                             crofton_c=config.crofton_c)
    an_rate_f = analytic_curve(params, "rate_fixed", grid=grid,
                               crofton_c=config.crofton_c)
    an_rate_r = analytic_curve(params, "rate_rateless", grid=grid,
                               crofton_c=config.crofton_c)

    rows = []
    for i, n in enumerate(n_grid):
        f, r = fixed[i], rateless[i]
        if r.ps_hat < f.ps_hat:
            raise AssertionError(
                f"rateless success probability fell below fixed at N={n}")
        rows.append((n, f.n_samples,
                     f.ps_hat, f.ps_lo, f.ps_hi, f.rate,
                     r.ps_hat, r.ps_lo, r.ps_hi, r.mean_t, r.rate,
                     an_ps_f.values[i], an_ps_r.values[i],
                     an_rate_f.values[i], an_rate_r.values[i]))
    compare_path = _write_csv(
        os.path.join(config.output_dir, "compare.csv"), config,
        ("n_max", "n_samples",
         "ps_fixed_sim", "ps_fixed_lo", "ps_fixed_hi", "rate_fixed_sim",
         "ps_rateless_sim", "ps_rateless_lo", "ps_rateless_hi",
         "mean_t_rateless_sim", "rate_rateless_sim",
         "ps_fixed_analytic", "ps_rateless_lb_analytic",
         "rate_fixed_analytic", "rate_rateless_analytic"), rows)

    n_f_sim = _argmax_n(fixed)
    n_r_sim = _argmax_n(rateless)
    if n_r_sim < n_f_sim:
        raise AssertionError(f"N_r={n_r_sim} < N_f={n_f_sim}")
    an_n_f = int(grid[int(np.argmax(an_rate_f.values))])
    an_n_r = int(grid[int(np.argmax(an_rate_r.values))])
    summary_path = _write_csv(
        os.path.join(config.output_dir, "compare_summary.csv"), config,
        ("n_f_sim", "n_r_sim", "n_f_analytic", "n_r_analytic",
         "max_rate_fixed_sim", "max_rate_rateless_sim",
         "max_rate_fixed_analytic", "max_rate_rateless_analytic"),
        [(n_f_sim, n_r_sim, an_n_f, an_n_r,
          max(p.rate for p in fixed), max(p.rate for p in rateless),
          float(an_rate_f.values.max()), float(an_rate_r.values.max()))])
    return [compare_path, summary_path]


def cmd_peruser(config: SimConfig, workers: int = 1) -> list[str]:
    """One seeded realization, paired fading trials, per-user gain table."""
    del workers  # sequential: one realization, common-random-number pairing
    geo_ss, fad_ss, boot_ss = np.random.SeedSequence(config.master_seed).spawn(3)
    net = make_realization(config.intensity, config.window, config.alpha,
                           np.random.default_rng(geo_ss))
    trials = run_paired_trials(net, config.coding(), config.fading_trials,
                               np.random.default_rng(fad_ss))
    records = records_from_trials(trials)
    sd = paired_gain_bootstrap_sd(trials, np.random.default_rng(boot_ss))
    rho = d_gain_rank_correlation(records)
    rows = [(r.pair_id, r.d, r.ps_rateless, r.ps_fixed, r.mean_t,
             r.rate_rateless, r.rate_fixed,
             "inf" if np.isinf(r.gain_gr) else r.gain_gr,
             "inf" if np.isinf(sd[r.pair_id]) else sd[r.pair_id],
             r.censored)
            for r in records]
    path = _write_csv(
        os.path.join(config.output_dir, "peruser.csv"), config,
        ("pair_id", "D", "ps_rateless", "ps_fixed", "mean_T",
         "rate_rateless", "rate_fixed", "gain_GR", "gain_GR_bootstrap_sd",
         "censored_flag"), rows)
    summary_path = _write_csv(
        os.path.join(config.output_dir, "peruser_summary.csv"), config,
        ("n_users", "n_censored", "d_gain_spearman_rho"),
        [(len(records), sum(r.censored for r in records), rho)])
    return [path, summary_path]


def _parse_n_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"could not parse n_grid list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fountaincell",
        description="Coverage and throughput of rateless vs. fixed-rate "
                    "coding in a Poisson cellular downlink.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("analyze", "evaluate analytic curves and gains"),
                       ("simulate", "Monte Carlo trials for one mode"),
                       ("compare", "paired sweeps vs. analytics over N"),
                       ("peruser", "per-user gains on one realization")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", help="path to a config file")
        p.add_argument("--intensity", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--k-bits", dest="k_bits", type=float)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--window-side", dest="window_side", type=float)
        p.add_argument("--crofton-c", dest="crofton_c", type=float)
        p.add_argument("--mode", choices=[m.value for m in Mode])
        p.add_argument("--realizations", type=int)
        p.add_argument("--fading-trials", dest="fading_trials", type=int)
        p.add_argument("--seed", dest="master_seed", type=int)
        p.add_argument("--n-grid", dest="n_grid", type=_parse_n_grid,
                       help="comma-separated N values, e.g. 10,20,40")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes (results are identical for any "
                            "value)")
    return parser


def _config_from_args(args: argparse.Namespace) -> SimConfig:
    config = load_config(args.config) if args.config else SimConfig()
    overrides = {k: getattr(args, k) for k in
                 ("intensity", "alpha", "k_bits", "n_max", "window_side",
                  "crofton_c", "realizations", "fading_trials", "master_seed",
                  "n_grid", "output_dir")}
    if args.mode is not None:
        overrides["mode"] = Mode(args.mode)
    return with_overrides(config, **overrides)


_COMMANDS = {"analyze": lambda cfg, w: cmd_analyze(cfg),
             "simulate": cmd_simulate,
             "compare": cmd_compare,
             "peruser": cmd_peruser}


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (ConfigError, DomainError, GridMismatchError)):
        return 2
    if isinstance(exc, (ConvergenceError, RejectionBudgetError)):
        return 3
    if isinstance(exc, SampleSizeError):
        return 4
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        paths = _COMMANDS[args.command](config, args.workers)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code = exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
