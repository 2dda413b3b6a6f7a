"""Command-line front end.

Usage:
    hetcorr simulate --config run.json [--seed N] [--out DIR] [--segments N] [--emit-plots]
    hetcorr analytic --config run.json
    hetcorr sweep    --config run.json
    hetcorr optimize --config run.json
    hetcorr validate --config validate.json

Exit codes: 0 success, 1 runtime or numerical failure (including a failed
validation), 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytic
from .chain import linearize_chain, sample_trajectories
from .config import MODES, ConfigError, RunConfig, load_config
from .io import ANALYTIC_HEADER, SWEEP_HEADER, write_csv, write_json, write_spectrum, write_trajectories
from .optimize import InfeasibleBudgetError, feasible, optimal_r, optimal_r_profile, simulate_total_noise, sweep_r, total_noise
from .spectral import band_average, estimate_csd, estimate_psd

log = logging.getLogger("hetcorr")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "seed": int(cfg.acq.seed), "config": cfg.resolved()}


def _analytic_cfg(cfg: RunConfig) -> analytic.AnalyticConfig:
    b = cfg.budget
    return analytic.AnalyticConfig(
        sq=cfg.chain.sq,
        lo=cfg.chain.lo,
        beta_s=cfg.beta_s if cfg.beta_s is not None else cfg.chain.signal_amp,
        bandwidth=b.bandwidth if b is not None else 1.0,
        n_cl=b.n_cl if b is not None and b.table is None else 0.0,
        gains=cfg.gains,
    )


def run_simulate(cfg: RunConfig) -> dict:
    out = cfg.out_dir
    p = cfg.chain
    tr = sample_trajectories(p, cfg.acq, include_beat=cfg.include_beat, workers=cfg.workers)
    fs = cfg.acq.sample_rate
    csd = estimate_csd(tr.j_a_minus, tr.j_b_minus, fs, cfg.estimator)
    arm_a = estimate_psd(tr.j_a_minus, fs, cfg.estimator)
    arm_b = estimate_psd(tr.j_b_minus, fs, cfg.estimator)
    conv = estimate_psd(tr.conventional, fs, cfg.estimator)
    stats = linearize_chain(p)
    avg = band_average(csd, *cfg.band)
    a_avg = band_average(arm_a, *cfg.band)
    b_avg = band_average(arm_b, *cfg.band)
    c_avg = band_average(conv, *cfg.band)

    files = {"spectrum": write_spectrum(csd, out / "spectrum.csv", _meta(cfg))}
    if cfg.write_trajectories:
        files["trajectories"] = write_trajectories(tr, out / "trajectories.csv", _meta(cfg))
    summary = {
        **_meta(cfg),
        "mode": "simulate",
        "csd_mean_snu": avg.mean.real,
        "csd_imag_mean_snu": avg.mean.imag,
        "sigma": avg.sigma,
        "predicted_snu": stats.csd_pred,
        "n_sigma": (avg.mean.real - stats.csd_pred) / avg.sigma if avg.sigma > 0 else None,
        "arm_a_psd_snu": a_avg.mean.real,
        "arm_b_psd_snu": b_avg.mean.real,
        "arm_psd_pred_snu": stats.arm_psd_pred,
        "conventional_psd_snu": c_avg.mean.real,
        "conventional_psd_pred_snu": stats.signal_var,
        "n_segments": csd.n_segments,
        "n_bins": avg.n_bins,
    }
    if cfg.gains is not None:
        summary["csd_mean_physical"] = avg.mean.real * cfg.snu
        summary["predicted_physical"] = stats.csd_pred * cfg.snu
    files["summary"] = write_json(out / "summary.json", summary)
    if cfg.emit_plots:
        from .plotting import plot_spectrum

        files["plot"] = plot_spectrum(csd, out / "csd.svg", predicted=stats.csd_pred, arm_psd=arm_a)
    log.info("CSD %.5f +/- %.5f SNU (predicted %.5f)", avg.mean.real, avg.sigma, stats.csd_pred)
    return {"files": files, "summary": summary}


def run_analytic(cfg: RunConfig) -> dict:
    acfg = _analytic_cfg(cfg)
    rows = analytic.evaluate_all(acfg, cfg.omega)
    if cfg.direct is not None:
        d = cfg.direct
        rows.append(("direct_csd", analytic.direct_csd(d.s_f, d.gamma, d.r_bs, d.t_bs)))
        rows.append(("direct_csd_expanded", analytic.direct_csd_expanded(d.s_f, d.gamma, d.r_bs, d.t_bs)))
    if cfg.budget is not None and cfg.budget.table is None:
        ok = feasible(cfg.budget)
        rows.append(("budget_feasible", 1.0 if ok else 0.0))
        if ok:
            rows.append(("r_star", optimal_r(cfg.budget)))
    files = {"analytic": write_csv(cfg.out_dir / "analytic.csv", ANALYTIC_HEADER, rows, _meta(cfg))}
    if cfg.emit_plots:
        from .plotting import plot_full_band

        frac = np.linspace(0.0, 0.99, 199)
        vals = analytic.csd_full_band(acfg, frac * acfg.lo.angular_frequency)
        files["plot"] = plot_full_band(frac, vals, analytic.csd_narrowband(acfg), cfg.out_dir / "full_band.svg")
    return {"files": files, "rows": rows}


def run_sweep(cfg: RunConfig) -> dict:
    budget = cfg.budget
    grid = cfg.sweep.grid()
    theta = cfg.sweep.theta_l
    files = {}
    table = sweep_r(budget, grid, theta)
    summary = {**_meta(cfg), "mode": "sweep", "theta_l": theta}
    if table.freqs is None:
        files["sweep"] = write_csv(cfg.out_dir / "sweep.csv", SWEEP_HEADER, zip(table.r, table.total), _meta(cfg))
        summary["argmin_r"] = float(table.r_best)
        summary["min_abs_total_noise_snu_hz"] = float(table.abs_total[table.argmin])
    else:
        rows = ((f, r, v) for f, row in zip(table.freqs, table.total) for r, v in zip(table.r, row))
        files["sweep"] = write_csv(cfg.out_dir / "sweep.csv", ("freq_hz", *SWEEP_HEADER), rows, _meta(cfg))
        summary["argmin_r"] = {repr(float(f)): float(r) for f, r in zip(table.freqs, table.r_best)}
    r_star = None
    if budget.table is None and feasible(budget):
        r_star = optimal_r(budget)
    summary["r_star"] = r_star

    mc_sigma = None
    if cfg.sweep.monte_carlo:
        mc, mc_sigma = simulate_total_noise(budget, grid, cfg.acq, cfg.estimator, theta, cfg.chain.lo, cfg.band)
        files["sweep_mc"] = write_csv(
            cfg.out_dir / "sweep_mc.csv", (*SWEEP_HEADER, "sigma_snu_hz"), zip(mc.r, mc.total, mc_sigma), _meta(cfg)
        )
        summary["mc_argmin_r"] = float(mc.r_best)
    files["summary"] = write_json(cfg.out_dir / "sweep.json", summary)
    if cfg.emit_plots and table.freqs is None:
        from .plotting import plot_sweep

        if cfg.sweep.monte_carlo:
            files["plot"] = plot_sweep(mc.r, mc.total, cfg.out_dir / "sweep.svg", r_star, mc_sigma, table.total)
        else:
            files["plot"] = plot_sweep(table.r, table.total, cfg.out_dir / "sweep.svg", r_star)
    return {"files": files, "summary": summary}


def run_optimize(cfg: RunConfig) -> dict:
    budget = cfg.budget
    files = {}
    summary = {**_meta(cfg), "mode": "optimize", "limit_snu_hz": budget.limit}
    if budget.table is None:
        try:
            r_star = optimal_r(budget)
        except InfeasibleBudgetError as exc:
            log.warning("%s", exc)
            summary.update(feasible=False, r_star=None, residual=None, reason=str(exc))
        else:
            summary.update(feasible=True, r_star=r_star, residual=total_noise(budget, r_star))
        hi = max(1.0, 2.0 * summary["r_star"]) if summary["r_star"] else 1.0
        grid = np.linspace(0.0, hi, 101)
        files["total_noise"] = write_csv(
            cfg.out_dir / "total_noise.csv", SWEEP_HEADER, zip(grid, total_noise(budget, grid)), _meta(cfg)
        )
    else:
        prof = optimal_r_profile(budget, budget.table[0])
        rows = zip(prof.freqs, prof.n_cl, prof.feasible, prof.r_star)
        files["profile"] = write_csv(
            cfg.out_dir / "optimize.csv", ("freq_hz", "n_cl_snu_hz", "feasible", "r_star"), rows, _meta(cfg)
        )
        summary.update(feasible=bool(prof.feasible.all()), n_feasible=int(prof.feasible.sum()), n_freqs=int(prof.freqs.size))
        if cfg.emit_plots:
            from .plotting import plot_profile

            files["plot"] = plot_profile(prof.freqs, prof.r_star, cfg.out_dir / "optimize.svg")
    files["summary"] = write_json(cfg.out_dir / "optimize.json", summary)
    return {"files": files, "summary": summary}


def run_validate(cfg: RunConfig) -> dict:
    from .validate import run_checks

    checks = run_checks(cfg, log=log.info)
    for c in checks:
        print(c.line())
    passed = all(c.passed for c in checks)
    report = {**_meta(cfg), "mode": "validate", "passed": passed, "checks": [c.as_dict() for c in checks]}
    path = write_json(cfg.out_dir / "validation.json", report)
    print(f"overall: {'PASS' if passed else 'FAIL'} ({sum(c.passed for c in checks)}/{len(checks)})")
    return {"files": {"report": path}, "summary": report}


RUNNERS = {
    "simulate": run_simulate,
    "analytic": run_analytic,
    "sweep": run_sweep,
    "optimize": run_optimize,
    "validate": run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override acquisition seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--segments", type=int, default=None, help="number of independently seeded generation segments")
    parser.add_argument("--emit-plots", action="store_true", default=None, help="write SVG figures")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.mode, seed=args.seed, out=args.out,
                          segments=args.segments, emit_plots=args.emit_plots)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = RUNNERS[cfg.mode](cfg)
    except (ValueError, FloatingPointError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if cfg.mode == "validate" and not result["summary"]["passed"]:
        return EXIT_RUNTIME
    if not all(math.isfinite(v) for v in _floats(result.get("summary", {}))):
        print("error: non-finite value in results", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _floats(summary: dict):
    for k, v in summary.items():
        if isinstance(v, float):
            yield v


if __name__ == "__main__":
    sys.exit(main())
