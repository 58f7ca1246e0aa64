"""Command-line front end: experiments in, deterministic CSV artifacts out.

Commands
--------
simulate   paired Monte Carlo sweep -> sweep.csv + trials.csv
heatmap    one cost surface -> heatmap_<method>.csv (x_m, y_m, q_norm)
crlb       bound vs SNR + (phi, beta) sensitivity -> crlb.csv,
           sensitivity_phi.csv, sensitivity_beta.csv
mismatch   sweep with a 4-element array truth pattern (model mismatch)
           -> simulate outputs + beampattern_surface.csv at the true position

All outputs are comma-separated with '.' decimals and LF line endings, and
identical invocations produce byte-identical files. Every file starts with
a comment line carrying the tool version, config digest, and seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .crlb import average_sigma_p, sensitivity_sweep
from .estimators import alternating_maximization, baseline_aoa_tdoa, baseline_mvdr_omni, grid_search_beampattern
from .metrics import METHODS, run_monte_carlo, trial_seed
from .scenario import ConfigError, RunConfig, config_digest, load_config
from .signals import synthesize_observation

__all__ = ["main", "build_parser"]


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    return format(v, ".10g")


def _write_csv(path: Path, header_meta: str, columns, rows):
    lines = [header_meta, ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _meta(cfg: RunConfig, seed) -> str:
    return f"# beamloc {__version__} config={config_digest(cfg)} seed={seed}"


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "grid_res_m", None) is not None:
        cfg = cfg.with_grid_resolution(args.grid_res_m)
    if getattr(args, "trials", None) is not None:
        cfg = replace(cfg, mc=replace(cfg.mc, trials=args.trials))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, mc=replace(cfg.mc, base_seed=args.seed))
    if getattr(args, "snr", None) is not None:
        cfg = replace(cfg, mc=replace(cfg.mc, snr_db=tuple(args.snr)))
    return cfg


def _snr_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"invalid --snr list {text!r}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_sweep_outputs(cfg: RunConfig, sweep, out: Path, noise_free: bool):
    meta = _meta(cfg, cfg.mc.base_seed)
    _write_csv(
        out / "sweep.csv",
        meta,
        ["method", "snr_db", "trimmed_mean_error_m", "mean_uncertainty_m2", "mean_iterations", "n_trials"],
        [
            [a.method, a.snr_db, a.trimmed_mean_error_m, a.mean_uncertainty_m2, a.mean_iterations, a.n_trials]
            for a in sweep.aggregates
        ],
    )
    rows = []
    for r in sweep.records:
        phi_deg = np.rad2deg(r.psi_hat.phi) if r.psi_hat is not None else float("nan")
        beta_deg = np.rad2deg(r.psi_hat.beta) if r.psi_hat is not None else float("nan")
        x = r.p_hat[0] if r.p_hat is not None else float("nan")
        y = r.p_hat[1] if r.p_hat is not None else float("nan")
        rows.append(
            [r.method, r.snr_db, r.trial, x, y, phi_deg, beta_deg, r.distance_error,
             r.iterations, r.converged, r.uncertainty_m2, r.half_power_regions]
        )
    _write_csv(
        out / "trials.csv",
        meta,
        ["method", "snr_db", "trial", "x_m", "y_m", "phi_deg", "beta_deg", "error_m",
         "iterations", "converged", "uncertainty_m2", "half_power_regions"],
        rows,
    )


def cmd_simulate(args) -> int:
    cfg = _load(args)
    sweep = run_monte_carlo(cfg, noise_free=args.noise_free)
    _write_sweep_outputs(cfg, sweep, _out_dir(args), args.noise_free)
    return 0


def cmd_heatmap(args) -> int:
    cfg = _load(args)
    snr_db = args.snr[0] if args.snr else cfg.mc.snr_db[0]
    seed = trial_seed(cfg.mc.base_seed, 0, snr_db)
    obs = synthesize_observation(cfg.scenario, snr_db, seed, noise_sigma=0.0 if args.noise_free else None)
    est = cfg.estimator
    if args.method == "proposed":
        result = alternating_maximization(
            obs,
            position_grid=cfg.position_grid,
            beampattern_grid=cfg.beampattern_grid,
            epsilon=est.epsilon_m,
            max_iters=est.max_iterations,
            cost_kind=est.cost_kind,
            loading_scale=est.loading_scale,
            loading_delta=est.loading_delta,
            init_headings=est.init_headings,
        )
        surface = result.position_surface
    elif args.method == "mvdr":
        surface = baseline_mvdr_omni(obs, cfg.position_grid, est.loading_scale, est.loading_delta)
    else:
        surface = baseline_aoa_tdoa(obs, cfg.position_grid)
    norm = surface.normalized()
    grid = cfg.position_grid
    xv, yv = grid.x_values(), grid.y_values()
    rows = [
        [xv[ix], yv[iy], norm[iy, ix]]
        for iy in range(grid.ny)
        for ix in range(grid.nx)
    ]
    out = _out_dir(args)
    _write_csv(out / f"heatmap_{args.method}.csv", _meta(cfg, cfg.mc.base_seed), ["x_m", "y_m", "q_norm"], rows)
    return 0


def cmd_crlb(args) -> int:
    cfg = _load(args)
    sc = cfg.scenario
    cs = cfg.crlb
    seed = cfg.mc.base_seed
    out = _out_dir(args)
    meta = _meta(cfg, seed)
    snr_values = list(args.snr) if args.snr else list(cs.snr_db)
    rows = []
    for snr_db in snr_values:
        sigma_p, reports = average_sigma_p(sc, snr_db, cs.waveform_draws, seed)
        rows.append([snr_db, sigma_p, any(r.ill_conditioned for r in reports)])
    _write_csv(out / "crlb.csv", meta, ["snr_db", "sigma_p_m", "ill_conditioned"], rows)

    for vary, (lo, hi, step) in (("phi", cs.orientation_sweep_deg), ("beta", cs.beamwidth_sweep_deg)):
        n = round((hi - lo) / step)
        values_deg = lo + step * np.arange(n + 1)
        curve = sensitivity_sweep(sc, vary, np.deg2rad(values_deg), cs.sweep_snr_db, cs.waveform_draws, seed)
        _write_csv(
            out / f"sensitivity_{vary}.csv",
            meta,
            ["param_deg", "sigma_p_m", "ill_conditioned"],
            [[vd, sig, flag] for vd, (_, sig, flag) in zip(values_deg, curve)],
        )
    return 0


def cmd_mismatch(args) -> int:
    cfg = _load(args)
    truth = replace(cfg.scenario.truth, pattern_kind="ula", ula_elements=4)
    cfg = replace(cfg, scenario=replace(cfg.scenario, truth=truth))
    sweep = run_monte_carlo(cfg, noise_free=args.noise_free)
    out = _out_dir(args)
    _write_sweep_outputs(cfg, sweep, out, args.noise_free)

    # Pattern cost surface at the true position, highest requested SNR.
    snr_db = max(cfg.mc.snr_db)
    obs = synthesize_observation(
        cfg.scenario, snr_db, trial_seed(cfg.mc.base_seed, 0, snr_db),
        noise_sigma=0.0 if args.noise_free else None,
    )
    _, surface = grid_search_beampattern(
        cfg.scenario.truth.position, obs, cfg.beampattern_grid,
        cost_kind=cfg.estimator.cost_kind,
        loading_scale=cfg.estimator.loading_scale,
        loading_delta=cfg.estimator.loading_delta,
    )
    norm = surface.normalized()
    bg = cfg.beampattern_grid
    rows = [
        [np.rad2deg(bg.phi_values[ip]), np.rad2deg(bg.beta_values[ib]), norm[ib, ip]]
        for ib in range(bg.beta_values.size)
        for ip in range(bg.phi_values.size)
    ]
    _write_csv(out / "beampattern_surface.csv", _meta(cfg, cfg.mc.base_seed),
               ["phi_deg", "beta_deg", "q_norm"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamloc",
        description="Joint position/beampattern estimation experiments for directional emitters.",
    )
    parser.add_argument("--version", action="version", version=f"beamloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method_flag=False):
        p.add_argument("--config", default="comms",
                       help="bundled preset name (comms, radar) or path to a config JSON")
        p.add_argument("--out", default="out", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="override the base seed")
        p.add_argument("--trials", type=int, default=None, help="override the trial count")
        p.add_argument("--snr", type=_snr_list, default=None,
                       help="comma-separated SNR list in dB (use --snr=-10,0 for negatives)")
        p.add_argument("--grid-res-m", type=float, default=None, help="override position grid resolution")
        p.add_argument("--noise-free", action="store_true", help="force sigma_n = 0 (smoke runs)")
        if method_flag:
            p.add_argument("--method", choices=METHODS, default="proposed")

    p_sim = sub.add_parser("simulate", help="Monte Carlo error/uncertainty sweep")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_heat = sub.add_parser("heatmap", help="normalized cost surface for one method")
    common(p_heat, method_flag=True)
    p_heat.set_defaults(func=cmd_heatmap)

    p_crlb = sub.add_parser("crlb", help="position bound vs SNR and pattern sensitivity")
    common(p_crlb)
    p_crlb.set_defaults(func=cmd_crlb)

    p_mis = sub.add_parser("mismatch", help="sweep with a 4-element array truth pattern")
    common(p_mis)
    p_mis.set_defaults(func=cmd_mismatch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
