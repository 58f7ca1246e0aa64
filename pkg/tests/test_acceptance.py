"""Numbered acceptance checks, one printed pass/fail line each.

Run under pytest (each check is a test) or standalone:

    python3 tests/test_acceptance.py

The desk protocol behind the Monte Carlo checks: both bundled scenarios on a
100 m search grid, 25 paired trials, the preset base seeds. Checks 4, 8 and 9
carry known measured gaps that are documented where the numbers are asserted;
they are reported honestly rather than loosened.
"""

import sys
import time
from dataclasses import replace
from functools import lru_cache

import numpy as np

from beamloc.crlb import (
    average_sigma_p,
    mean_derivatives,
    model_mean,
    pack_params,
    sensitivity_sweep,
)
from beamloc.estimators import alternating_maximization, grid_search_position
from beamloc.geometry import alpha_of_beta, beampattern_gain
from beamloc.metrics import run_monte_carlo, trial_seed
from beamloc.scenario import (
    BeampatternParams,
    ChannelModel,
    EmitterTruth,
    PositionGrid,
    ReceiverArray,
    Scenario,
    SignalConfig,
    load_config,
)
from beamloc.signals import synthesize_observation

GRID_RES_M = 100.0
TRIALS = 25
SNR_LOW = -10.0
SNR_HIGH = 0.0


def _report(num: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:02d} {detail}"
    print(line)
    assert ok, line


def _desk_config(name: str):
    return load_config(name).with_grid_resolution(GRID_RES_M)


@lru_cache(maxsize=None)
def _sweep(name: str):
    cfg = _desk_config(name)
    if name == "comms":
        snr = [-15.0, SNR_LOW, SNR_HIGH]
    else:
        snr = [SNR_LOW]
    return run_monte_carlo(cfg, snr_db_list=snr, trials=TRIALS)


@lru_cache(maxsize=None)
def _mismatch_sweep():
    cfg = _desk_config("comms")
    truth = replace(cfg.scenario.truth, pattern_kind="ula", ula_elements=4)
    cfg = replace(cfg, scenario=replace(cfg.scenario, truth=truth))
    return run_monte_carlo(cfg, snr_db_list=[SNR_LOW], trials=TRIALS)


def _margins(sweep, snr_db: float):
    """(proposed error, margin vs mvdr, margin vs aoa_tdoa) at one SNR."""
    err = {m: sweep.aggregate(m, snr_db).trimmed_mean_error_m
           for m in ("proposed", "mvdr", "aoa_tdoa")}
    return (err["proposed"],
            1.0 - err["proposed"] / err["mvdr"],
            1.0 - err["proposed"] / err["aoa_tdoa"])


# ---------------------------------------------------------------------------

def test_01_half_power_identity_and_width_constant():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260822)
    worst = 0.0
    for _ in range(50):
        phi = rng.uniform(-np.pi, np.pi)
        beta = rng.uniform(np.deg2rad(10.0), np.deg2rad(170.0))
        p = rng.uniform(-2000.0, 2000.0, size=2)
        radius = rng.uniform(500.0, 5000.0)
        for edge in (phi - beta / 2.0, phi + beta / 2.0):
            u = p + radius * np.array([np.cos(edge), np.sin(edge)])
            g = beampattern_gain(p, BeampatternParams(phi, beta), u)
            worst = max(worst, abs(abs(g) ** 2 - 0.5))
    alpha_err = abs(alpha_of_beta(np.deg2rad(120.0)) - np.log(2.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and alpha_err <= 1e-12 and dt < 1.0
    _report(1, ok, "half-power edges |g|^2 = 1/2 at 50 random patterns "
            f"(max err {worst:.1e}) and alpha(120deg) = ln 2 ({alpha_err:.1e}), {dt:.2f}s")


def test_02_derivative_blocks_match_finite_differences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    blocks = None
    worst = (0.0, "")
    for _ in range(20):
        ang = rng.uniform(-np.pi, np.pi, size=2)
        radius = rng.uniform(1500.0, 3500.0, size=2)
        sc = Scenario(
            receivers=ReceiverArray(
                positions=np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]),
                element_count=2,
            ),
            signal=SignalConfig(sample_count=3),
            truth=EmitterTruth(
                position=rng.uniform(-800.0, 800.0, size=2),
                psi=BeampatternParams(rng.uniform(-np.pi, np.pi), rng.uniform(0.3, 2.8)),
            ),
        )
        b = 1.0 + 0.1 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        s = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) / np.sqrt(2.0)
        zeta = pack_params(sc.truth.position, sc.truth.psi, b, s)
        jac = mean_derivatives(sc, zeta).reshape(-1, zeta.size)
        fd = np.empty_like(jac)
        for i in range(zeta.size):
            h = 1e-6 * max(1.0, abs(zeta[i]))
            zp, zm = zeta.copy(), zeta.copy()
            zp[i] += h
            zm[i] -= h
            fd[:, i] = ((model_mean(sc, zp) - model_mean(sc, zm)) / (2.0 * h)).ravel()
        n_l, n_n = 2, 3
        blocks = {
            "position": slice(0, 2),
            "orientation": slice(2, 3),
            "beamwidth": slice(3, 4),
            "channel gains": slice(4, 4 + 2 * n_l),
            "waveform": slice(4 + 2 * n_l, 4 + 2 * n_l + 2 * n_n),
        }
        for name, sl in blocks.items():
            rel = np.linalg.norm(fd[:, sl] - jac[:, sl]) / np.linalg.norm(jac[:, sl])
            if rel > worst[0]:
                worst = (rel, name)
    dt = time.perf_counter() - t0
    ok = worst[0] <= 1e-6 and dt < 30.0
    _report(2, ok, "all 5 analytic derivative blocks vs central differences over "
            f"20 random scenes, worst rel {worst[0]:.1e} ({worst[1]}), {dt:.1f}s")


def test_03_noise_free_exact_recovery():
    t0 = time.perf_counter()
    details = []
    ok = True
    for name in ("comms", "radar"):
        cfg = _desk_config(name)
        # noise-free means every stochastic disturbance is off: thermal noise
        # and the per-site gain draw (a realized gain spread perturbs the
        # per-site amplitudes the pattern model predicts, so exactness is
        # only defined at the nominal channel)
        sc = replace(cfg.scenario, channel=ChannelModel(1.0, 0.0))
        est = cfg.estimator
        obs = synthesize_observation(
            sc, 0.0, trial_seed(cfg.mc.base_seed, 0, 0.0), noise_sigma=0.0
        )
        res = alternating_maximization(
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
        trace = np.asarray(res.objective_trace)
        exact = (
            np.array_equal(res.p_hat, sc.truth.position)
            and res.psi_hat.phi == sc.truth.psi.phi
            and res.psi_hat.beta == sc.truth.psi.beta
            and np.all(np.diff(trace) >= 0.0)
        )
        ok = ok and exact
        details.append(f"{name} {'exact' if exact else 'MISSED'} in {res.iterations} it")
    dt = time.perf_counter() - t0
    ok = ok and dt < 120.0
    _report(3, ok, "noise-free joint recovery is bit-exact with a non-decreasing "
            f"objective: {', '.join(details)}, {dt:.1f}s")


def test_04_comms_margins_and_bound_ratio():
    t0 = time.perf_counter()
    sweep = _sweep("comms")
    err_p, m_mvdr, m_aoa = _margins(sweep, SNR_LOW)
    # measured ceiling at the pinned seed: the mvdr margin lands at ~28%,
    # short of the 30% bar (oracle-init experiments show the same ceiling)
    leg_margin = m_mvdr >= 0.30 and m_aoa >= 0.30

    errors0 = _sweep("comms").errors("proposed", SNR_HIGH)
    rms = float(np.sqrt(np.mean(errors0**2)))
    sigma, _ = average_sigma_p(
        load_config("comms").scenario, SNR_HIGH, 8, load_config("comms").mc.base_seed
    )
    ratio = rms / sigma
    leg_bound = ratio <= 3.0
    dt = time.perf_counter() - t0
    _report(4, leg_margin and leg_bound,
            f"comms {TRIALS}-trial sweep: at {SNR_LOW:g} dB proposed {err_p:.0f} m, "
            f"margins {m_mvdr:+.1%} (mvdr) / {m_aoa:+.1%} (aoa), need >= +30.0%; "
            f"at {SNR_HIGH:g} dB rms/bound = {rms:.0f}/{sigma:.1f} = {ratio:.2f} "
            f"(<= 3), {dt:.0f}s")


def test_05_radar_margins():
    t0 = time.perf_counter()
    err_p, m_mvdr, m_aoa = _margins(_sweep("radar"), SNR_LOW)
    ok = m_mvdr >= 0.30 and m_aoa >= 0.30
    dt = time.perf_counter() - t0
    _report(5, ok, f"radar {TRIALS}-trial sweep at {SNR_LOW:g} dB: proposed "
            f"{err_p:.0f} m, margins {m_mvdr:+.1%} (mvdr) / {m_aoa:+.1%} (aoa), "
            f"need >= +30.0%, {dt:.0f}s")


def test_06_iteration_budget():
    its = {name: _sweep(name).aggregate("proposed", SNR_LOW).mean_iterations
           for name in ("comms", "radar")}
    ok = all(v <= 6.0 for v in its.values())
    _report(6, ok, f"mean refinement iterations at {SNR_LOW:g} dB: "
            f"comms {its['comms']:.2f}, radar {its['radar']:.2f} (<= 6)")


def test_07_uncertainty_shrinks_and_baseline_splits():
    sweep = _sweep("comms")
    unc_hi = sweep.aggregate("proposed", SNR_HIGH).mean_uncertainty_m2
    unc_lo = sweep.aggregate("proposed", -15.0).mean_uncertainty_m2
    leg_unc = unc_hi < unc_lo
    recs = [r for r in sweep.records if r.method == "aoa_tdoa" and r.snr_db == SNR_HIGH]
    n_split = sum(1 for r in recs if r.half_power_regions >= 2)
    leg_split = n_split >= (len(recs) + 1) // 2
    _report(7, leg_unc and leg_split,
            f"proposed half-power uncertainty {unc_hi:.2e} m^2 at {SNR_HIGH:g} dB < "
            f"{unc_lo:.2e} m^2 at -15 dB; aoa surface splits into >= 2 regions in "
            f"{n_split}/{len(recs)} trials (need >= {(len(recs) + 1) // 2})")


def test_08_mismatched_truth_margins():
    t0 = time.perf_counter()
    err_p, m_mvdr, m_aoa = _margins(_mismatch_sweep(), SNR_LOW)
    # known inversion: a 4-element array truth radiates enough into every
    # site that the omnidirectional mvdr baseline is nearly correctly
    # specified here while the two-parameter pattern family is not
    ok = m_mvdr >= 0.30 and m_aoa >= 0.30
    dt = time.perf_counter() - t0
    _report(8, ok, f"4-element array truth, comms geometry, {SNR_LOW:g} dB: proposed "
            f"{err_p:.0f} m, margins {m_mvdr:+.1%} (mvdr) / {m_aoa:+.1%} (aoa), "
            f"need >= +30.0%, {dt:.0f}s")


def test_09_bound_sensitivity_orderings():
    t0 = time.perf_counter()
    comms = load_config("comms")
    lo, hi, step = comms.crlb.orientation_sweep_deg
    phi_deg = lo + step * np.arange(round((hi - lo) / step) + 1)
    curve = sensitivity_sweep(
        comms.scenario, "phi", np.deg2rad(phi_deg),
        comms.crlb.sweep_snr_db, comms.crlb.waveform_draws, comms.mc.base_seed,
    )
    sig = np.array([s for _, s, _ in curve])
    by_deg = dict(zip(phi_deg, sig))
    argmin_deg = float(phi_deg[int(np.argmin(sig))])
    # measured basin is shallow and its grid argmin sits at -7 deg, outside
    # the +-2 deg window around the true -10 deg orientation
    leg_argmin = abs(argmin_deg - (-10.0)) <= 2.0
    leg_order = by_deg[-20.0] > by_deg[0.0] > by_deg[-10.0]

    radar = load_config("radar")
    beta_deg = np.arange(20.0, 31.0, 2.0)
    curve_b = sensitivity_sweep(
        radar.scenario, "beta", np.deg2rad(beta_deg),
        radar.crlb.sweep_snr_db, radar.crlb.waveform_draws, radar.mc.base_seed,
    )
    sig_b = np.array([s for _, s, _ in curve_b])
    leg_beta = bool(np.all(np.diff(sig_b) < 0.0))
    dt = time.perf_counter() - t0
    _report(9, leg_argmin and leg_order and leg_beta,
            f"orientation sweep argmin {argmin_deg:+.0f} deg (want -10 +- 2); "
            f"sigma(-20) > sigma(0) > sigma(-10) is {leg_order}; bound rises "
            f"monotonically as the radar beam narrows 30->20 deg is {leg_beta}, {dt:.0f}s")


def test_10_invariance_suite():
    t0 = time.perf_counter()
    cfg = load_config("comms")
    sc = cfg.scenario
    obs = synthesize_observation(sc, 0.0, trial_seed(1, 0, 0.0), noise_sigma=0.0)
    grid = PositionGrid(-3000.0, 3000.0, -3000.0, 3000.0, 1500.0)
    psi = sc.truth.psi
    legs = {}

    base = {kind: grid_search_position(psi, obs, grid, cost_kind=kind).values
            for kind in ("matched", "mvdr")}
    scaled = replace(
        obs, scenario=replace(sc, receivers=replace(sc.receivers, kappa=10.0 * sc.receivers.kappa))
    )
    legs["kappa"] = all(
        np.allclose(grid_search_position(psi, scaled, grid, cost_kind=k).values,
                    base[k], rtol=1e-10)
        for k in base
    )

    shifted = replace(obs, r=obs.r * np.exp(-1j * sc.signal.omega() * 3.7e-6)[:, None, None])
    legs["t0"] = all(
        np.allclose(grid_search_position(psi, shifted, grid, cost_kind=k).values,
                    base[k], rtol=1e-10)
        for k in base
    )

    perm = [2, 0, 3, 1]
    sc_perm = replace(
        sc, receivers=replace(sc.receivers, positions=sc.receivers.positions[perm],
                              kappa=sc.receivers.kappa[perm])
    )
    obs_perm = replace(obs, scenario=sc_perm, r=obs.r[:, perm, :])
    legs["permutation"] = all(
        np.allclose(grid_search_position(psi, obs_perm, grid, cost_kind=k).values,
                    base[k], rtol=1e-10)
        for k in base
    )

    offset = np.array([700.0, -400.0])
    sc_shift = replace(
        sc,
        receivers=replace(sc.receivers, positions=sc.receivers.positions + offset),
        truth=replace(sc.truth, position=sc.truth.position + offset),
    )
    s0, _ = average_sigma_p(sc, 0.0, 2, 99)
    s1, _ = average_sigma_p(sc_shift, 0.0, 2, 99)
    legs["translation"] = bool(np.isclose(s1, s0, rtol=1e-10))

    dt = time.perf_counter() - t0
    ok = all(legs.values())
    states = ", ".join(f"{k} {'ok' if v else 'BROKEN'}" for k, v in legs.items())
    _report(10, ok, f"cost/bound invariances at rel 1e-10: {states}, {dt:.0f}s")


# ---------------------------------------------------------------------------

_CHECKS = [
    test_01_half_power_identity_and_width_constant,
    test_02_derivative_blocks_match_finite_differences,
    test_03_noise_free_exact_recovery,
    test_04_comms_margins_and_bound_ratio,
    test_05_radar_margins,
    test_06_iteration_budget,
    test_07_uncertainty_shrinks_and_baseline_splits,
    test_08_mismatched_truth_margins,
    test_09_bound_sensitivity_orderings,
    test_10_invariance_suite,
]


def main() -> int:
    failed = 0
    for check in _CHECKS:
        try:
            check()
        except AssertionError:
            failed += 1
    print(f"{len(_CHECKS) - failed}/{len(_CHECKS)} acceptance checks pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
