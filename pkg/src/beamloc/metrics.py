"""Monte Carlo experiment engine and the two evaluation metrics.

Metrics: trimmed mean distance error (sort, drop floor(trim*n) from each
end, mean the rest) and the contrast-expanded half-power uncertainty (area
of the grid region whose min-max normalized cost exceeds 0.5, plus a count
of its disjoint components as a spurious-peak indicator).

The sweep engine runs paired trials: per (trial, snr) one observation set
is synthesized from a seed derived as SeedSequence([base_seed, trial,
snr-key]) and every method consumes that identical observation, so method
comparisons at small trial counts are variance-reduced. Methods:

* "proposed": alternating joint (position, pattern) maximization;
* "mvdr":     omnidirectional MVDR DPD baseline;
* "aoa_tdoa": phase-only DPD baseline.

Trials are independent given their seeds and are merged in deterministic
(snr, trial, method) order, so the engine could be parallelized without
changing any output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .estimators import (
    CostSurface,
    alternating_maximization,
    baseline_aoa_tdoa,
    baseline_mvdr_omni,
)
from .scenario import RunConfig
from .signals import synthesize_observation

__all__ = [
    "METHODS",
    "TrialRecord",
    "MethodAggregate",
    "SweepResult",
    "trimmed_mean_error",
    "half_power_uncertainty",
    "half_power_region_count",
    "trial_seed",
    "run_monte_carlo",
]

METHODS = ("proposed", "mvdr", "aoa_tdoa")


def trimmed_mean_error(errors, trim_fraction: float = 0.05) -> float:
    """Mean after dropping floor(trim_fraction * n) values from each end."""
    arr = np.sort(np.asarray(errors, dtype=float))
    if arr.size == 0:
        raise ValueError("cannot trim an empty error list")
    if not (0.0 <= trim_fraction < 0.5):
        raise ValueError("trim_fraction must lie in [0, 0.5)")
    drop = int(math.floor(trim_fraction * arr.size))
    kept = arr[drop : arr.size - drop]
    return float(np.mean(kept))


def _normalized_mask(surface: CostSurface):
    norm = surface.normalized()  # raises on constant surfaces
    return np.nan_to_num(norm, nan=0.0) > 0.5


def half_power_uncertainty(surface: CostSurface) -> float:
    """Area (m^2) where the min-max normalized cost exceeds one half."""
    return float(np.count_nonzero(_normalized_mask(surface))) * surface.cell_area


def half_power_region_count(surface: CostSurface) -> int:
    """Number of disjoint above-half-power regions (8-connected components).

    Diagonal adjacency joins a region, so a count of 2 or more means
    genuinely separated peaks.
    """
    mask = _normalized_mask(surface)
    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    return int(count)


def trial_seed(base_seed: int, trial: int, snr_db: float) -> np.random.SeedSequence:
    """Deterministic per-(trial, snr) seed; identical across methods."""
    snr_key = int(round(snr_db * 1000.0)) % (2**32)
    return np.random.SeedSequence([int(base_seed), int(trial), snr_key])


@dataclass(frozen=True)
class TrialRecord:
    method: str
    snr_db: float
    trial: int
    p_hat: np.ndarray  # (2,) or None on failure
    psi_hat: object  # BeampatternParams for "proposed", else None
    distance_error: float  # meters, nan on failure
    iterations: int  # 0 for single-search methods
    converged: bool
    uncertainty_m2: float
    half_power_regions: int
    error_message: str = ""


@dataclass(frozen=True)
class MethodAggregate:
    method: str
    snr_db: float
    n_trials: int
    trimmed_mean_error_m: float
    mean_uncertainty_m2: float
    mean_iterations: float
    mean_half_power_regions: float


@dataclass(frozen=True)
class SweepResult:
    records: tuple  # TrialRecord, ordered (snr, trial, method)
    aggregates: tuple  # MethodAggregate, ordered (snr, method)

    def errors(self, method: str, snr_db: float) -> np.ndarray:
        return np.array(
            [
                r.distance_error
                for r in self.records
                if r.method == method and r.snr_db == snr_db and np.isfinite(r.distance_error)
            ]
        )

    def aggregate(self, method: str, snr_db: float) -> MethodAggregate:
        for a in self.aggregates:
            if a.method == method and a.snr_db == snr_db:
                return a
        raise KeyError(f"no aggregate for method={method!r} snr={snr_db}")


def _run_method(method: str, obs, cfg: RunConfig):
    """One method on one observation -> (p_hat, psi_hat, iterations, converged, surface)."""
    est = cfg.estimator
    if method == "proposed":
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
        return result.p_hat, result.psi_hat, result.iterations, result.converged, result.position_surface
    if method == "mvdr":
        surface = baseline_mvdr_omni(
            obs, cfg.position_grid, loading_scale=est.loading_scale, loading_delta=est.loading_delta
        )
        return surface.argmax_position(), None, 0, True, surface
    if method == "aoa_tdoa":
        surface = baseline_aoa_tdoa(obs, cfg.position_grid)
        return surface.argmax_position(), None, 0, True, surface
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def run_monte_carlo(
    cfg: RunConfig,
    methods=METHODS,
    snr_db_list=None,
    trials: int = None,
    base_seed: int = None,
    noise_free: bool = False,
) -> SweepResult:
    """Paired Monte Carlo sweep over SNR values and trials.

    Per-method failures are recorded on the trial (nan error), never raised.
    ``noise_free`` forces sigma_n = 0 while keeping the SNR labels for
    bookkeeping.
    """
    snr_db_list = list(cfg.mc.snr_db) if snr_db_list is None else [float(s) for s in snr_db_list]
    trials = cfg.mc.trials if trials is None else int(trials)
    base_seed = cfg.mc.base_seed if base_seed is None else int(base_seed)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    truth_p = cfg.scenario.truth.position
    records = []
    for snr_db in snr_db_list:
        for trial in range(trials):
            seed = trial_seed(base_seed, trial, snr_db)
            obs = synthesize_observation(
                cfg.scenario, snr_db, seed, noise_sigma=0.0 if noise_free else None
            )
            for method in methods:
                try:
                    p_hat, psi_hat, iters, converged, surface = _run_method(method, obs, cfg)
                    err = float(np.hypot(*(p_hat - truth_p)))
                    try:
                        unc = half_power_uncertainty(surface)
                        regions = half_power_region_count(surface)
                    except ValueError:  # constant surface: no contrast
                        unc, regions = float("nan"), 0
                    records.append(
                        TrialRecord(
                            method=method,
                            snr_db=snr_db,
                            trial=trial,
                            p_hat=p_hat,
                            psi_hat=psi_hat,
                            distance_error=err,
                            iterations=iters,
                            converged=converged,
                            uncertainty_m2=unc,
                            half_power_regions=regions,
                        )
                    )
                except Exception as exc:  # per-trial failures are data, not crashes
                    records.append(
                        TrialRecord(
                            method=method,
                            snr_db=snr_db,
                            trial=trial,
                            p_hat=None,
                            psi_hat=None,
                            distance_error=float("nan"),
                            iterations=0,
                            converged=False,
                            uncertainty_m2=float("nan"),
                            half_power_regions=0,
                            error_message=f"{type(exc).__name__}: {exc}",
                        )
                    )
    aggregates = []
    for snr_db in snr_db_list:
        for method in methods:
            group = [r for r in records if r.method == method and r.snr_db == snr_db]
            errs = [r.distance_error for r in group if np.isfinite(r.distance_error)]
            uncs = [r.uncertainty_m2 for r in group if np.isfinite(r.uncertainty_m2)]
            aggregates.append(
                MethodAggregate(
                    method=method,
                    snr_db=snr_db,
                    n_trials=len(group),
                    trimmed_mean_error_m=trimmed_mean_error(errs, cfg.mc.trim_fraction) if errs else float("nan"),
                    mean_uncertainty_m2=float(np.mean(uncs)) if uncs else float("nan"),
                    mean_iterations=float(np.mean([r.iterations for r in group])) if group else float("nan"),
                    mean_half_power_regions=float(np.mean([r.half_power_regions for r in group])) if group else float("nan"),
                )
            )
    return SweepResult(records=tuple(records), aggregates=tuple(aggregates))
