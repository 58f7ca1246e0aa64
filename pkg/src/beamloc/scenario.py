"""Scenario description, search grids, and JSON config round-tripping.

A :class:`Scenario` bundles everything the synthesizer and estimators need:
receiver sites and array layout, signal/sampling parameters, the true
emitter state, and the per-receiver channel draw model. Configs at the
file boundary use degrees and meters; everything in memory is radians,
meters, seconds.

Grid coordinate arrays are always built as ``min + i * step`` (never
``linspace``) so that on-grid truth values are representable bit-exactly
and noise-free searches can recover them with ``==``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import (
    COINCIDENCE_TOL,
    SPEED_OF_LIGHT,
    as_position,
    pattern_gain_at_offset,
    transmit_angle,
    ula_truth_gain,
    wrap_angle,
)

__all__ = [
    "ConfigError",
    "BeampatternParams",
    "ReceiverArray",
    "SignalConfig",
    "ChannelModel",
    "EmitterTruth",
    "Scenario",
    "PositionGrid",
    "BeampatternGrid",
    "McSettings",
    "EstimatorSettings",
    "CrlbSettings",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "config_digest",
    "preset_path",
]

PATTERN_KINDS = ("parametric", "ula", "omni")


class ConfigError(ValueError):
    """Invalid scenario/experiment configuration."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BeampatternParams:
    """Transmit pattern parameters: orientation ``phi``, half-power width ``beta`` (radians)."""

    phi: float
    beta: float

    def __post_init__(self):
        if not np.isfinite(self.phi):
            raise ConfigError("orientation phi must be finite")
        if not (0.0 < self.beta < np.pi):
            raise ConfigError("beamwidth beta must lie in (0, pi) radians")
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    @classmethod
    def from_degrees(cls, phi_deg: float, beta_deg: float) -> "BeampatternParams":
        return cls(float(np.deg2rad(phi_deg)), float(np.deg2rad(beta_deg)))


@dataclass(frozen=True)
class ReceiverArray:
    """L receiver sites, each carrying an identical M-element ULA.

    ``kappa`` holds the per-receiver amplitude link-budget constants; the
    scenario default normalizes them to 1 so attenuation is pattern-weighted
    spreading loss only.
    """

    positions: np.ndarray  # (L, 2) meters
    element_count: int = 4
    element_spacing: float = 0.5  # meters
    kappa: np.ndarray = None  # (L,)

    def __post_init__(self):
        pos = as_position(self.positions)
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise ConfigError("receiver positions must have shape (L, 2) with L >= 1")
        # Pairwise-distinct sites: coincident receivers break steering geometry.
        diff = pos[:, None, :] - pos[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, np.inf)
        if np.any(d < COINCIDENCE_TOL):
            raise ConfigError("receiver sites must be pairwise distinct")
        if self.element_count < 1:
            raise ConfigError("element_count must be >= 1")
        if self.element_spacing <= 0.0:
            raise ConfigError("element_spacing must be positive")
        kap = np.full(pos.shape[0], 1.0) if self.kappa is None else np.asarray(self.kappa, dtype=float)
        if kap.ndim == 0:
            kap = np.full(pos.shape[0], float(kap))
        if kap.shape != (pos.shape[0],) or np.any(~np.isfinite(kap)) or np.any(kap <= 0.0):
            raise ConfigError("kappa must be positive and match the receiver count")
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "kappa", _readonly(kap))

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class SignalConfig:
    """Sampling and carrier parameters for one observation window."""

    sample_count: int = 32
    sampling_period: float = 5e-6  # seconds
    wavelength: float = 1.0  # meters

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1")
        if self.sampling_period <= 0.0 or not np.isfinite(self.sampling_period):
            raise ConfigError("sampling_period must be positive and finite")
        if self.wavelength <= 0.0:
            raise ConfigError("wavelength must be positive")

    def omega(self) -> np.ndarray:
        """Angular frequencies of the N DFT bins: 2*pi*k/(N*T), k = 0..N-1."""
        n = self.sample_count
        return 2.0 * np.pi * np.arange(n) / (n * self.sampling_period)


@dataclass(frozen=True)
class ChannelModel:
    """Per-receiver complex gain draw b_l ~ CN(mean, std^2)."""

    mean: float = 1.0
    std: float = 0.1

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise ConfigError("channel mean must be finite")
        if self.std < 0.0 or not np.isfinite(self.std):
            raise ConfigError("channel std must be >= 0")


@dataclass(frozen=True)
class EmitterTruth:
    """Ground-truth emitter state used by the synthesizer only.

    ``pattern_kind`` selects the truth radiation pattern: "parametric" is the
    same family the estimators search over; "ula" is a 4-element array factor
    (model mismatch studies); "omni" radiates uniformly (baseline oracles).
    Estimators never read this object.
    """

    position: np.ndarray  # (2,) meters
    psi: BeampatternParams
    pattern_kind: str = "parametric"
    ula_elements: int = 4

    def __post_init__(self):
        pos = as_position(self.position)
        if pos.shape != (2,):
            raise ConfigError("emitter position must be a single (x, y) pair")
        if self.pattern_kind not in PATTERN_KINDS:
            raise ConfigError(f"pattern_kind must be one of {PATTERN_KINDS}")
        if self.pattern_kind == "ula" and self.ula_elements < 2:
            raise ConfigError("ula truth pattern needs >= 2 elements")
        object.__setattr__(self, "position", _readonly(pos))

    def gain_toward(self, u) -> float:
        """Truth pattern amplitude toward receiver site ``u``."""
        if self.pattern_kind == "omni":
            return 1.0
        offset = transmit_angle(self.position, u) - self.psi.phi
        if self.pattern_kind == "ula":
            return ula_truth_gain(offset, self.ula_elements)
        return pattern_gain_at_offset(offset, self.psi.beta)


@dataclass(frozen=True)
class Scenario:
    receivers: ReceiverArray
    signal: SignalConfig
    truth: EmitterTruth
    channel: ChannelModel = ChannelModel()
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.speed_of_light <= 0.0:
            raise ConfigError("speed_of_light must be positive")
        # The emitter may not sit on a receiver: every downstream map is singular there.
        diff = self.receivers.positions - self.truth.position[None, :]
        if np.any(np.hypot(diff[:, 0], diff[:, 1]) < COINCIDENCE_TOL):
            raise ConfigError("emitter position coincides with a receiver site")


@dataclass(frozen=True)
class PositionGrid:
    """Uniform rectangular search grid; nodes at min + i*resolution."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: float

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max", "resolution"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.resolution <= 0.0:
            raise ConfigError("grid resolution must be positive")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ConfigError("grid extents must satisfy max >= min")
        for lo, hi in ((self.x_min, self.x_max), (self.y_min, self.y_max)):
            n = round((hi - lo) / self.resolution)
            if abs((hi - lo) - n * self.resolution) > 1e-6 * self.resolution:
                raise ConfigError("grid extent must be an integer multiple of resolution")

    @classmethod
    def centered(cls, center, extent: float, resolution: float) -> "PositionGrid":
        cx, cy = float(center[0]), float(center[1])
        h = extent / 2.0
        return cls(cx - h, cx + h, cy - h, cy + h, resolution)

    @property
    def nx(self) -> int:
        return round((self.x_max - self.x_min) / self.resolution) + 1

    @property
    def ny(self) -> int:
        return round((self.y_max - self.y_min) / self.resolution) + 1

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.resolution * self.resolution

    def x_values(self) -> np.ndarray:
        return self.x_min + self.resolution * np.arange(self.nx)

    def y_values(self) -> np.ndarray:
        return self.y_min + self.resolution * np.arange(self.ny)

    def nodes(self) -> np.ndarray:
        """All grid nodes, shape (ny*nx, 2), row-major from (x_min, y_min)."""
        xv = self.x_values()
        yv = self.y_values()
        xx, yy = np.meshgrid(xv, yv)
        return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass(frozen=True)
class BeampatternGrid:
    """Candidate (phi, beta) pairs: full-circle phi grid x discrete beta list."""

    phi_values: np.ndarray  # radians, covers (-pi, pi]
    beta_values: np.ndarray  # radians, ordered, within (0, pi)

    def __post_init__(self):
        phi = np.asarray(self.phi_values, dtype=float)
        beta = np.asarray(self.beta_values, dtype=float)
        if phi.ndim != 1 or phi.size == 0 or beta.ndim != 1 or beta.size == 0:
            raise ConfigError("beampattern grid axes must be non-empty 1-D")
        if np.any(beta <= 0.0) or np.any(beta >= np.pi):
            raise ConfigError("beta grid values must lie in (0, pi)")
        if np.any(np.diff(beta) <= 0.0):
            raise ConfigError("beta grid values must be strictly increasing")
        object.__setattr__(self, "phi_values", _readonly(phi))
        object.__setattr__(self, "beta_values", _readonly(beta))

    @classmethod
    def from_degrees(
        cls,
        phi_step_deg: float = 1.0,
        beta_min_deg: float = 10.0,
        beta_max_deg: float = 90.0,
        beta_step_deg: float = 10.0,
    ) -> "BeampatternGrid":
        n_phi = round(360.0 / phi_step_deg)
        if abs(360.0 - n_phi * phi_step_deg) > 1e-9:
            raise ConfigError("phi step must divide 360 degrees")
        phi_deg = -180.0 + phi_step_deg * np.arange(1, n_phi + 1)
        n_beta = round((beta_max_deg - beta_min_deg) / beta_step_deg)
        if abs((beta_max_deg - beta_min_deg) - n_beta * beta_step_deg) > 1e-9:
            raise ConfigError("beta range must be an integer multiple of the beta step")
        beta_deg = beta_min_deg + beta_step_deg * np.arange(n_beta + 1)
        return cls(np.deg2rad(phi_deg), np.deg2rad(beta_deg))

    @property
    def shape(self) -> tuple:
        return (self.beta_values.size, self.phi_values.size)


@dataclass(frozen=True)
class McSettings:
    snr_db: tuple = (-15.0, -12.5, -10.0, -7.5, -5.0, -2.5, 0.0)
    trials: int = 250
    base_seed: int = 12345
    trim_fraction: float = 0.05

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not (0.0 <= self.trim_fraction < 0.5):
            raise ConfigError("trim_fraction must lie in [0, 0.5)")
        for s in self.snr_db:
            if not np.isfinite(s):
                raise ConfigError("snr_db values must be finite")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))


@dataclass(frozen=True)
class EstimatorSettings:
    cost_kind: str = "mvdr"  # "mvdr" (enhanced) or "matched"
    loading_scale: float = 1e-3  # delta = scale * trace(R_k)/(M*L) per bin
    loading_delta: float = None  # fixed delta overrides the scale when set
    epsilon_m: float = None  # None -> stop only when the argmax repeats
    max_iterations: int = 20
    init_headings: int = 8  # wide-beam orientations scanned for the seed

    def __post_init__(self):
        if self.cost_kind not in ("mvdr", "matched"):
            raise ConfigError("estimator cost must be 'mvdr' or 'matched'")
        if self.loading_scale <= 0.0:
            raise ConfigError("loading_scale must be positive")
        if self.loading_delta is not None and self.loading_delta <= 0.0:
            raise ConfigError("loading_delta must be positive when given")
        if self.epsilon_m is not None and self.epsilon_m < 0.0:
            raise ConfigError("epsilon_m must be >= 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.init_headings < 1:
            raise ConfigError("init_headings must be >= 1")


@dataclass(frozen=True)
class CrlbSettings:
    snr_db: tuple = (-15.0, -10.0, -5.0, 0.0)
    orientation_sweep_deg: tuple = (-40.0, 20.0, 1.0)  # (min, max, step)
    beamwidth_sweep_deg: tuple = (16.0, 60.0, 2.0)
    waveform_draws: int = 8
    sweep_snr_db: float = 0.0

    def __post_init__(self):
        if self.waveform_draws < 1:
            raise ConfigError("waveform_draws must be >= 1")
        for name, (lo, hi, step) in (
            ("orientation_sweep_deg", self.orientation_sweep_deg),
            ("beamwidth_sweep_deg", self.beamwidth_sweep_deg),
        ):
            if step <= 0.0 or hi < lo:
                raise ConfigError(f"{name} must be (min, max, step) with step > 0 and max >= min")


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment needs: scenario + grids + run settings."""

    name: str
    scenario: Scenario
    position_grid: PositionGrid
    beampattern_grid: BeampatternGrid
    mc: McSettings = McSettings()
    estimator: EstimatorSettings = EstimatorSettings()
    crlb: CrlbSettings = CrlbSettings()

    def with_grid_resolution(self, resolution_m: float) -> "RunConfig":
        return replace(self, position_grid=replace(self.position_grid, resolution=resolution_m))


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing field '{key}' in {where}")
    return d[key]


def parse_config(raw: dict) -> RunConfig:
    """Build a RunConfig from a plain JSON-style dict (degrees/meters at this boundary)."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    try:
        recv = _require(raw, "receivers", "config")
        emit = _require(raw, "emitter", "config")
        sig = raw.get("signal", {})
        chan = raw.get("channel", {})
        prop = raw.get("propagation", {})
        pgrid = _require(raw, "position_grid", "config")
        bgrid = raw.get("beampattern_grid", {})

        receivers = ReceiverArray(
            positions=np.asarray(_require(recv, "positions_m", "receivers"), dtype=float),
            element_count=int(recv.get("element_count", 4)),
            element_spacing=float(recv.get("element_spacing_m", 0.5)),
            kappa=recv.get("kappa", None),
        )
        signal = SignalConfig(
            sample_count=int(sig.get("sample_count", 32)),
            sampling_period=float(sig.get("sampling_period_s", 5e-6)),
            wavelength=float(sig.get("wavelength_m", 1.0)),
        )
        pattern = emit.get("pattern", {"kind": "parametric"})
        if isinstance(pattern, str):
            pattern = {"kind": pattern}
        truth = EmitterTruth(
            position=np.asarray(_require(emit, "position_m", "emitter"), dtype=float),
            psi=BeampatternParams.from_degrees(
                float(_require(emit, "orientation_deg", "emitter")),
                float(_require(emit, "beamwidth_deg", "emitter")),
            ),
            pattern_kind=str(pattern.get("kind", "parametric")),
            ula_elements=int(pattern.get("elements", 4)),
        )
        channel = ChannelModel(mean=float(chan.get("mean", 1.0)), std=float(chan.get("std", 0.1)))
        scenario = Scenario(
            receivers=receivers,
            signal=signal,
            truth=truth,
            channel=channel,
            speed_of_light=float(prop.get("speed_of_light_m_s", SPEED_OF_LIGHT)),
        )
        position_grid = PositionGrid(
            x_min=float(_require(pgrid, "x_min_m", "position_grid")),
            x_max=float(_require(pgrid, "x_max_m", "position_grid")),
            y_min=float(_require(pgrid, "y_min_m", "position_grid")),
            y_max=float(_require(pgrid, "y_max_m", "position_grid")),
            resolution=float(_require(pgrid, "resolution_m", "position_grid")),
        )
        beampattern_grid = BeampatternGrid.from_degrees(
            phi_step_deg=float(bgrid.get("orientation_step_deg", 1.0)),
            beta_min_deg=float(bgrid.get("beamwidth_min_deg", 10.0)),
            beta_max_deg=float(bgrid.get("beamwidth_max_deg", 90.0)),
            beta_step_deg=float(bgrid.get("beamwidth_step_deg", 10.0)),
        )
        mcd = raw.get("monte_carlo", {})
        mc = McSettings(
            snr_db=tuple(mcd.get("snr_db", McSettings.snr_db)),
            trials=int(mcd.get("trials", McSettings.trials)),
            base_seed=int(mcd.get("base_seed", McSettings.base_seed)),
            trim_fraction=float(mcd.get("trim_fraction", McSettings.trim_fraction)),
        )
        est_d = raw.get("estimator", {})
        estimator = EstimatorSettings(
            cost_kind=str(est_d.get("cost", "mvdr")),
            loading_scale=float(est_d.get("loading_scale", 1e-3)),
            loading_delta=est_d.get("loading_delta", None),
            epsilon_m=est_d.get("epsilon_m", None),
            max_iterations=int(est_d.get("max_iterations", 20)),
            init_headings=int(est_d.get("init_headings", 8)),
        )
        crlb_d = raw.get("crlb", {})
        crlb = CrlbSettings(
            snr_db=tuple(crlb_d.get("snr_db", CrlbSettings.snr_db)),
            orientation_sweep_deg=tuple(crlb_d.get("orientation_sweep_deg", CrlbSettings.orientation_sweep_deg)),
            beamwidth_sweep_deg=tuple(crlb_d.get("beamwidth_sweep_deg", CrlbSettings.beamwidth_sweep_deg)),
            waveform_draws=int(crlb_d.get("waveform_draws", CrlbSettings.waveform_draws)),
            sweep_snr_db=float(crlb_d.get("sweep_snr_db", CrlbSettings.sweep_snr_db)),
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return RunConfig(
        name=str(raw.get("name", "scenario")),
        scenario=scenario,
        position_grid=position_grid,
        beampattern_grid=beampattern_grid,
        mc=mc,
        estimator=estimator,
        crlb=crlb,
    )


def _deg(value_rad: float) -> float:
    # Round to 9 decimals so parse -> serialize -> parse is idempotent for
    # human-written degree values.
    return round(float(np.rad2deg(value_rad)), 9)


def serialize_config(cfg: RunConfig) -> dict:
    """Inverse of parse_config; emits the canonical JSON-style dict."""
    sc = cfg.scenario
    bg = cfg.beampattern_grid
    phi_step = _deg(bg.phi_values[1] - bg.phi_values[0]) if bg.phi_values.size > 1 else 360.0
    beta_deg = [_deg(v) for v in bg.beta_values]
    beta_step = beta_deg[1] - beta_deg[0] if len(beta_deg) > 1 else 10.0
    pattern = {"kind": sc.truth.pattern_kind}
    if sc.truth.pattern_kind == "ula":
        pattern["elements"] = sc.truth.ula_elements
    return {
        "name": cfg.name,
        "receivers": {
            "positions_m": [[float(x), float(y)] for x, y in sc.receivers.positions],
            "element_count": sc.receivers.element_count,
            "element_spacing_m": sc.receivers.element_spacing,
            "kappa": [float(k) for k in sc.receivers.kappa],
        },
        "emitter": {
            "position_m": [float(sc.truth.position[0]), float(sc.truth.position[1])],
            "orientation_deg": _deg(sc.truth.psi.phi),
            "beamwidth_deg": _deg(sc.truth.psi.beta),
            "pattern": pattern,
        },
        "signal": {
            "sample_count": sc.signal.sample_count,
            "sampling_period_s": sc.signal.sampling_period,
            "wavelength_m": sc.signal.wavelength,
        },
        "channel": {"mean": sc.channel.mean, "std": sc.channel.std},
        "propagation": {"speed_of_light_m_s": sc.speed_of_light},
        "position_grid": {
            "x_min_m": cfg.position_grid.x_min,
            "x_max_m": cfg.position_grid.x_max,
            "y_min_m": cfg.position_grid.y_min,
            "y_max_m": cfg.position_grid.y_max,
            "resolution_m": cfg.position_grid.resolution,
        },
        "beampattern_grid": {
            "orientation_step_deg": phi_step,
            "beamwidth_min_deg": beta_deg[0],
            "beamwidth_max_deg": beta_deg[-1],
            "beamwidth_step_deg": round(beta_step, 9),
        },
        "monte_carlo": {
            "snr_db": list(cfg.mc.snr_db),
            "trials": cfg.mc.trials,
            "base_seed": cfg.mc.base_seed,
            "trim_fraction": cfg.mc.trim_fraction,
        },
        "estimator": {
            "cost": cfg.estimator.cost_kind,
            "loading_scale": cfg.estimator.loading_scale,
            "loading_delta": cfg.estimator.loading_delta,
            "epsilon_m": cfg.estimator.epsilon_m,
            "max_iterations": cfg.estimator.max_iterations,
            "init_headings": cfg.estimator.init_headings,
        },
        "crlb": {
            "snr_db": list(cfg.crlb.snr_db),
            "orientation_sweep_deg": list(cfg.crlb.orientation_sweep_deg),
            "beamwidth_sweep_deg": list(cfg.crlb.beamwidth_sweep_deg),
            "waveform_draws": cfg.crlb.waveform_draws,
            "sweep_snr_db": cfg.crlb.sweep_snr_db,
        },
    }


def preset_path(name: str) -> Path:
    return Path(__file__).parent / "presets" / f"{name}.json"


def load_config(source) -> RunConfig:
    """Load a RunConfig from a preset name ('comms', 'radar'), a path, or a dict."""
    if isinstance(source, dict):
        return parse_config(source)
    p = Path(source)
    if not p.exists():
        candidate = preset_path(str(source))
        if candidate.exists():
            p = candidate
        else:
            raise ConfigError(f"config not found: {source!r} (not a file or bundled preset)")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


def config_digest(cfg: RunConfig) -> str:
    """Stable sha256 over the canonical serialized config (first 12 hex chars)."""
    canon = json.dumps(serialize_config(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
