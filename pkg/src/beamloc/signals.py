"""Frequency-domain observation synthesis for the multi-receiver array model.

One observation window is N DFT bins at L sites with M elements each. Bin k
at site l sees

    r[k, l, :] = b_l * d_l * exp(-j*omega_k*tau_l) * a_l * s[k] + n[k, l, :]

with d_l the directional path attenuation (truth pattern), tau_l the
line-of-sight delay, a_l the site's steering vector toward the emitter,
b_l the per-site channel gain, s the waveform's frequency coefficients,
and white complex Gaussian noise n. The waveform is i.i.d. unit-variance
complex Gaussian per bin; transmit epoch is fixed at zero (a common phase
ramp is absorbed by the unknown waveform and estimators are invariant to
it, which is tested).

Randomness uses three independent child streams (waveform, channel, noise)
derived from one seed, so experiments can freeze one factor at a time and
identical seeds give bit-identical observations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import pattern_gain_at_offset, propagation_delay, steering_vector, transmit_angle
from .scenario import BeampatternParams, ConfigError, Scenario

__all__ = [
    "ObservationSet",
    "synthesize_observation",
    "calibrate_noise_sigma",
    "truth_attenuations",
    "composite_steering",
    "sample_covariance",
]


def truth_attenuations(scenario: Scenario) -> np.ndarray:
    """Per-site amplitude path gains d_l under the truth pattern, shape (L,)."""
    truth = scenario.truth
    recv = scenario.receivers
    diff = recv.positions - truth.position[None, :]
    dist = np.hypot(diff[:, 0], diff[:, 1])
    gains = np.array([truth.gain_toward(u) for u in recv.positions])
    return recv.kappa * gains / dist


def calibrate_noise_sigma(scenario: Scenario, snr_db: float) -> float:
    """Per-element, per-bin noise amplitude for a target SNR.

    SNR is defined at the site with the strongest mean path (nominal channel
    gain 1, unit-power waveform): sigma_n = max_l d_l * 10^(-snr_db/20).
    """
    if not np.isfinite(snr_db):
        raise ConfigError("snr_db must be finite")
    d = truth_attenuations(scenario)
    return float(np.max(d) * 10.0 ** (-snr_db / 20.0))


def composite_steering(scenario: Scenario, p, psi: BeampatternParams, bin_index: int):
    """Candidate model response for one frequency bin.

    Returns ``(a, gamma)``: the stacked length-L*M vector with per-site
    blocks d_l * exp(-j*omega_k*tau_l) * a_l under the parametric pattern
    ``psi`` at candidate position ``p`` (channel gains held at 1), and the
    attenuation vector gamma = [d_1..d_L]. ``norm(a)^2 == M * norm(gamma)^2``.
    """
    recv = scenario.receivers
    sig = scenario.signal
    if not 0 <= bin_index < sig.sample_count:
        raise ValueError(f"bin_index must be in [0, {sig.sample_count})")
    omega = sig.omega()[bin_index]
    blocks = []
    gamma = []
    for i, u in enumerate(recv.positions):
        theta_t = transmit_angle(p, u)
        dist = float(np.hypot(p[0] - u[0], p[1] - u[1]))
        g = pattern_gain_at_offset(theta_t - psi.phi, psi.beta)
        d = recv.kappa[i] * g / dist
        a_site = steering_vector(p, u, recv.element_count, recv.element_spacing, sig.wavelength)
        tau = propagation_delay(p, u, scenario.speed_of_light)
        blocks.append(d * np.exp(-1j * omega * tau) * a_site)
        gamma.append(d)
    return np.concatenate(blocks), np.asarray(gamma)


@dataclass(frozen=True)
class ObservationSet:
    """One synthesized observation window plus everything needed to replay it.

    ``r`` has shape (N, L, M). The realized waveform, channel draw, and noise
    amplitude are simulation bookkeeping: estimators consume only ``r`` and
    the scenario's receiver/signal geometry, never the truth fields (tested).
    """

    scenario: Scenario
    r: np.ndarray  # (N, L, M) complex
    waveform: np.ndarray  # (N,) complex, frequency coefficients
    channel_gains: np.ndarray  # (L,) complex
    noise_sigma: float
    snr_db: float
    seed_key: tuple

    @property
    def n_bins(self) -> int:
        return self.r.shape[0]

    def stacked(self) -> np.ndarray:
        """Observations as (N, L*M): per-bin stacked site blocks."""
        n, l, m = self.r.shape
        return self.r.reshape(n, l * m)

    def vector(self, bin_index: int) -> np.ndarray:
        return self.stacked()[bin_index]

    def with_decoy_truth(self) -> "ObservationSet":
        """Same observations with the truth emitter moved; for contract tests."""
        sc = self.scenario
        decoy = replace(
            sc.truth,
            position=sc.truth.position + np.array([137.0, -91.0]),
            psi=BeampatternParams(0.5, 1.0),
        )
        return replace(self, scenario=replace(sc, truth=decoy))


def sample_covariance(obs: ObservationSet, bin_index: int) -> np.ndarray:
    """Single-snapshot covariance r_k r_k^H, shape (L*M, L*M); rank one."""
    v = obs.vector(bin_index)
    return np.outer(v, v.conj())


def _complex_normal(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize_observation(
    scenario: Scenario,
    snr_db: float,
    seed,
    noise_sigma: float = None,
) -> ObservationSet:
    """Draw one observation window.

    ``seed`` may be an int or a numpy SeedSequence. ``noise_sigma`` overrides
    the SNR calibration when given (0 gives exact noise-free data); otherwise
    sigma comes from :func:`calibrate_noise_sigma`, so ``snr_db`` must be
    finite either way.
    """
    if not np.isfinite(snr_db):
        raise ConfigError("snr_db must be finite")
    if noise_sigma is None:
        noise_sigma = calibrate_noise_sigma(scenario, snr_db)
    elif noise_sigma < 0.0:
        raise ConfigError("noise_sigma must be >= 0")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    wf_ss, ch_ss, noise_ss = ss.spawn(3)
    n = scenario.signal.sample_count
    recv = scenario.receivers
    l_count, m_count = recv.count, recv.element_count

    waveform = _complex_normal(np.random.default_rng(wf_ss), n)
    chan = scenario.channel
    b = chan.mean + _complex_normal(np.random.default_rng(ch_ss), l_count, chan.std)
    noise = _complex_normal(np.random.default_rng(noise_ss), (n, l_count, m_count), noise_sigma)

    d = truth_attenuations(scenario)
    omega = scenario.signal.omega()
    tau = np.array([propagation_delay(scenario.truth.position, u, scenario.speed_of_light) for u in recv.positions])
    steer = np.stack(
        [
            steering_vector(scenario.truth.position, u, m_count, recv.element_spacing, scenario.signal.wavelength)
            for u in recv.positions
        ]
    )  # (L, M)
    # r[k,l,m] = b_l d_l e^{-j w_k tau_l} a_{l,m} s_k + noise
    phase = np.exp(-1j * omega[:, None] * tau[None, :])  # (N, L)
    r = (b * d)[None, :, None] * phase[:, :, None] * steer[None, :, :] * waveform[:, None, None] + noise

    return ObservationSet(
        scenario=scenario,
        r=r,
        waveform=waveform,
        channel_gains=b,
        noise_sigma=float(noise_sigma),
        snr_db=float(snr_db),
        seed_key=tuple(np.asarray(ss.entropy).ravel().tolist()) if ss.entropy is not None else (),
    )
