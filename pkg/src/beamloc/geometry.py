"""Emitter/receiver geometry and the directional channel primitives.

Everything downstream (signal synthesis, grid search, bound computation) is
built from the handful of scalar maps defined here: the parametric transmit
beampattern, bearing angles between an emitter position and the receiver
sites, propagation delay, per-receiver path attenuation, and the uniform
linear array steering vector at each receiver.

Conventions
-----------
* Positions are 2-D ``[x, y]`` in meters; angles are radians measured
  counterclockwise from the +x axis and wrapped to ``(-pi, pi]``.
* The beampattern is ``g(theta) = exp(alpha(beta) * (cos(theta - phi) - 1))``
  with orientation ``phi`` and half-power beamwidth ``beta``; ``alpha`` is
  chosen so that ``|g(phi +/- beta/2)|^2 == 1/2`` holds identically.
* Receiver arrays are uniform linear arrays, frame-fixed (element phase
  depends on the global receive bearing), first element is the site
  reference with phase 0.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegenerateGeometryError",
    "alpha_of_beta",
    "pattern_gain_at_offset",
    "beampattern_gain",
    "ula_truth_gain",
    "transmit_angle",
    "receive_angle",
    "propagation_delay",
    "directional_attenuation",
    "steering_vector",
    "link_budget_kappa",
    "wrap_angle",
    "as_position",
]

SPEED_OF_LIGHT = 299792458.0

# Two positions closer than this (meters) are treated as coincident.
COINCIDENCE_TOL = 1e-9

_HALF_LN2 = 0.5 * np.log(2.0)


class DegenerateGeometryError(ValueError):
    """Raised when an evaluation point coincides with a receiver site."""


def as_position(p) -> np.ndarray:
    """Validate and return ``p`` as a float array of shape (..., 2)."""
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"position must have trailing dimension 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("position coordinates must be finite")
    return arr


def wrap_angle(angle):
    """Wrap angle(s) to the interval (-pi, pi]."""
    a = np.asarray(angle, dtype=float)
    # Values already in range pass through bit-exactly; np.mod would not.
    out = np.where((a > -np.pi) & (a <= np.pi), a, np.pi - np.mod(np.pi - a, 2.0 * np.pi))
    if np.ndim(angle) == 0:
        return float(out)
    return out


def alpha_of_beta(beta):
    """Pattern concentration ``alpha`` for half-power beamwidth ``beta``.

    ``alpha(beta) = -(ln 2 / 2) / (cos(beta/2) - 1)``, the unique value for
    which the pattern crosses half power at ``beta/2`` off boresight.
    Accepts scalars or arrays; ``beta`` must lie in (0, pi) elementwise.
    """
    b = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("beta must be finite")
    if np.any(b <= 0.0) or np.any(b >= np.pi):
        raise ValueError("beta must lie in the open interval (0, pi) radians")
    out = -_HALF_LN2 / (np.cos(0.5 * b) - 1.0)
    if np.ndim(beta) == 0:
        return float(out)
    return out


def dalpha_dbeta(beta):
    """Derivative of :func:`alpha_of_beta` with respect to ``beta``."""
    b = np.asarray(beta, dtype=float)
    c = np.cos(0.5 * b) - 1.0
    out = -0.5 * _HALF_LN2 * np.sin(0.5 * b) / (c * c)
    if np.ndim(beta) == 0:
        return float(out)
    return out


def pattern_gain_at_offset(offset, beta):
    """Beampattern amplitude gain at ``offset`` radians off boresight.

    ``g = exp(alpha(beta) * (cos(offset) - 1))``; equals 1 at boresight and
    ``1/sqrt(2)`` at ``offset = +/- beta/2``. Broadcasts over both arguments.
    """
    a = alpha_of_beta(beta)
    out = np.exp(np.asarray(a) * (np.cos(np.asarray(offset, dtype=float)) - 1.0))
    if np.ndim(offset) == 0 and np.ndim(beta) == 0:
        return float(out)
    return out


def transmit_angle(p, u):
    """Bearing from emitter position ``p`` toward receiver site ``u``.

    Raises :class:`DegenerateGeometryError` if the points coincide.
    Supports broadcasting over leading dimensions of either argument.
    """
    p = as_position(p)
    u = as_position(u)
    dx = u[..., 0] - p[..., 0]
    dy = u[..., 1] - p[..., 1]
    if np.any(np.hypot(dx, dy) < COINCIDENCE_TOL):
        raise DegenerateGeometryError("emitter position coincides with a receiver site")
    out = np.arctan2(dy, dx)
    if out.ndim == 0:
        return float(out)
    return out


def receive_angle(p, u):
    """Bearing from receiver site ``u`` toward emitter position ``p``.

    Equal to the transmit angle plus pi, wrapped to (-pi, pi].
    """
    p = as_position(p)
    u = as_position(u)
    dx = p[..., 0] - u[..., 0]
    dy = p[..., 1] - u[..., 1]
    if np.any(np.hypot(dx, dy) < COINCIDENCE_TOL):
        raise DegenerateGeometryError("emitter position coincides with a receiver site")
    out = np.arctan2(dy, dx)
    if out.ndim == 0:
        return float(out)
    return out


def beampattern_gain(p, psi, u) -> float:
    """Transmit pattern amplitude from emitter at ``p`` toward site ``u``.

    ``psi`` is a ``(phi, beta)`` pair (an object with those attributes or a
    2-sequence). Strictly positive for beta in (0, pi).
    """
    phi, beta = _unpack_psi(psi)
    theta_t = transmit_angle(p, u)
    return pattern_gain_at_offset(theta_t - phi, beta)


def ula_truth_gain(offset, element_count: int = 4, spacing_over_wavelength: float = 0.5):
    """Normalized uniform-linear-array factor magnitude at ``offset`` radians.

    ``|sin(M*x) / (M*sin(x))|`` with ``x = pi * s * sin(offset)``; equals 1 at
    broadside and has true nulls (used as a mismatched truth pattern to stress
    the smooth parametric model). Broadcasts over ``offset``.
    """
    if element_count < 1:
        raise ValueError("element_count must be >= 1")
    x = np.pi * spacing_over_wavelength * np.sin(np.asarray(offset, dtype=float))
    den = element_count * np.sin(x)
    num = np.sin(element_count * x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.abs(den) < 1e-12, 1.0, np.abs(num / np.where(den == 0.0, 1.0, den)))
    if np.ndim(offset) == 0:
        return float(out)
    return out


def propagation_delay(p, u, speed_of_light: float = SPEED_OF_LIGHT):
    """Line-of-sight delay ``||p - u|| / c`` in seconds."""
    p = as_position(p)
    u = as_position(u)
    dist = np.hypot(p[..., 0] - u[..., 0], p[..., 1] - u[..., 1])
    if np.any(dist < COINCIDENCE_TOL):
        raise DegenerateGeometryError("emitter position coincides with a receiver site")
    out = dist / speed_of_light
    if out.ndim == 0:
        return float(out)
    return out


def directional_attenuation(p, psi, u, kappa: float = 1.0) -> float:
    """Amplitude path gain ``d = (kappa / ||p - u||) * g(theta_t; psi)``.

    ``kappa`` bundles the link-budget constants (see
    :func:`link_budget_kappa`); with the defaults it is 1 and the attenuation
    is pattern-weighted free-space spreading only.
    """
    phi, beta = _unpack_psi(psi)
    p = as_position(p)
    u = as_position(u)
    dist = float(np.hypot(p[0] - u[0], p[1] - u[1]))
    if dist < COINCIDENCE_TOL:
        raise DegenerateGeometryError("emitter position coincides with a receiver site")
    theta_t = float(np.arctan2(u[1] - p[1], u[0] - p[0]))
    return (kappa / dist) * pattern_gain_at_offset(theta_t - phi, beta)


def steering_vector(p, u, element_count: int, element_spacing: float, wavelength: float) -> np.ndarray:
    """ULA response at site ``u`` to a signal arriving from position ``p``.

    Element m (0-based) has phase ``exp(-j*2*pi*(m*spacing/wavelength) *
    cos(theta_r))`` where ``theta_r`` is the receive bearing; the first
    element is the phase reference, so ``out[0] == 1`` exactly and every
    entry has unit magnitude.
    """
    if element_count < 1:
        raise ValueError("element_count must be >= 1")
    if element_spacing <= 0.0 or wavelength <= 0.0:
        raise ValueError("element_spacing and wavelength must be positive")
    theta_r = receive_angle(p, u)
    m = np.arange(element_count, dtype=float)
    return np.exp(-2j * np.pi * (m * element_spacing / wavelength) * np.cos(theta_r))


def link_budget_kappa(
    transmit_power: float = 1.0,
    peak_gain: float = 1.0,
    receive_gain: float = 1.0,
    wavelength: float = 1.0,
    loss: float = 1.0,
) -> float:
    """Amplitude link-budget constant ``sqrt(P*G0*GR*lambda^2 / ((4*pi)^2*L))``.

    All inputs must be positive. The scenario defaults deliberately
    normalize this to 1/(4*pi)*... -- callers that want the unit-kappa
    convention simply pass kappa explicitly downstream.
    """
    for name, v in (
        ("transmit_power", transmit_power),
        ("peak_gain", peak_gain),
        ("receive_gain", receive_gain),
        ("wavelength", wavelength),
        ("loss", loss),
    ):
        if v <= 0.0:
            raise ValueError(f"{name} must be positive")
    return float(np.sqrt(transmit_power * peak_gain * receive_gain * wavelength**2 / ((4.0 * np.pi) ** 2 * loss)))


def _unpack_psi(psi):
    phi = getattr(psi, "phi", None)
    if phi is not None:
        return float(psi.phi), float(psi.beta)
    phi, beta = psi
    return float(phi), float(beta)
