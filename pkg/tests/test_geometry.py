"""Geometry primitives: pattern shape, bearings, delay, attenuation, steering."""

import numpy as np
import pytest

from beamloc.geometry import (
    COINCIDENCE_TOL,
    SPEED_OF_LIGHT,
    DegenerateGeometryError,
    alpha_of_beta,
    beampattern_gain,
    dalpha_dbeta,
    directional_attenuation,
    pattern_gain_at_offset,
    propagation_delay,
    receive_angle,
    steering_vector,
    transmit_angle,
    ula_truth_gain,
    wrap_angle,
)
from beamloc.scenario import BeampatternParams

DEG = np.pi / 180.0


# ---------------------------------------------------------------------------
# alpha(beta)

def test_alpha_at_120_deg_is_ln2():
    # cos(60 deg) - 1 = -1/2 exactly, so alpha = ln 2
    assert alpha_of_beta(120.0 * DEG) == pytest.approx(np.log(2.0), rel=1e-14)


def test_alpha_frozen_values():
    # independently evaluated -(ln2/2)/(cos(beta/2)-1)
    assert alpha_of_beta(30.0 * DEG) == pytest.approx(10.171151712148042, rel=1e-12)
    assert alpha_of_beta(60.0 * DEG) == pytest.approx(2.5868604949728353, rel=1e-12)


def test_alpha_strictly_decreasing():
    betas = np.linspace(0.01, np.pi - 0.01, 200)
    vals = alpha_of_beta(betas)
    assert np.all(vals > 0.0)
    assert np.all(np.diff(vals) < 0.0)


@pytest.mark.parametrize("beta", [0.0, -0.3, np.pi, 3.5, np.inf, np.nan])
def test_alpha_domain_errors(beta):
    with pytest.raises(ValueError):
        alpha_of_beta(beta)


def test_dalpha_dbeta_matches_finite_difference():
    h = 1e-7
    for beta in (0.3, 0.9, 1.8, 2.6):
        fd = (alpha_of_beta(beta + h) - alpha_of_beta(beta - h)) / (2.0 * h)
        assert dalpha_dbeta(beta) == pytest.approx(fd, rel=1e-6)


# ---------------------------------------------------------------------------
# pattern gain

def test_gain_boresight_is_one():
    for beta_deg in (10.0, 30.0, 90.0, 170.0):
        assert pattern_gain_at_offset(0.0, beta_deg * DEG) == 1.0


def test_gain_half_power_at_half_beamwidth():
    # |g(+/- beta/2)|^2 == 1/2 is the defining property of alpha
    for beta_deg in np.arange(5.0, 180.0, 5.0):
        beta = beta_deg * DEG
        for sign in (1.0, -1.0):
            g = pattern_gain_at_offset(sign * beta / 2.0, beta)
            assert g * g == pytest.approx(0.5, abs=1e-12)


def test_gain_back_lobe_frozen_value():
    # exp(-2 * alpha(30 deg)), evaluated independently
    g = pattern_gain_at_offset(np.pi, 30.0 * DEG)
    assert g == pytest.approx(1.4636925880506363e-09, rel=1e-10)


def test_gain_even_periodic_unique_max():
    rng = np.random.default_rng(20260401)
    offs = rng.uniform(-np.pi, np.pi, size=500)
    for beta in (20.0 * DEG, 75.0 * DEG, 140.0 * DEG):
        ge = pattern_gain_at_offset(offs, beta)
        np.testing.assert_allclose(ge, pattern_gain_at_offset(-offs, beta), rtol=1e-14)
        np.testing.assert_allclose(ge, pattern_gain_at_offset(offs + 2.0 * np.pi, beta), rtol=1e-12)
        # strictly below 1 anywhere off boresight
        assert np.all(ge[np.abs(offs) > 1e-6] < 1.0)


def test_beampattern_gain_uses_transmit_bearing():
    psi = BeampatternParams.from_degrees(-10.0, 30.0)
    p = np.array([600.0, 600.0])
    u = np.array([2500.0, 2500.0])
    off = transmit_angle(p, u) - psi.phi
    assert beampattern_gain(p, psi, u) == pytest.approx(
        pattern_gain_at_offset(off, psi.beta), rel=1e-14
    )
    # psi may also be a plain (phi, beta) pair
    assert beampattern_gain(p, (psi.phi, psi.beta), u) == beampattern_gain(p, psi, u)


# ---------------------------------------------------------------------------
# ULA truth pattern (mismatch experiments)

def test_ula_gain_peak_and_nulls():
    assert ula_truth_gain(0.0) == 1.0
    # 4 elements at half-wavelength spacing: nulls where sin(offset) = 1/2 and 1
    assert ula_truth_gain(30.0 * DEG) == pytest.approx(0.0, abs=1e-12)
    assert ula_truth_gain(90.0 * DEG) == pytest.approx(0.0, abs=1e-12)


def test_ula_gain_sidelobe_regression():
    # frozen sidelobe sample, |sin(4x)/(4 sin x)| at x = pi/2*sin(48.6 deg)
    assert ula_truth_gain(48.6 * DEG) == pytest.approx(0.27057843442853188, rel=1e-10)


def test_ula_gain_bounded_and_even():
    rng = np.random.default_rng(7)
    offs = rng.uniform(-np.pi, np.pi, size=400)
    g = ula_truth_gain(offs)
    assert np.all(g <= 1.0 + 1e-12)
    assert np.all(g >= 0.0)
    np.testing.assert_allclose(g, ula_truth_gain(-offs), atol=1e-14)


def test_ula_gain_rejects_bad_count():
    with pytest.raises(ValueError):
        ula_truth_gain(0.1, element_count=0)


# ---------------------------------------------------------------------------
# bearings

def test_transmit_angle_diagonal():
    assert transmit_angle([600.0, 600.0], [2500.0, 2500.0]) == pytest.approx(45.0 * DEG, rel=1e-14)


def test_transmit_angle_frozen_value():
    # atan2(-3100, 1900)
    got = transmit_angle([600.0, 600.0], [2500.0, -2500.0])
    assert got == pytest.approx(-58.49573328079582 * DEG, rel=1e-12)


def test_coincident_points_raise():
    with pytest.raises(DegenerateGeometryError):
        transmit_angle([5.0, 5.0], [5.0, 5.0])
    with pytest.raises(DegenerateGeometryError):
        receive_angle([5.0, 5.0], [5.0, 5.0])
    with pytest.raises(DegenerateGeometryError):
        propagation_delay([5.0, 5.0], [5.0, 5.0 + 0.1 * COINCIDENCE_TOL])


def test_receive_is_transmit_plus_pi():
    rng = np.random.default_rng(123)
    for _ in range(1000):
        p = rng.uniform(-5000.0, 5000.0, size=2)
        u = rng.uniform(-5000.0, 5000.0, size=2)
        if np.hypot(*(p - u)) < 1.0:
            continue
        diff = wrap_angle(receive_angle(p, u) - transmit_angle(p, u))
        assert abs(abs(diff) - np.pi) < 1e-12


# ---------------------------------------------------------------------------
# delay and attenuation

def test_propagation_delay_definition():
    u = np.zeros(2)
    assert propagation_delay([SPEED_OF_LIGHT, 0.0], u) == pytest.approx(1.0, rel=1e-14)
    got = propagation_delay([600.0, 600.0], [2500.0, 2500.0])
    assert got == pytest.approx(8.9628864796488e-06, rel=1e-12)


def test_attenuation_boresight_inverse_distance():
    psi = BeampatternParams(0.0, 30.0 * DEG)
    # receiver on boresight at 1 km
    d1 = directional_attenuation([0.0, 0.0], psi, [1000.0, 0.0], kappa=1.0)
    assert d1 == pytest.approx(1e-3, rel=1e-14)
    d2 = directional_attenuation([0.0, 0.0], psi, [2000.0, 0.0], kappa=1.0)
    assert d2 == pytest.approx(d1 / 2.0, rel=1e-14)


def test_attenuation_half_power_offset_frozen():
    # 15 deg off a 30 deg beam at 2687.01 m: (1/2687.01) * 2^(-1/2)
    phi = -10.0 * DEG
    dist = 2687.01
    theta = phi + 15.0 * DEG
    u = dist * np.array([np.cos(theta), np.sin(theta)])
    d = directional_attenuation([0.0, 0.0], BeampatternParams(phi, 30.0 * DEG), u, kappa=1.0)
    assert d == pytest.approx(0.00026315748031698706, rel=1e-12)


def test_attenuation_homogeneous_in_kappa():
    rng = np.random.default_rng(99)
    psi = BeampatternParams(0.4, 1.0)
    for _ in range(50):
        p = rng.uniform(-3000.0, 3000.0, size=2)
        u = rng.uniform(-3000.0, 3000.0, size=2)
        if np.hypot(*(p - u)) < 1.0:
            continue
        c = float(rng.uniform(0.1, 50.0))
        base = directional_attenuation(p, psi, u, kappa=1.0)
        assert directional_attenuation(p, psi, u, kappa=c) == pytest.approx(c * base, rel=1e-14)


# ---------------------------------------------------------------------------
# steering vectors

def test_steering_broadside_all_ones():
    a = steering_vector([0.0, 1000.0], [0.0, 0.0], 4, 0.5, 1.0)
    np.testing.assert_allclose(a, np.ones(4), atol=1e-12)


def test_steering_endfire_alternates():
    a = steering_vector([1000.0, 0.0], [0.0, 0.0], 4, 0.5, 1.0)
    np.testing.assert_allclose(a, [1.0, -1.0, 1.0, -1.0], atol=1e-12)


def test_steering_sixty_degrees():
    p = 1000.0 * np.array([np.cos(60.0 * DEG), np.sin(60.0 * DEG)])
    a = steering_vector(p, [0.0, 0.0], 4, 0.5, 1.0)
    np.testing.assert_allclose(a, [1.0, -1.0j, -1.0, 1.0j], atol=1e-9)


def test_steering_unit_modulus_and_cos_symmetry():
    rng = np.random.default_rng(4321)
    for _ in range(200):
        u = rng.uniform(-2000.0, 2000.0, size=2)
        r = float(rng.uniform(100.0, 4000.0))
        th = float(rng.uniform(-np.pi, np.pi))
        p_plus = u + r * np.array([np.cos(th), np.sin(th)])
        p_minus = u + r * np.array([np.cos(-th), np.sin(-th)])
        a = steering_vector(p_plus, u, 4, 0.5, 1.0)
        assert a[0] == 1.0 + 0.0j
        np.testing.assert_allclose(np.abs(a), 1.0, rtol=1e-14)
        # mirrored bearing gives the same cos, hence the same vector
        np.testing.assert_allclose(a, steering_vector(p_minus, u, 4, 0.5, 1.0), atol=1e-12)


def test_steering_rejects_bad_arguments():
    with pytest.raises(ValueError):
        steering_vector([1.0, 1.0], [0.0, 0.0], 0, 0.5, 1.0)
    with pytest.raises(ValueError):
        steering_vector([1.0, 1.0], [0.0, 0.0], 4, -0.5, 1.0)
    with pytest.raises(ValueError):
        steering_vector([1.0, 1.0], [0.0, 0.0], 4, 0.5, 0.0)


# ---------------------------------------------------------------------------
# angle wrapping

def test_wrap_angle_range_and_passthrough():
    rng = np.random.default_rng(55)
    x = rng.uniform(-20.0, 20.0, size=300)
    w = wrap_angle(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    # already-wrapped values pass through bit-exactly
    inside = rng.uniform(-np.pi + 1e-9, np.pi, size=100)
    assert np.array_equal(wrap_angle(inside), inside)
    assert wrap_angle(np.pi) == np.pi
    assert wrap_angle(-np.pi) == np.pi
    assert wrap_angle(3.0 * np.pi) == pytest.approx(np.pi, abs=1e-12)
