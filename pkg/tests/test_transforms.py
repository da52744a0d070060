"""
Tests for the radial Fourier and cosine transforms, transplantation and the E_nu identity.
"""

import math

import numpy as np
import pytest

from cm_lab.errors import OrderOutOfRangeError, UnsupportedDimensionError
from cm_lab.integration import fixed_rule
from cm_lab.kernels import normalized_bump
from cm_lab.profiles import FunctionProfile, GaussianProfile, IndicatorProfile
from cm_lab.special import bessel_first_zero
from cm_lab.transforms import (
    CosineTransformProfile,
    TransformProfile,
    bandlimited_inverse_cosine,
    cosine_transform,
    fourier_radial,
    fourier_radial_on_rule,
    inverse_cosine_transform,
    transplant,
    transplant_constant,
    transplant_constant_closed_form,
    transplant_lhs,
    verify_enu_identity,
)


RHO = np.linspace(0.0, 2.0, 50)


@pytest.mark.parametrize("dimension", [1, 2, 3, 4])
def test_gaussian_is_self_dual(dimension):
    values = fourier_radial(GaussianProfile(dimension), RHO)
    assert np.allclose(values, np.exp(-math.pi * RHO**2), atol=1e-8)


def test_indicator_on_the_line():
    assert fourier_radial(IndicatorProfile(1), 0.0) == pytest.approx(2.0, rel=1e-12)
    assert fourier_radial(IndicatorProfile(1), 0.25) == pytest.approx(4.0 / math.pi, rel=1e-10)


def test_indicator_mass_in_three_dimensions():
    assert fourier_radial(IndicatorProfile(3), 0.0) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_hankel_round_trip():
    once = TransformProfile(GaussianProfile(2))
    twice = fourier_radial(once, np.array([0.0, 0.4, 0.9]))
    assert np.allclose(twice, np.exp(-math.pi * np.array([0.0, 0.4, 0.9]) ** 2), atol=1e-6)


@pytest.fixture(scope="module")
def psi_transform():
    """F_2 psi on a dense frequency rule over [0, 60], where (F_2 psi)^2 has decayed below 1e-16."""
    psi = normalized_bump(2)
    nodes, weights = fixed_rule(0.0, 60.0, max_panel=0.25, order=16)
    return psi, nodes, weights, fourier_radial(psi, nodes)


def test_bump_transform_on_a_dense_grid(psi_transform):
    psi, nodes, _, values = psi_transform
    fine_nodes, fine_weights = fixed_rule(0.0, psi.support_radius, max_panel=psi.support_radius / 1024, order=24)
    reference = fourier_radial_on_rule(2, fine_nodes, fine_weights, psi(fine_nodes), nodes)

    assert np.all(np.isfinite(values))
    assert np.allclose(values, reference, atol=1e-9)
    assert values[0] > 0.0


def test_bump_hankel_round_trip(psi_transform):
    psi, nodes, weights, values = psi_transform
    r = np.linspace(0.0, 0.6, 25)
    twice = fourier_radial_on_rule(2, nodes, weights, values, r)
    assert np.max(np.abs(twice - psi(r))) <= 1e-5


class TestCosineTransform:
    def test_indicator_gives_sinc(self):
        t = np.array([0.5, 1.0, 3.0, 10.0, 25.0])
        assert np.allclose(cosine_transform(IndicatorProfile(1), t), np.sin(t) / t, atol=1e-10)

    def test_half_of_the_line_transform(self):
        psi = normalized_bump(1)
        t = np.array([0.0, 1.0, 4.0, 12.0, 40.0])
        assert np.allclose(cosine_transform(psi, t), 0.5 * fourier_radial(psi, t / (2.0 * math.pi)), atol=1e-8)

    def test_inverse_undoes_the_bump_transform(self):
        psi = normalized_bump(1)
        s = np.array([0.0, 0.1, 0.25, 0.4, 0.49])
        assert np.allclose(inverse_cosine_transform(CosineTransformProfile(psi), s), psi(s), atol=1e-6)


@pytest.mark.parametrize("d, d_prime", [(2, 1), (3, 1), (3, 2)])
def test_transplant_of_a_compact_profile(d, d_prime):
    psi = normalized_bump(d)
    assert transplant(psi, d_prime, psi.support_radius) == 0.0
    assert np.all(transplant(psi, d_prime, np.array([0.6, 1.0])) == 0.0)
    assert np.all(transplant(psi, d_prime, np.linspace(0.0, 0.49, 8)) >= 0.0)


def test_cosine_transform_of_gaussian():
    t = np.array([0.0, 0.5, 2.0, 5.0])
    values = cosine_transform(GaussianProfile(1), t)
    assert np.allclose(values, 0.5 * np.exp(-(t**2) / (4.0 * math.pi)), atol=1e-12)


def test_bandlimited_inverse_cosine():
    """C^-1 of exp(-t^2) is exp(-s^2 / 4) / sqrt(pi)."""
    profile = FunctionProfile(1, lambda t: np.exp(-t * t), name="gaussian_line", effective_radius=8.0)
    s = np.array([0.0, 0.5, 1.0, 3.0])
    values = bandlimited_inverse_cosine(profile, s, bandwidth=20.0)
    assert np.allclose(values, np.exp(-(s**2) / 4.0) / math.sqrt(math.pi), atol=1e-12)


def test_transforms_reject_negative_arguments():
    with pytest.raises(ValueError):
        fourier_radial(GaussianProfile(2), -1.0)


@pytest.mark.parametrize("d, d_prime", [(2, 1), (3, 1), (3, 2), (4, 1)])
def test_transplant_constant_matches_closed_form(d, d_prime):
    assert transplant_constant(d, d_prime) == pytest.approx(transplant_constant_closed_form(d, d_prime), rel=1e-6)


@pytest.mark.parametrize("d, d_prime", [(2, 1), (3, 1), (3, 2)])
def test_transplant_on_gaussians(d, d_prime):
    s = np.linspace(0.05, 1.4, 10)
    assert np.allclose(transplant(GaussianProfile(d), d_prime, s), np.exp(-math.pi * s**2), atol=1e-6)


def test_transplant_lhs_agrees_off_calibration_point():
    gaussian = GaussianProfile(3)
    assert transplant_lhs(gaussian, 2, 0.8) == pytest.approx(transplant(gaussian, 2, 0.8), rel=1e-5)


def test_transplant_dimension_order():
    with pytest.raises(UnsupportedDimensionError):
        transplant_constant(2, 2)
    with pytest.raises(UnsupportedDimensionError):
        transplant_constant(5, 1)


@pytest.mark.parametrize(
    "d, nu, z_abs, s",
    [
        (3, 1.2, 1.0, 2.0),
        (3, 1.2, 0.5, 4.0),
        (3, 1.2, 2.0, 3.0),
        (3, 1.2, 4.0, 5.0),
        (2, 0.75, 1.0, 1.0),
        (2, 0.75, 0.3, 5.0),
        (2, 0.75, 2.0, 7.0),
    ],
)
def test_enu_identity_in_the_strip(d, nu, z_abs, s):
    result = verify_enu_identity(d, nu, z_abs, s)
    assert result["abs_err"] <= 1e-3 * max(abs(result["rhs"]), result["scale"])


def test_enu_identity_rejects_orders_outside_the_strip():
    with pytest.raises(OrderOutOfRangeError):
        verify_enu_identity(3, 0.9, 1.0, 1.0)
    with pytest.raises(ValueError):
        verify_enu_identity(3, 1.2, 20.0, 6.0)


@pytest.mark.parametrize("d, nu", [(3, 1.2), (2, 0.75)])
def test_enu_identity_vanishes_at_a_bessel_zero(d, nu):
    s = 2.0
    zero = bessel_first_zero(-nu + d / 2.0 - 1.0)
    result = verify_enu_identity(d, nu, zero / s, s)
    assert abs(result["rhs"]) <= 1e-8 * result["scale"]
    assert abs(result["lhs"]) <= 1e-4 * result["scale"]
