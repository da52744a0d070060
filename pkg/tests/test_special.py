"""
Tests for the Bessel function evaluator against scipy and closed forms.
"""

import math

import numpy as np
import pytest
from scipy import special as scipy_special

from cm_lab.errors import OrderOutOfRangeError
from cm_lab.special import bessel_first_zero, bessel_j, bessel_j_scaled, bessel_zero, unit_sphere_area


ARGUMENTS = np.concatenate([np.linspace(0.0, 14.0, 57), np.linspace(14.5, 120.0, 40)])


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.7, 2.5, 4.0, 6.0])
def test_matches_scipy(nu):
    assert np.allclose(bessel_j(nu, ARGUMENTS), scipy_special.jv(nu, ARGUMENTS), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("nu", [-0.5, -0.25, -0.75])
def test_negative_fractional_orders_match_scipy(nu):
    x = ARGUMENTS[1:]
    assert np.allclose(bessel_j(nu, x), scipy_special.jv(nu, x), rtol=1e-10, atol=1e-10)


def test_half_integer_closed_forms():
    x = np.linspace(0.1, 40.0, 200)
    assert np.allclose(bessel_j(0.5, x), np.sqrt(2.0 / (np.pi * x)) * np.sin(x), atol=1e-12)
    assert np.allclose(bessel_j(-0.5, x), np.sqrt(2.0 / (np.pi * x)) * np.cos(x), atol=1e-12)


def test_negative_integer_order_reflection():
    x = np.linspace(0.0, 30.0, 61)
    assert np.allclose(bessel_j(-1.0, x), -scipy_special.jv(1.0, x), atol=1e-10)


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 2.0, 6.0])
def test_scaled_value_at_zero(nu):
    assert bessel_j_scaled(nu, 0.0) == pytest.approx(1.0 / (2.0**nu * math.gamma(nu + 1.0)), rel=1e-14)


def test_scaled_matches_ratio():
    x = np.linspace(0.5, 60.0, 120)
    for nu in (0.0, 1.5, 3.0):
        assert np.allclose(bessel_j_scaled(nu, x), scipy_special.jv(nu, x) / x**nu, rtol=1e-9, atol=1e-12)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_j(1.0, 2.0), float)
    assert bessel_j(1.0, np.ones((2, 3))).shape == (2, 3)


def test_first_zero_of_j0():
    assert bessel_first_zero(0.0) == pytest.approx(2.404825557695773, abs=1e-10)
    assert bessel_zero(1.0, 3.0, 4.5) == pytest.approx(3.831705970207512, abs=1e-10)


def test_domain_errors():
    with pytest.raises(OrderOutOfRangeError):
        bessel_j(6.5, 1.0)
    with pytest.raises(OrderOutOfRangeError):
        bessel_j(-0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_j(1.0, -1.0)


def test_unit_sphere_area():
    assert unit_sphere_area(1) == pytest.approx(2.0)
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi)
