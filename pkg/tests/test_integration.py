"""
Tests for panel quadrature, the endpoint substitution and alternating-tail acceleration.
"""

import math

import numpy as np
import pytest
from scipy import special as scipy_special

from cm_lab.errors import QuadratureError
from cm_lab.integration import (
    adaptive_quad,
    algebraic_endpoint,
    alternating_tail,
    euler_average,
    fixed_rule,
    panel_edges,
)


def test_panel_edges_cover_interval():
    edges = panel_edges(0.0, 1.0, 0.3)
    assert edges[0] == 0.0 and edges[-1] == 1.0
    assert len(edges) == 5
    assert np.all(np.diff(edges) <= 0.3)


def test_fixed_rule_integrates_polynomials():
    nodes, weights = fixed_rule(0.0, 2.0, max_panel=0.5, order=8)
    assert np.dot(weights, nodes**7) == pytest.approx(2.0**8 / 8.0, rel=1e-14)


def test_adaptive_quad_scalar_and_batched():
    assert adaptive_quad(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-13)

    def both(t):
        return np.stack([np.sin(t), np.cos(t)])

    values = adaptive_quad(both, 0.0, 0.5 * math.pi)
    assert np.allclose(values, [1.0, 1.0], atol=1e-13)


def test_adaptive_quad_empty_interval():
    assert adaptive_quad(np.exp, 1.0, 1.0) == 0.0


def test_adaptive_quad_gives_up_on_jumps():
    def step(t):
        return np.where(t < 1.0 / 3.0, 0.0, 1.0)

    with pytest.raises(QuadratureError):
        adaptive_quad(step, 0.0, 1.0, max_depth=2)


def test_adaptive_quad_settles_at_the_noise_floor():
    """A tolerance below the integrand's own noise still terminates, at the noise level."""

    def noisy(t):
        return np.cos(t) + 1e-11 * np.sin(1e7 * t)

    assert adaptive_quad(noisy, 0.0, 10.0, rtol=1e-14) == pytest.approx(math.sin(10.0), abs=1e-9)


def test_adaptive_quad_bounds_the_panel_count():
    def square_wave(t):
        return np.where(np.sin(1e4 * t) > 0.0, 1.0, -1.0)

    with pytest.raises(QuadratureError):
        adaptive_quad(square_wave, 0.0, 10.0)


def test_algebraic_endpoint():
    assert algebraic_endpoint(np.ones_like, 0.0, 1.0, 0.5) == pytest.approx(2.0, rel=1e-13)

    # integral of t^(-1/2) cos(t) over [0, 1] through the Fresnel cosine integral
    _, fresnel_c = scipy_special.fresnel(math.sqrt(2.0 / math.pi))
    expected = math.sqrt(2.0 * math.pi) * fresnel_c
    assert algebraic_endpoint(np.cos, 0.0, 1.0, 0.5) == pytest.approx(expected, rel=1e-12)


def test_euler_average_sums_alternating_harmonic_series():
    terms = [(-1.0) ** k / (k + 1.0) for k in range(40)]
    assert euler_average(np.cumsum(terms), rounds=24) == pytest.approx(math.log(2.0), abs=1e-8)


def test_alternating_tail_of_sine_integral():
    value, segments = alternating_tail(lambda t: np.sin(t) / t, math.pi, math.pi)
    sine_integral, _ = scipy_special.sici(math.pi)
    assert value == pytest.approx(0.5 * math.pi - sine_integral, abs=1e-8)
    assert segments >= 48
