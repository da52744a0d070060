"""
Tests for the torus and sphere spectra and their eigenfunctions.
"""

import math

import numpy as np
import pytest

from cm_lab.errors import InvalidPointError, LabelMismatchError, UnsupportedDimensionError
from cm_lab.quadrature import sphere_product_rule, trapezoid_rule
from cm_lab.spectra import (
    ManifoldKind,
    as_points,
    enumerate_spectrum,
    eval_basis,
    geodesic_distance,
    spectrum_below,
    spectrum_within,
    sup_norm_sanity,
    weyl_counting_check,
)


def test_circle_spectrum_starts_with_constant_then_cos_sin(circle):
    spectrum = enumerate_spectrum(circle, 5)
    assert spectrum[0].frequency == 0.0
    assert [pair.label.k for pair in spectrum[1:]] == [(1,), (1,), (2,), (2,)]
    assert [pair.label.part for pair in spectrum[1:]] == ["cos", "sin", "cos", "sin"]
    assert np.isclose(spectrum[3].frequency, 4.0 * math.pi)


def test_circle_and_torus1_agree():
    assert enumerate_spectrum(ManifoldKind.circle(), 40) == enumerate_spectrum(ManifoldKind.torus(1), 40)


@pytest.mark.parametrize("manifold", [ManifoldKind.torus(2), ManifoldKind.torus(3), ManifoldKind.sphere2()])
def test_frequencies_are_nondecreasing(manifold):
    frequencies = [pair.frequency for pair in enumerate_spectrum(manifold, 200)]
    assert all(a <= b for a, b in zip(frequencies, frequencies[1:]))
    assert [pair.index for pair in enumerate_spectrum(manifold, 200)] == list(range(200))


def test_sphere_degree_blocks(sphere):
    spectrum = enumerate_spectrum(sphere, 16)
    degrees = [pair.label.degree for pair in spectrum]
    assert degrees == [0] + [1] * 3 + [2] * 5 + [3] * 7
    assert [pair.label.part for pair in spectrum[4:9]] == ["sin", "sin", "zonal", "cos", "cos"]
    assert np.isclose(spectrum[5].frequency, math.sqrt(6.0))


def test_spectrum_below_is_strict(circle):
    bound = 4.0 * math.pi
    assert len(spectrum_below(circle, bound)) == 3
    assert len(spectrum_within(circle, bound, inclusive=True)) == 5


def test_torus_orthonormality_on_grid():
    manifold = ManifoldKind.torus(2)
    rule = trapezoid_rule(32, dimension=2)
    basis = eval_basis(manifold, enumerate_spectrum(manifold, 20), rule.nodes)
    gram = (basis * rule.weights) @ basis.T
    assert np.allclose(gram, np.eye(20), atol=1e-12)


def test_sphere_orthonormality_with_product_rule(sphere):
    rule = sphere_product_rule(8)
    basis = eval_basis(sphere, enumerate_spectrum(sphere, 25), rule.nodes)
    gram = (basis * rule.weights) @ basis.T
    assert np.allclose(gram, np.eye(25), atol=1e-12)


@pytest.mark.parametrize("degree", [1, 4, 9])
def test_sphere_addition_theorem(sphere, degree):
    """Sum of squares over one degree block is 2l + 1 at every point."""
    points = as_points(sphere, [[0.3, -0.2, 0.9], [0.0, 0.0, -1.0], [1.0, 2.0, 0.5]])
    spectrum = enumerate_spectrum(sphere, (degree + 1) ** 2)[degree * degree :]
    block = eval_basis(sphere, spectrum, points)
    assert np.allclose(np.sum(block**2, axis=0), 2 * degree + 1, rtol=1e-12)


def test_as_points_reduces_and_normalizes(circle, sphere):
    assert np.allclose(as_points(circle, [[1.25], [-0.25]]), [[0.25], [0.75]])
    assert np.allclose(as_points(sphere, [[0.0, 0.0, 2.0]]), [[0.0, 0.0, 1.0]])
    with pytest.raises(InvalidPointError):
        as_points(sphere, [[0.0, 1.0]])
    with pytest.raises(InvalidPointError):
        as_points(sphere, [[0.0, 0.0, 0.0]])
    with pytest.raises(InvalidPointError):
        as_points(circle, [[math.nan]])


def test_unsupported_manifolds():
    with pytest.raises(UnsupportedDimensionError):
        ManifoldKind.parse("klein")
    with pytest.raises(UnsupportedDimensionError):
        enumerate_spectrum(ManifoldKind.parse("torus:5"), 3)


def test_labels_must_match_manifold(circle, sphere):
    with pytest.raises(LabelMismatchError):
        eval_basis(sphere, enumerate_spectrum(circle, 3), [[0.0, 0.0, 1.0]])


def test_geodesic_distance_wraps(circle, sphere):
    assert np.isclose(geodesic_distance(circle, [0.9], [0.1]), 0.2)
    assert np.isclose(geodesic_distance(sphere, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]), math.pi)


def test_weyl_counting(sphere):
    torus = ManifoldKind.torus(2)
    check = weyl_counting_check(torus, 400.0)
    assert check["ratio"] == pytest.approx(check["weyl_constant"], rel=0.05)

    check = weyl_counting_check(sphere, 100.0)
    assert check["count"] == 100 * 100
    assert check["ratio"] == pytest.approx(1.0)


def test_sup_norm_of_zonal_harmonic(sphere):
    zonal = enumerate_spectrum(sphere, 25)[20]
    assert zonal.label.part == "zonal" and zonal.label.degree == 4
    assert sup_norm_sanity(sphere, zonal, 64) == pytest.approx(3.0, rel=1e-12)

    with pytest.raises(ValueError):
        sup_norm_sanity(sphere, zonal, 16)
