"""
Tests for equal-measure partitions and point bucketing.
"""

import math

import numpy as np
import pytest

from cm_lab.errors import SeedMissingError
from cm_lab.partitions import bucket_points, equal_measure_partition, verify_partition
from cm_lab.pointsets import WeightedPointSet, generate_instance
from cm_lab.spectra import ManifoldKind


def test_torus_grid_constants():
    partition = equal_measure_partition(ManifoldKind.torus(2), 16)
    assert len(partition.regions) == 16
    assert partition.c1_hat == pytest.approx(0.5, rel=1e-12)
    assert partition.c2_hat == pytest.approx(math.sqrt(2.0) / 2.0, rel=1e-12)
    assert all(region.measure == pytest.approx(1.0 / 16.0, rel=1e-12) for region in partition.regions)


@pytest.mark.parametrize("dimension, Y", [(1, 7), (2, 10), (3, 27), (4, 5)])
def test_torus_regions_have_equal_measure(dimension, Y):
    partition = equal_measure_partition(ManifoldKind.torus(dimension), Y)
    measures = np.array([region.measure for region in partition.regions])
    assert measures.size == Y
    assert np.allclose(measures, 1.0 / Y, atol=1e-12)


def test_torus_locate_matches_contains():
    partition = equal_measure_partition(ManifoldKind.torus(2), 10)
    points = np.random.default_rng(0).random((500, 2))
    labels = partition.locate(points)
    for region in partition.regions:
        assert np.array_equal(partition.contains(region, points), labels == region.index)


@pytest.mark.parametrize("Y", [25, 100, 400])
def test_sphere_regions_have_equal_measure(sphere, Y):
    partition = equal_measure_partition(sphere, Y)
    measures = np.array([region.measure for region in partition.regions])
    assert measures.size == Y
    assert np.allclose(measures, 1.0 / Y, atol=1e-9)


def test_sphere_monte_carlo_cover(sphere):
    result = verify_partition(equal_measure_partition(sphere, 25), 100_000, seed=4)
    assert result["single_claim_fraction"] == 1.0
    assert result["locate_agreement"] == 1.0
    assert result["analytic_measure_total"] == pytest.approx(1.0, abs=1e-12)
    assert result["max_measure_z"] < 5.0


def test_sphere_radius_constants_are_stable(sphere):
    partitions = [equal_measure_partition(sphere, Y) for Y in (25, 100, 400)]
    c1 = [partition.c1_hat for partition in partitions]
    c2 = [partition.c2_hat for partition in partitions]
    assert min(c1) > 0.0
    assert max(c1) <= 1.5 * min(c1)
    assert max(c2) <= 1.5 * min(c2)


def test_sphere_hemispheres(sphere):
    partition = equal_measure_partition(sphere, 2)
    labels = partition.locate([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.1]])
    assert list(labels) == [0, 1, 0]


def test_partition_sizes():
    with pytest.raises(ValueError):
        equal_measure_partition(ManifoldKind.sphere2(), 1)
    with pytest.raises(ValueError):
        equal_measure_partition(ManifoldKind.torus(2), 0)


def test_verify_needs_seed_and_samples(sphere):
    partition = equal_measure_partition(sphere, 8)
    with pytest.raises(SeedMissingError):
        verify_partition(partition, 10_000, None)
    with pytest.raises(ValueError):
        verify_partition(partition, 100, 1)


def test_buckets_are_sorted_by_weight(circle):
    pts = WeightedPointSet(circle, [[0.05], [0.1], [0.6], [0.95]], [0.1, 0.2, 0.6, 0.1])
    buckets = bucket_points(equal_measure_partition(circle, 4), pts)
    assert [bucket.region for bucket in buckets] == [2, 0, 3]
    assert [bucket.count for bucket in buckets] == [1, 2, 1]
    assert buckets[1].weight_sum == pytest.approx(0.3)


def test_bucket_counts_add_up(sphere):
    pts = generate_instance(sphere, "clustered", 60, "random", 8)
    buckets = bucket_points(equal_measure_partition(sphere, 30), pts)
    assert sum(bucket.count for bucket in buckets) == 60
    assert sum(bucket.weight_sum for bucket in buckets) == pytest.approx(1.0)
    sums = [bucket.weight_sum for bucket in buckets]
    assert sums == sorted(sums, reverse=True)
