"""Weighted point sets and the point families used by the sweeps."""

import math
from dataclasses import dataclass

import numpy as np

from cm_lab import rng
from cm_lab.errors import InvalidPointError
from cm_lab.spectra import ManifoldKind, as_points


FAMILIES = ("random", "lattice", "jittered", "clustered")
WEIGHT_MODES = ("uniform", "random")
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass
class WeightedPointSet:
    manifold: ManifoldKind
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = as_points(self.manifold, self.points)
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()

        if self.points.shape[0] < 1:
            raise InvalidPointError("a point set needs at least one point")
        if self.weights.size != self.points.shape[0]:
            raise InvalidPointError(f"{self.points.shape[0]} points but {self.weights.size} weights")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0.0):
            raise InvalidPointError("weights must be finite and strictly positive")

    @classmethod
    def uniform(cls, manifold, points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return cls(manifold, points, np.full(points.shape[0], 1.0 / points.shape[0]))

    @property
    def size(self):
        return self.points.shape[0]

    def scaled(self, factor):
        return WeightedPointSet(self.manifold, self.points, factor * self.weights)


def fibonacci_sphere(num_points):
    """Golden-section spiral: equal-area latitudes, azimuth advancing by the golden angle."""
    index = np.arange(num_points)
    z = 1.0 - (2.0 * index + 1.0) / num_points
    azimuth = 2.0 * np.pi * index / GOLDEN_RATIO
    radius = np.sqrt(1.0 - z * z)

    return np.column_stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z])


def rank1_lattice(dimension, num_points):
    """j * (1, g, g^2, ...) / N mod 1 with g near N / golden ratio and coprime to N."""
    if dimension == 1:
        return (np.arange(num_points) / num_points)[:, None]

    g = max(1, int(round(num_points / GOLDEN_RATIO)))
    while num_points > 1 and math.gcd(g, num_points) != 1:
        g += 1
    generator = np.array([pow(g, axis, num_points) if num_points > 1 else 0 for axis in range(dimension)])

    return np.mod(np.outer(np.arange(num_points), generator), num_points) / num_points


def random_rotation(key):
    """Uniform rotation of R^3 from a normalized Gaussian quaternion."""
    quaternion = rng.normal_values(key, (4,))
    w, x, y, z = quaternion / np.linalg.norm(quaternion)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def _lattice(manifold, num_points, key):
    if manifold.is_flat:
        shift = rng.uniform_values(key, (manifold.dimension,))
        return np.mod(rank1_lattice(manifold.dimension, num_points) + shift, 1.0)

    return fibonacci_sphere(num_points) @ random_rotation(key).T


def _jittered(manifold, num_points, key):
    lattice_key, jitter_key = rng.split(key)
    base = _lattice(manifold, num_points, lattice_key)

    if manifold.is_flat:
        cell = num_points ** (-1.0 / manifold.dimension)
        return base + cell * (rng.uniform_values(jitter_key, base.shape) - 0.5)

    spacing = math.sqrt(4.0 * math.pi / num_points)
    return base + 0.25 * spacing * rng.normal_values(jitter_key, base.shape)


def _clustered(manifold, num_points, key):
    centers_key, spread_key = rng.split(key)
    clusters = max(1, int(round(math.sqrt(num_points))))
    centers = rng.uniform_points(centers_key, manifold, clusters)

    members = centers[np.arange(num_points) % clusters]
    spread = 0.05 * num_points ** (-1.0 / manifold.dimension)
    return members + spread * rng.normal_values(spread_key, members.shape)


def family_points(manifold, family, num_points, key):
    if family == "random":
        return rng.uniform_points(key, manifold, num_points)
    if family == "lattice":
        return _lattice(manifold, num_points, key)
    if family == "jittered":
        return _jittered(manifold, num_points, key)
    if family == "clustered":
        return _clustered(manifold, num_points, key)

    raise ValueError(f"unknown point family {family!r}, expected one of {FAMILIES}")


def family_weights(mode, num_points, key):
    if mode == "uniform":
        return np.full(num_points, 1.0 / num_points)
    if mode == "random":
        weights = rng.uniform_values(key, (num_points,), 0.5, 1.5)
        return weights / np.sum(weights)

    raise ValueError(f"unknown weight mode {mode!r}, expected one of {WEIGHT_MODES}")


def generate_instance(manifold, family, num_points, weight_mode, seed, instance=0):
    """Instance ``instance`` of a family, addressed by (seed, family, instance)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown point family {family!r}, expected one of {FAMILIES}")

    key = rng.stream_key(seed, FAMILIES.index(family), instance)
    points_key, weights_key = rng.split(key)

    points = family_points(manifold, family, num_points, points_key)
    weights = family_weights(weight_mode, num_points, weights_key)
    return WeightedPointSet(manifold, points, weights)
