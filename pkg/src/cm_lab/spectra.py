"""Explicit Laplace-Beltrami spectra on flat tori, the circle and the 2-sphere.

Frequencies are stored as lambda_m, the square root of the Laplace eigenvalue. Eigenfunctions are
real and orthonormal for the normalized measure (mu(M) = 1).
"""

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from cm_lab.errors import InvalidPointError, LabelMismatchError, UnsupportedDimensionError


MAX_TORUS_DIMENSION = 4


@dataclass(frozen=True)
class ManifoldKind:
    kind: str
    dimension: int

    @classmethod
    def torus(cls, dimension):
        return cls("torus", int(dimension))

    @classmethod
    def circle(cls):
        return cls("circle", 1)

    @classmethod
    def sphere2(cls):
        return cls("sphere2", 2)

    @classmethod
    def parse(cls, text):
        name, _, arg = text.strip().lower().partition(":")
        if name == "torus":
            if not arg.isdigit() or int(arg) < 1:
                raise UnsupportedDimensionError(f"bad torus dimension in {text!r}")
            return cls.torus(int(arg))
        if name == "circle":
            return cls.circle()
        if name in ("sphere2", "sphere"):
            return cls.sphere2()

        raise UnsupportedDimensionError(f"unknown manifold {text!r}")

    @property
    def is_flat(self):
        return self.kind in ("torus", "circle")

    @property
    def coord_dim(self):
        return self.dimension if self.is_flat else 3

    @property
    def name(self):
        if self.kind == "torus":
            return f"torus:{self.dimension}"
        return self.kind

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TorusLabel:
    k: Tuple[int, ...]
    part: str  # const, cos or sin


@dataclass(frozen=True)
class SphereLabel:
    degree: int
    order: int
    part: str  # zonal, cos or sin


@dataclass(frozen=True)
class EigenPair:
    index: int
    frequency: float
    label: object


def _check_supported(manifold):
    if manifold.is_flat and not 1 <= manifold.dimension <= MAX_TORUS_DIMENSION:
        raise UnsupportedDimensionError(
            f"torus dimension {manifold.dimension} not supported (max {MAX_TORUS_DIMENSION})",
        )


def as_points(manifold, coords):
    """Validate chart coordinates: torus coordinates reduced mod 1, sphere vectors normalized."""
    points = np.atleast_2d(np.asarray(coords, dtype=np.float64))

    if points.shape[-1] != manifold.coord_dim:
        raise InvalidPointError(f"{manifold} points need {manifold.coord_dim} coordinates, got {points.shape[-1]}")
    if not np.all(np.isfinite(points)):
        raise InvalidPointError("point coordinates must be finite")

    if manifold.is_flat:
        points = np.mod(points, 1.0)
        # mod can round 1 - tiny up to exactly 1.0
        points[points >= 1.0] = 0.0
        return points

    norms = np.linalg.norm(points, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise InvalidPointError("sphere points must be nonzero vectors")

    return points / norms


# Torus


def _positive_representatives(dimension, radius):
    """Frequency vectors k != 0 with |k| <= radius, one per {k, -k}, in canonical order."""
    reps = []
    bound = radius * radius
    for k in itertools.product(range(-radius, radius + 1), repeat=dimension):
        norm2 = sum(c * c for c in k)
        if norm2 == 0 or norm2 > bound:
            continue
        first = next(c for c in k if c != 0)
        if first > 0:
            reps.append((norm2, k))

    reps.sort()
    return reps


def _torus_pairs(dimension, reps, limit=None):
    pairs = [EigenPair(0, 0.0, TorusLabel((0,) * dimension, "const"))]
    for norm2, k in reps:
        frequency = 2.0 * math.pi * math.sqrt(norm2)
        for part in ("cos", "sin"):
            if limit is not None and len(pairs) >= limit:
                return pairs
            pairs.append(EigenPair(len(pairs), frequency, TorusLabel(k, part)))

    return pairs


def _torus_spectrum(dimension, count):
    radius = 1
    while True:
        reps = _positive_representatives(dimension, radius)
        if 1 + 2 * len(reps) >= count:
            return _torus_pairs(dimension, reps, limit=count)
        radius *= 2


# Sphere


def _sphere_block(degree, start):
    frequency = math.sqrt(degree * (degree + 1))
    pairs = []
    for order in range(-degree, degree + 1):
        part = "sin" if order < 0 else ("zonal" if order == 0 else "cos")
        pairs.append(EigenPair(start + len(pairs), frequency, SphereLabel(degree, abs(order), part)))

    return pairs


def _sphere_spectrum(count):
    pairs = []
    degree = 0
    while len(pairs) < count:
        pairs.extend(_sphere_block(degree, len(pairs)))
        degree += 1

    return pairs[:count]


@functools.lru_cache(maxsize=64)
def _cached_spectrum(manifold, count):
    if manifold.is_flat:
        return tuple(_torus_spectrum(manifold.dimension, count))

    return tuple(_sphere_spectrum(count))


def enumerate_spectrum(manifold, count):
    """First ``count`` eigenpairs in nondecreasing frequency with deterministic tie-breaking.

    Torus: k sorted by (|k|^2, lexicographic), the positive member of each {k, -k} pair, cos before
    sin. Sphere: by degree l, then order m' from -l to l (sine part, zonal, cosine part).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    _check_supported(manifold)

    # Circle and torus:1 share one cache entry so their spectra are identical objects
    if manifold.kind == "circle":
        manifold = ManifoldKind.torus(1)

    return _cached_spectrum(manifold, int(count))


def spectrum_within(manifold, bound, inclusive=False):
    _check_supported(manifold)

    def keep(frequency):
        return frequency <= bound if inclusive else frequency < bound

    if manifold.is_flat:
        radius = int(math.floor(bound / (2.0 * math.pi))) + 1
        reps = _positive_representatives(manifold.dimension, radius)
        return tuple(pair for pair in _torus_pairs(manifold.dimension, reps) if keep(pair.frequency))

    pairs = []
    degree = 0
    while keep(math.sqrt(degree * (degree + 1))):
        pairs.extend(_sphere_block(degree, len(pairs)))
        degree += 1

    return tuple(pairs)


def spectrum_below(manifold, bound):
    return spectrum_within(manifold, bound, inclusive=False)


# Evaluation


def _check_labels(manifold, spectrum):
    for pair in spectrum:
        if manifold.is_flat:
            if not isinstance(pair.label, TorusLabel) or len(pair.label.k) != manifold.dimension:
                raise LabelMismatchError(f"eigenpair {pair.index} does not belong to {manifold}")
        elif not isinstance(pair.label, SphereLabel):
            raise LabelMismatchError(f"eigenpair {pair.index} does not belong to {manifold}")


def _torus_basis(spectrum, points):
    ks = np.array([pair.label.k for pair in spectrum], dtype=np.float64)
    phases = 2.0 * np.pi * (ks @ points.T)

    parts = np.array([pair.label.part for pair in spectrum])
    values = np.ones((len(spectrum), points.shape[0]))
    values[parts == "cos"] = np.sqrt(2.0) * np.cos(phases[parts == "cos"])
    values[parts == "sin"] = np.sqrt(2.0) * np.sin(phases[parts == "sin"])

    return values


def normalized_legendre(max_degree, orders, cos_theta, sin_theta):
    """Fully normalized associated Legendre functions, upward recurrence in the degree.

    Returns ``{(l, m): values}`` for every m in ``orders`` and m <= l <= max_degree, normalized so that
    (1/2) * integral over [-1, 1] of P_lm^2 equals 1.
    """
    table = {}
    p_mm = np.ones_like(cos_theta)
    for m in range(max(orders) + 1):
        if m > 0:
            p_mm = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta * p_mm
        if m not in orders or m > max_degree:
            continue

        table[(m, m)] = p_mm
        if m + 1 > max_degree:
            continue

        prev, curr = p_mm, np.sqrt(2.0 * m + 3.0) * cos_theta * p_mm
        table[(m + 1, m)] = curr
        for degree in range(m + 2, max_degree + 1):
            a = np.sqrt((4.0 * degree * degree - 1.0) / (degree * degree - m * m))
            b = np.sqrt(((degree - 1.0) ** 2 - m * m) / (4.0 * (degree - 1.0) ** 2 - 1.0))
            prev, curr = curr, a * (cos_theta * curr - b * prev)
            table[(degree, m)] = curr

    return table


def _sphere_basis(spectrum, points):
    cos_theta = np.clip(points[:, 2], -1.0, 1.0)
    sin_theta = np.hypot(points[:, 0], points[:, 1])
    azimuth = np.arctan2(points[:, 1], points[:, 0])

    max_degree = max(pair.label.degree for pair in spectrum)
    orders = {pair.label.order for pair in spectrum}
    legendre = normalized_legendre(max_degree, orders, cos_theta, sin_theta)

    values = np.empty((len(spectrum), points.shape[0]))
    for row, pair in enumerate(spectrum):
        label = pair.label
        p_lm = legendre[(label.degree, label.order)]
        if label.part == "zonal":
            values[row] = p_lm
        elif label.part == "cos":
            values[row] = np.sqrt(2.0) * p_lm * np.cos(label.order * azimuth)
        else:
            values[row] = np.sqrt(2.0) * p_lm * np.sin(label.order * azimuth)

    return values


def eval_basis(manifold, spectrum, points):
    """Matrix of eigenfunction values, shape (len(spectrum), number of points)."""
    spectrum = list(spectrum)
    _check_labels(manifold, spectrum)
    points = as_points(manifold, points)

    if manifold.is_flat:
        return _torus_basis(spectrum, points)

    return _sphere_basis(spectrum, points)


def eval_eigenfunction(manifold, pair, x):
    return float(eval_basis(manifold, [pair], x)[0, 0])


def geodesic_distance(manifold, x, y):
    x, y = as_points(manifold, x), as_points(manifold, y)

    if manifold.is_flat:
        diff = x - y
        diff -= np.round(diff)
        distance = np.linalg.norm(diff, axis=-1)
    else:
        distance = np.arccos(np.clip(np.sum(x * y, axis=-1), -1.0, 1.0))

    return float(distance[0]) if distance.size == 1 else distance


def weyl_constant(manifold):
    """Leading constant c in #{lambda_m <= T} ~ c T^d."""
    if manifold.is_flat:
        d = manifold.dimension
        ball_volume = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return ball_volume / (2.0 * math.pi) ** d

    return 1.0


def weyl_counting_check(manifold, bound):
    if bound < 1.0:
        raise ValueError("Weyl check needs T >= 1")

    count = len(spectrum_within(manifold, bound, inclusive=True))
    ratio = count / bound**manifold.dimension

    return {"count": count, "ratio": ratio, "weyl_constant": weyl_constant(manifold)}


def _grid_points(manifold, resolution):
    if not manifold.is_flat:
        theta = np.linspace(0.0, np.pi, resolution)
        azimuth = np.linspace(0.0, 2.0 * np.pi, 2 * resolution, endpoint=False)
        theta, azimuth = np.meshgrid(theta, azimuth, indexing="ij")
        yield np.stack(
            [np.sin(theta) * np.cos(azimuth), np.sin(theta) * np.sin(azimuth), np.cos(theta)],
            axis=-1,
        ).reshape(-1, 3)
        return

    axis = np.arange(resolution) / resolution
    rest = manifold.dimension - 1
    # One slab per first coordinate keeps torus:4 grids in memory
    tail = np.stack(np.meshgrid(*([axis] * rest), indexing="ij"), axis=-1).reshape(-1, rest) if rest else None
    for first in axis:
        if tail is None:
            yield np.array([[first]])
        else:
            yield np.column_stack([np.full(tail.shape[0], first), tail])


def sup_norm_sanity(manifold, pair, grid_resolution):
    """Max of |phi_m| on a grid; compare against C (1 + lambda_m)^((d - 1) / 2)."""
    if grid_resolution < 64:
        raise ValueError("grid_resolution must be at least 64")

    peak = 0.0
    for points in _grid_points(manifold, grid_resolution):
        peak = max(peak, float(np.max(np.abs(eval_basis(manifold, [pair], points)))))

    return peak
