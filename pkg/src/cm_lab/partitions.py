"""Equal-measure partitions of T^d and S^2 with ball radii, and bucketing of weighted points.

Torus regions are boxes from a recursive slab construction: the Y regions are spread over about
Y^(1/d) slabs along the first axis, each slab width proportional to the regions it holds, and each
slab is split the same way along the remaining axes. Sphere regions are two polar caps plus
zonal collars cut into equal sectors, every boundary placed where the enclosed cap area is an exact
multiple of 4 pi / Y. Membership is half-open on the increasing side; poles belong to their caps.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from cm_lab import rng
from cm_lab.errors import PointOutsideRegionsError
from cm_lab.parallel import chunked, exact_sum
from cm_lab.spectra import as_points


BOUNDARY_SAMPLES = 64
MIN_VERIFY_SAMPLES = 10_000
VERIFY_CHUNK = 50_000


@dataclass
class Region:
    index: int
    center: np.ndarray
    inner_radius: float
    outer_radius: float
    measure: float
    bounds: Dict[str, List[float]]

    def to_record(self):
        return {
            "index": self.index,
            "center": self.center.tolist(),
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
            "measure": self.measure,
            "bounds": self.bounds,
        }


@dataclass
class RegionBucket:
    region: int
    count: int
    weight_sum: float
    members: np.ndarray


@dataclass
class Partition:
    manifold: object
    Y: int
    regions: List[Region]
    locator: object = field(repr=False)

    def locate(self, points):
        """Region index of every point, -1 where no region claims it."""
        return self.locator(as_points(self.manifold, points))

    def contains(self, region, points):
        """Membership straight from the region descriptor, independent of ``locate``."""
        points = as_points(self.manifold, points)
        bounds = region.bounds

        if self.manifold.is_flat:
            lower, upper = np.array(bounds["lower"]), np.array(bounds["upper"])
            return np.all((points >= lower) & (points < upper), axis=1)

        theta, azimuth = _angles(points)
        theta_low, theta_high = bounds["theta"]
        phi_low, phi_high = bounds["phi"]
        in_band = (theta >= theta_low) & ((theta < theta_high) | (theta_high >= math.pi))

        return in_band & (azimuth >= phi_low) & (azimuth < phi_high)

    @property
    def c1_hat(self):
        return min(region.inner_radius for region in self.regions) * self.Y ** (1.0 / self.manifold.dimension)

    @property
    def c2_hat(self):
        return max(region.outer_radius for region in self.regions) * self.Y ** (1.0 / self.manifold.dimension)

    def to_record(self):
        return {
            "manifold": self.manifold.name,
            "Y": self.Y,
            "c1_hat": self.c1_hat,
            "c2_hat": self.c2_hat,
            "regions": [region.to_record() for region in self.regions],
        }


# Torus


@dataclass
class _SlabNode:
    axis: int
    edges: np.ndarray
    children: list


def _split_box(lower, upper, axis, count, boxes):
    if count == 1:
        boxes.append((lower, upper))
        return len(boxes) - 1

    remaining = lower.size - axis
    slabs = count if remaining == 1 else min(count, max(1, int(round(count ** (1.0 / remaining)))))
    base, extra = divmod(count, slabs)
    counts = [base + 1] * extra + [base] * (slabs - extra)

    # Slab widths proportional to region counts keep every box at measure 1/Y
    edges = lower[axis] + (upper[axis] - lower[axis]) * np.cumsum([0] + counts) / count
    edges[-1] = upper[axis]

    children = []
    for slab, slab_count in enumerate(counts):
        slab_lower, slab_upper = lower.copy(), upper.copy()
        slab_lower[axis], slab_upper[axis] = edges[slab], edges[slab + 1]
        children.append(_split_box(slab_lower, slab_upper, axis + 1, slab_count, boxes))

    return _SlabNode(axis, edges, children)


def _locate_in_tree(node, points, selection, labels):
    if isinstance(node, int):
        labels[selection] = node
        return

    slot = np.searchsorted(node.edges, points[selection, node.axis], side="right") - 1
    slot = np.clip(slot, 0, len(node.children) - 1)
    for child_index, child in enumerate(node.children):
        chosen = selection[slot == child_index]
        if chosen.size:
            _locate_in_tree(child, points, chosen, labels)


def _torus_partition(manifold, Y):
    dimension = manifold.dimension
    boxes = []
    tree = _split_box(np.zeros(dimension), np.ones(dimension), 0, Y, boxes)

    regions = []
    for index, (lower, upper) in enumerate(boxes):
        sides = upper - lower
        regions.append(
            Region(
                index=index,
                center=0.5 * (lower + upper),
                inner_radius=0.5 * float(np.min(sides)),
                outer_radius=0.5 * float(np.linalg.norm(sides)),
                measure=float(np.prod(sides)),
                bounds={"lower": lower.tolist(), "upper": upper.tolist()},
            )
        )

    def locator(points):
        labels = np.full(points.shape[0], -1)
        _locate_in_tree(tree, points, np.arange(points.shape[0]), labels)
        return labels

    return Partition(manifold, Y, regions, locator)


# Sphere


def _angles(points):
    theta = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
    azimuth = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * np.pi)
    azimuth[azimuth >= 2.0 * np.pi] = 0.0

    return theta, azimuth


def _unit_vector(theta, azimuth):
    return np.array([math.sin(theta) * math.cos(azimuth), math.sin(theta) * math.sin(azimuth), math.cos(theta)])


def _collar_counts(Y):
    """Regions per collar, polar caps excluded, rounded with carried remainders."""
    area = 4.0 * math.pi / Y
    cap_angle = 2.0 * math.asin(math.sqrt(area / (4.0 * math.pi)))
    collars = max(1, int(round((math.pi - 2.0 * cap_angle) / math.sqrt(area))))
    width = (math.pi - 2.0 * cap_angle) / collars

    def cap_area(theta):
        return 2.0 * math.pi * (1.0 - math.cos(theta))

    counts = []
    carry = 0.0
    for collar in range(collars):
        ideal = (cap_area(cap_angle + (collar + 1) * width) - cap_area(cap_angle + collar * width)) / area
        count = max(1, int(round(ideal + carry)))
        carry += ideal - count
        counts.append(count)

    counts[int(np.argmax(counts))] += Y - 2 - sum(counts)
    return counts


def _band_edges(Y, counts):
    """Colatitudes where the enclosed cap holds an integer number of regions."""
    cumulative = 1 + np.cumsum([0] + counts)
    return np.arccos(np.clip(1.0 - 2.0 * cumulative / Y, -1.0, 1.0))


def _max_distance(center, theta_low, theta_high, phi_low, phi_high):
    thetas = np.linspace(theta_low, theta_high, BOUNDARY_SAMPLES)
    phis = np.linspace(phi_low, phi_high, BOUNDARY_SAMPLES)
    edge = [(theta, phi) for theta in (theta_low, theta_high) for phi in phis]
    edge += [(theta, phi) for phi in (phi_low, phi_high) for theta in thetas]

    boundary = np.array([_unit_vector(theta, phi) for theta, phi in edge])
    return float(np.max(np.arccos(np.clip(boundary @ center, -1.0, 1.0))))


def _sphere_partition(manifold, Y):
    if Y == 2:
        edges = np.array([0.5 * math.pi])
        sectors = [1, 1]
    else:
        counts = _collar_counts(Y)
        edges = _band_edges(Y, counts)
        sectors = [1] + counts + [1]

    lows = np.concatenate([[0.0], edges])
    highs = np.concatenate([edges, [math.pi]])
    offsets = np.concatenate([[0], np.cumsum(sectors)])

    regions = []
    for band, sector_count in enumerate(sectors):
        theta_low, theta_high = float(lows[band]), float(highs[band])
        band_measure = 0.5 * (math.cos(theta_low) - math.cos(theta_high))
        span = 2.0 * math.pi / sector_count

        for sector in range(sector_count):
            phi_low, phi_high = sector * span, (sector + 1) * span
            if band == 0 or band == len(sectors) - 1:
                # Polar caps: the ball of radius theta_c about the pole is the cap itself
                pole = 0.0 if band == 0 else math.pi
                cap = theta_high if band == 0 else math.pi - theta_low
                center, inner, outer = _unit_vector(pole, 0.0), cap, cap
            else:
                theta_mid, phi_mid = 0.5 * (theta_low + theta_high), 0.5 * (phi_low + phi_high)
                center = _unit_vector(theta_mid, phi_mid)
                inner = min(theta_mid - theta_low, theta_high - theta_mid)
                if sector_count > 1:
                    inner = min(inner, math.asin(math.sin(theta_mid) * math.sin(min(0.5 * span, 0.5 * math.pi))))
                outer = _max_distance(center, theta_low, theta_high, phi_low, phi_high)
                antipode_theta = math.pi - theta_mid
                if sector_count == 1 and theta_low <= antipode_theta < theta_high:
                    outer = math.pi

            regions.append(
                Region(
                    index=len(regions),
                    center=center,
                    inner_radius=inner,
                    outer_radius=outer,
                    measure=band_measure / sector_count,
                    bounds={"theta": [theta_low, theta_high], "phi": [phi_low, phi_high]},
                )
            )
    sector_counts = np.array(sectors)

    def locator(points):
        theta, azimuth = _angles(points)
        band = np.searchsorted(edges, theta, side="right")
        count = sector_counts[band]
        sector = np.minimum(np.floor(azimuth * count / (2.0 * math.pi)).astype(int), count - 1)
        return offsets[band] + sector

    return Partition(manifold, Y, regions, locator)


def equal_measure_partition(manifold, Y):
    Y = int(Y)
    if manifold.is_flat:
        if Y < 1:
            raise ValueError("torus partitions need Y >= 1")
        return _torus_partition(manifold, Y)

    if Y < 2:
        raise ValueError("sphere partitions need Y >= 2")
    return _sphere_partition(manifold, Y)


def bucket_points(partition, pts):
    """Nonempty regions with their point counts K_r and weight sums S_r, S_r nonincreasing."""
    labels = partition.locate(pts.points)
    if np.any(labels < 0):
        raise PointOutsideRegionsError(f"{int(np.sum(labels < 0))} points fall outside every region")

    buckets = []
    for region in np.unique(labels):
        members = np.flatnonzero(labels == region)
        buckets.append(RegionBucket(int(region), int(members.size), exact_sum(pts.weights[members]), members))

    buckets.sort(key=lambda bucket: (-bucket.weight_sum, bucket.region))
    return buckets


def verify_partition(partition, mc_samples, seed):
    """Monte Carlo check of disjoint cover and equal measure, plus the radius constants."""
    seed = rng.require_seed(seed)
    if mc_samples < MIN_VERIFY_SAMPLES:
        raise ValueError(f"verification needs at least {MIN_VERIFY_SAMPLES} samples")

    hits = np.zeros(partition.Y)
    single_claims = 0
    located_agree = 0
    for chunk_index, (start, stop) in enumerate(chunked(mc_samples, VERIFY_CHUNK)):
        samples = rng.uniform_points(rng.stream_key(seed, chunk_index), partition.manifold, stop - start)
        claims = np.zeros(stop - start, dtype=int)
        claimed_by = np.full(stop - start, -1)
        for region in partition.regions:
            inside = partition.contains(region, samples)
            claims += inside
            claimed_by[inside] = region.index
            hits[region.index] += np.count_nonzero(inside)

        single_claims += int(np.count_nonzero(claims == 1))
        located_agree += int(np.count_nonzero((claims == 1) & (partition.locate(samples) == claimed_by)))

    share = 1.0 / partition.Y
    sigma = math.sqrt(share * (1.0 - share) / mc_samples)
    z_scores = np.abs(hits / mc_samples - share) / sigma if sigma > 0.0 else np.zeros(partition.Y)
    measures = np.array([region.measure for region in partition.regions])

    return {
        "manifold": partition.manifold.name,
        "Y": partition.Y,
        "samples": int(mc_samples),
        "seed": seed,
        "single_claim_fraction": single_claims / mc_samples,
        "locate_agreement": located_agree / mc_samples,
        "measure_errors": (hits / mc_samples - share).tolist(),
        "max_measure_z": float(np.max(z_scores)),
        "max_analytic_measure_error": float(np.max(np.abs(measures - share))),
        "analytic_measure_total": exact_sum(measures),
        "c1_hat": partition.c1_hat,
        "c2_hat": partition.c2_hat,
    }
