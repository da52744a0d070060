"""The spectral functional S = sum over m <= X of |sum_j a_j phi_m(x_j)|^2 and its companions."""

import functools
import itertools
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from tqdm import tqdm

from cm_lab import rng
from cm_lab.errors import LatticeBoundError, OverflowScaleWarning, UnsupportedDimensionError
from cm_lab.parallel import chunked, exact_sum, parallel_map
from cm_lab.partitions import bucket_points, equal_measure_partition
from cm_lab.pointsets import FAMILIES, generate_instance
from cm_lab.spectra import ManifoldKind, as_points, enumerate_spectrum, eval_basis, spectrum_below


OVERFLOW_SCALE = 1e300
MAX_ORACLE_DIMENSION = 3
MAX_ORACLE_RADIUS = 60.0
# Upper bound on basis-matrix entries held at once
BASIS_BUDGET = 1 << 22


@dataclass
class BoundReport:
    manifold: str
    X: int
    N: int
    S: float
    sum_w: float
    sum_w2: float
    lower_trivial: float
    ratio: Optional[float]
    truncation: str = "index"
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @property
    def lower_trivial_ratio(self):
        return lower_trivial_ratio(self)

    @property
    def upper_reference(self):
        """X * sum a_j^2 + (sum a_j)^2, the expectation over uniform random points."""
        return self.X * self.sum_w2 + self.lower_trivial

    def to_record(self):
        return {**asdict(self), "lower_trivial_ratio": self.lower_trivial_ratio}


def spectral_coefficients(manifold, spectrum, points, weights):
    """sum_j a_j phi_m(x_j) for every eigenpair in ``spectrum``, in spectrum order."""
    spectrum = list(spectrum)
    chunk = max(1, min(256, BASIS_BUDGET // max(1, len(weights))))

    def run(bounds):
        start, stop = bounds
        return eval_basis(manifold, spectrum[start:stop], points) @ weights

    return np.concatenate(parallel_map(run, chunked(len(spectrum), chunk)))


def _report(pts, X, S, truncation="index", seed=None, meta=None):
    if abs(S) > OVERFLOW_SCALE:
        warnings.warn(f"spectral sum {S:.3e} is beyond the overflow scale", OverflowScaleWarning, stacklevel=3)

    sum_w = exact_sum(pts.weights)
    sum_w2 = exact_sum(pts.weights**2)
    return BoundReport(
        manifold=pts.manifold.name,
        X=int(X),
        N=pts.size,
        S=S,
        sum_w=sum_w,
        sum_w2=sum_w2,
        lower_trivial=sum_w * sum_w,
        ratio=S / (X * sum_w2) if X >= 1 else None,
        truncation=truncation,
        seed=seed,
        meta=meta or {},
    )


def spectral_sum(pts, X, seed=None):
    """S for eigenpairs 0..X, truncated at index X (multiplicities may be split)."""
    if X < 0:
        raise ValueError("X must be nonnegative")

    spectrum = enumerate_spectrum(pts.manifold, X + 1)
    coefficients = spectral_coefficients(pts.manifold, spectrum, pts.points, pts.weights)

    return _report(pts, X, exact_sum(coefficients**2), seed=seed)


def lambda_for_index(manifold, X):
    frequency = enumerate_spectrum(manifold, X + 1)[X].frequency
    if frequency <= 0.0:
        raise ValueError("lambda_X must be positive, take X >= 1")

    return frequency


def _check_suite(manifold, suite):
    if suite.dimension != manifold.dimension:
        raise UnsupportedDimensionError(f"kernel suite of dimension {suite.dimension} used on {manifold}")


def smoothed_sum(pts, suite):
    """sum over lambda_m < lambda_X of H(lambda_m / lambda_X) |sum_j a_j phi_m(x_j)|^2."""
    _check_suite(pts.manifold, suite)

    spectrum = spectrum_below(pts.manifold, suite.lambda_X)
    frequencies = np.array([pair.frequency for pair in spectrum])
    coefficients = spectral_coefficients(pts.manifold, spectrum, pts.points, pts.weights)

    return exact_sum(suite.H(frequencies / suite.lambda_X) * coefficients**2)


@functools.lru_cache(maxsize=8)
def _lattice_ball(dimension, radius):
    bound = int(math.floor(radius))
    ks = np.array(list(itertools.product(range(-bound, bound + 1), repeat=dimension)), dtype=np.float64)
    ks = ks[np.sum(ks * ks, axis=1) < radius * radius]
    ks.flags.writeable = False

    return ks


def torus_kernel_oracle(d, suite, x, y):
    """F_X(x, y) = sum over k in Z^d of H(2 pi |k| / lambda_X) cos(2 pi k.(x - y)), by lattice enumeration."""
    if d > MAX_ORACLE_DIMENSION or d != suite.dimension:
        raise UnsupportedDimensionError(f"the lattice oracle needs d <= {MAX_ORACLE_DIMENSION} matching the suite")

    radius = suite.lambda_X / (2.0 * math.pi)
    if radius > MAX_ORACLE_RADIUS:
        raise LatticeBoundError(f"lambda_X / 2pi = {radius:.3f} exceeds the enumeration bound {MAX_ORACLE_RADIUS}")

    ks = _lattice_ball(d, radius)
    torus = ManifoldKind.torus(d)
    diff = as_points(torus, x)[0] - as_points(torus, y)[0]

    weights = suite.H(2.0 * math.pi * np.linalg.norm(ks, axis=1) / suite.lambda_X)
    return exact_sum(weights * np.cos(2.0 * math.pi * (ks @ diff)))


def torus_kernel_double_sum(pts, suite):
    d = pts.manifold.dimension
    terms = [
        pts.weights[j] * pts.weights[i] * torus_kernel_oracle(d, suite, pts.points[j], pts.points[i])
        for j in range(pts.size)
        for i in range(pts.size)
    ]

    return exact_sum(terms)


def expectation_mc(manifold, X, weights, trials, seed, progress=False):
    """Monte Carlo mean of sum over m = 1..X of |sum_j a_j phi_m(x_j)|^2 for i.i.d. uniform points.

    The exact expectation is X * sum a_j^2; the minimum over trials witnesses a configuration at or
    below the mean.
    """
    seed = rng.require_seed(seed)
    if trials < 100:
        raise ValueError("expectation_mc needs at least 100 trials")
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if weights.size < 1 or np.any(weights <= 0.0):
        raise ValueError("weights must be strictly positive")

    num_points = weights.size
    values = np.zeros(trials)
    if X >= 1:
        spectrum = enumerate_spectrum(manifold, X + 1)[1:]
        chunk = max(1, min(trials, BASIS_BUDGET // (X * num_points)))

        for start, stop in tqdm(chunked(trials, chunk), disable=not progress):
            points = rng.batched_uniform_points(seed, manifold, num_points, start, stop)
            flat = points.reshape(-1, points.shape[-1])
            basis = eval_basis(manifold, spectrum, flat).reshape(X, stop - start, num_points)
            values[start:stop] = np.sum((basis @ weights) ** 2, axis=0)

    mean = exact_sum(values) / trials
    variance = exact_sum((values - mean) ** 2) / (trials - 1)

    return {
        "manifold": manifold.name,
        "X": int(X),
        "N": int(num_points),
        "trials": int(trials),
        "seed": seed,
        "mean": mean,
        "std_err": math.sqrt(variance / trials),
        "target": X * exact_sum(weights**2),
        "min": float(np.min(values)),
    }


def grouped_bound(pts, partition, X):
    """S against X * sum_r S_r^2, with S_r the weight in region r of an equal-measure partition."""
    report = spectral_sum(pts, X)
    buckets = bucket_points(partition, pts)
    grouped = exact_sum([bucket.weight_sum**2 for bucket in buckets])

    return {
        "X": int(X),
        "Y": partition.Y,
        "S": report.S,
        "grouped_sum": grouped,
        "ratio": report.S / (X * grouped) if X >= 1 else None,
        "occupied_regions": sum(1 for bucket in buckets if bucket.count),
    }


def lower_trivial_ratio(report):
    """(sum a_j)^2 / (X sum a_j^2), the share of the bound that the m = 0 term alone guarantees."""
    if report.X < 1:
        return None

    return report.lower_trivial / (report.X * report.sum_w2)


@dataclass
class SweepResult:
    rows: list
    summary: list
    c_hat: float
    config: dict

    def to_record(self):
        return asdict(self)


def empirical_constant_sweep(
    manifold,
    families,
    X_list,
    num_points,
    instances,
    weight_mode="uniform",
    seed=None,
    kappa=None,
    progress=False,
):
    """Minimum over instances of S / (X sum a_j^2) per (family, X); the global minimum is the empirical C."""
    seed = rng.require_seed(seed)
    families = list(families)
    if not families:
        raise ValueError("at least one point family is required")
    unknown = [family for family in families if family not in FAMILIES]
    if unknown:
        raise ValueError(f"unknown point families {unknown}, expected some of {FAMILIES}")

    X_list = sorted({int(X) for X in X_list})
    if not X_list or X_list[0] < 1:
        raise ValueError("X values must be positive")

    spectrum = enumerate_spectrum(manifold, X_list[-1] + 1)
    partitions = {X: equal_measure_partition(manifold, kappa * X) for X in X_list} if kappa else {}

    rows = []
    jobs = [(family, instance) for family in families for instance in range(instances)]
    for family, instance in tqdm(jobs, disable=not progress):
        pts = generate_instance(manifold, family, num_points, weight_mode, seed, instance)
        squares = spectral_coefficients(manifold, spectrum, pts.points, pts.weights) ** 2

        for X in X_list:
            report = _report(pts, X, exact_sum(squares[: X + 1]), seed=seed)
            row = {
                "family": family,
                "X": X,
                "instance": instance,
                "S": report.S,
                "ratio": report.ratio,
                "N": report.N,
                "sum_w": report.sum_w,
                "sum_w2": report.sum_w2,
                "lower_trivial": report.lower_trivial,
                "S_over_upper": report.S / report.upper_reference,
                "lower_trivial_ratio": report.lower_trivial_ratio,
            }
            if kappa:
                buckets = bucket_points(partitions[X], pts)
                grouped = exact_sum([bucket.weight_sum**2 for bucket in buckets])
                row["grouped_ratio"] = report.S / (X * grouped)
            rows.append(row)

    rows.sort(key=lambda row: (row["X"], families.index(row["family"]), row["instance"]))

    summary = []
    for X in X_list:
        for family in families:
            group = [row for row in rows if row["X"] == X and row["family"] == family]
            ratios = [row["ratio"] for row in group]
            summary.append(
                {
                    "family": family,
                    "X": X,
                    "instances": len(group),
                    "min_ratio": min(ratios),
                    "mean_ratio": exact_sum(ratios) / len(ratios),
                    "min_S_over_upper": min(row["S_over_upper"] for row in group),
                }
            )

    config = {
        "manifold": manifold.name,
        "families": families,
        "X_list": X_list,
        "N": num_points,
        "instances": instances,
        "weight_mode": weight_mode,
        "seed": seed,
        "kappa": kappa,
    }
    return SweepResult(rows=rows, summary=summary, c_hat=min(entry["min_ratio"] for entry in summary), config=config)
