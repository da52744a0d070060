"""The kernel chain psi -> H -> H_tilde used to minorize the spectral functional.

psi is an L2-normalized bump supported in [0, 1/2], H = F_d^-1[(F_d psi)^2] is supported in
[0, 1] with H(0) = 1, phi is a plateau equal to 1 on [0, eps/4pi] and supported in [0, eps/2pi],
and H_tilde is defined through its transform F_d H_tilde = lambda_X^d F_d H(lambda_X .) phi.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from cm_lab import integration
from cm_lab.errors import NormalizationError, UnsupportedDimensionError
from cm_lab.profiles import BumpProfile, FunctionProfile, PlateauProfile, RadialProfile, SampledProfile
from cm_lab.special import unit_sphere_area
from cm_lab.transforms import TransformProfile, fourier_radial, fourier_radial_on_rule, inverse_cosine_transform


BUMP_RADIUS = 0.5
# (F_d psi)^2 is below 1e-16 of its peak beyond this frequency
FOURIER_H_RADIUS = 60.0
H_STEP = 1.0 / 1024.0
LOCAL_SAMPLES = 4096
NORMALIZATION_TOL = 1e-8


@dataclass(frozen=True)
class KernelSuite:
    dimension: int
    epsilon: float
    lambda_X: float
    psi: RadialProfile
    fourier_psi: RadialProfile
    H: RadialProfile
    fourier_H: RadialProfile
    phi: RadialProfile
    eta: RadialProfile
    fourier_H_tilde: RadialProfile
    H_tilde: RadialProfile

    def describe(self):
        return {
            "dimension": self.dimension,
            "epsilon": self.epsilon,
            "lambda_X": self.lambda_X,
            "psi": self.psi.describe(),
            "H": self.H.describe(),
            "phi": self.phi.describe(),
            "fourier_H_tilde": self.fourier_H_tilde.describe(),
        }


def _radial_norm2(dimension, profile):
    def integrand(r):
        return profile(r) ** 2 * r ** (dimension - 1)

    mass = integration.adaptive_quad(integrand, 0.0, profile.integration_radius, max_panel=profile.integration_radius / 64)
    return unit_sphere_area(dimension) * mass


def normalized_bump(dimension):
    """The bump exp(-1 / (1 - 4r^2)) on r < 1/2, scaled to unit L2 norm in R^dimension."""
    scale = 1.0 / math.sqrt(_radial_norm2(dimension, BumpProfile(dimension, BUMP_RADIUS)))
    psi = BumpProfile(dimension, BUMP_RADIUS, scale)

    norm = math.sqrt(_radial_norm2(dimension, psi))
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"bump norm {norm!r} after calibration in dimension {dimension}")

    return psi


@functools.lru_cache(maxsize=4)
def _base_kernels(dimension):
    """psi and the sampled H, which do not depend on lambda_X or epsilon."""
    psi = normalized_bump(dimension)
    return psi, _sample_H(dimension, psi)


def _sample_H(dimension, psi):
    # Quarter-period panels for r <= 1
    nodes, weights = integration.fixed_rule(0.0, FOURIER_H_RADIUS, max_panel=0.25, order=16)
    fourier_psi = fourier_radial(psi, nodes)

    grid = H_STEP * np.arange(int(round(1.0 / H_STEP)) + 1)
    values = fourier_radial_on_rule(dimension, nodes, weights, fourier_psi**2, grid)

    return SampledProfile(dimension, H_STEP, values, support_radius=1.0, name="H")


@functools.lru_cache(maxsize=16)
def build_kernel_suite(dimension, lambda_X, epsilon=0.5):
    if not 1 <= dimension <= 4:
        raise UnsupportedDimensionError(f"kernel suites exist for dimensions 1..4, got {dimension}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    if lambda_X <= 0.0:
        raise ValueError("lambda_X must be positive")

    psi, H = _base_kernels(dimension)
    fourier_psi = TransformProfile(psi)
    fourier_H = FunctionProfile(
        dimension,
        lambda rho: fourier_psi(rho) ** 2,
        name="fourier_H",
        effective_radius=FOURIER_H_RADIUS,
        transform_radius=1.0,
    )
    phi = PlateauProfile(dimension, epsilon / (4.0 * math.pi), epsilon / (2.0 * math.pi))
    eta = TransformProfile(phi)

    # F_d H is only needed on [0, lambda_X * eps / 2pi] here, so sample it there finely
    top = lambda_X * phi.outer
    local_fourier_H = SampledProfile.from_function(
        dimension,
        lambda rho: fourier_radial(psi, rho) ** 2,
        top,
        top / LOCAL_SAMPLES,
        name="fourier_H_local",
    )
    scale = lambda_X**dimension

    def fourier_H_tilde_values(rho):
        return scale * local_fourier_H(lambda_X * rho) * phi(rho)

    fourier_H_tilde = FunctionProfile(
        dimension,
        fourier_H_tilde_values,
        name="fourier_H_tilde",
        support_radius=phi.outer,
    )
    H_tilde = TransformProfile(fourier_H_tilde)
    H_tilde.name = "H_tilde"

    return KernelSuite(
        dimension=dimension,
        epsilon=float(epsilon),
        lambda_X=float(lambda_X),
        psi=psi,
        fourier_psi=fourier_psi,
        H=H,
        fourier_H=fourier_H,
        phi=phi,
        eta=eta,
        fourier_H_tilde=fourier_H_tilde,
        H_tilde=H_tilde,
    )


def default_grid(epsilon, points=401):
    grid = np.linspace(0.0, 4.0 * epsilon, points)
    return np.union1d(grid, [epsilon, 2.0 * epsilon])


def verify_support_lemma(suite, grid=None):
    """Support and sign of C^-1 H_tilde: zero beyond epsilon, nonnegative on [0, epsilon].

    Both figures are relative to the peak of C^-1 H_tilde on the grid.
    """
    grid = default_grid(suite.epsilon) if grid is None else np.sort(np.asarray(grid, dtype=np.float64))
    if grid[0] > 0.0 or grid[-1] < 4.0 * suite.epsilon * (1.0 - 1e-12):
        raise ValueError(f"grid must cover [0, {4.0 * suite.epsilon}]")

    values = inverse_cosine_transform(suite.H_tilde, grid)
    peak = float(np.max(values))

    inside = grid <= suite.epsilon
    lowest = float(np.min(values[inside]))
    tail = np.abs(values[~inside])

    return {
        "peak": peak,
        "max_violation_neg": max(0.0, -lowest) / peak,
        "max_tail": float(np.max(tail)) / peak if tail.size else 0.0,
        "grid_points": int(grid.size),
        "grid": grid,
        "values": values,
    }


def omega0_surrogate(suite, distances):
    """(2 / (2 pi)^d) lambda_X^d F_d H(lambda_X D / 2pi) F_d eta(D / 2pi), with F_d eta = phi."""
    d = suite.dimension
    rho = np.asarray(distances, dtype=np.float64) / (2.0 * math.pi)
    prefactor = 2.0 / (2.0 * math.pi) ** d * suite.lambda_X**d

    return prefactor * suite.fourier_H(suite.lambda_X * rho) * suite.phi(rho)


def kernel_chain_residual(suite, rho):
    """Largest gap between F_d H_tilde and lambda_X^d F_d H(lambda_X rho) phi(rho) on the given points."""
    rho = np.asarray(rho, dtype=np.float64)
    direct = suite.lambda_X**suite.dimension * suite.fourier_H(suite.lambda_X * rho) * suite.phi(rho)

    return float(np.max(np.abs(suite.fourier_H_tilde(rho) - direct)))
