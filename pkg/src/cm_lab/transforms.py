"""Radial Fourier (Hankel) and cosine transforms, transplantation between dimensions, and the E_nu check.

Conventions: F_d f(rho) = integral over R^d of f(|x|) exp(-2 pi i x.xi) dx at |xi| = rho, which for
radial f equals (2 pi)^(d/2) * integral of f(s) J_nu(2 pi rho s) / (2 pi rho s)^nu s^(d-1) ds with
nu = (d - 2) / 2. C f(t) is the integral of f(s) cos(st) over [0, inf) and C^-1 g(s) = (2 / pi) C g(s).
"""

import functools
import math

import numpy as np

from cm_lab import integration
from cm_lab.errors import OrderOutOfRangeError, QuadratureError, UnsupportedDimensionError
from cm_lab.parallel import parallel_map
from cm_lab.profiles import GaussianProfile, RadialProfile
from cm_lab.special import bessel_j_scaled


BLOCK_SIZE = 64
PANELS_PER_SUPPORT = 64
TRANSPLANT_CALIBRATION_POINT = 0.3


def _as_arguments(values):
    values = np.asarray(values, dtype=np.float64)
    flat = np.atleast_1d(values).ravel()
    if np.any(flat < 0.0) or not np.all(np.isfinite(flat)):
        raise ValueError("transform arguments must be finite and nonnegative")

    return values, flat


def _blocked_transform(profile, points, kernel, quarter_period, rtol):
    """Integrate profile(s) * kernel(points, s) over the profile's radius, blockwise in the points.

    Points are sorted and processed in blocks; each block uses panels no longer than a quarter
    oscillation at its largest point, nor than 1/64 of the integration radius.
    """
    values, flat = _as_arguments(points)
    radius = profile.integration_radius
    order = np.argsort(flat, kind="stable")

    def run_block(start):
        block = flat[order[start : start + BLOCK_SIZE]]
        max_panel = radius / PANELS_PER_SUPPORT
        if block[-1] > 0.0:
            max_panel = min(max_panel, quarter_period(block[-1]))

        def integrand(s):
            return profile(s)[None, :] * kernel(block[:, None], s[None, :])

        return integration.adaptive_quad(integrand, 0.0, radius, max_panel=max_panel, rtol=rtol)

    results = parallel_map(run_block, range(0, flat.size, BLOCK_SIZE))
    out = np.empty(flat.size)
    out[order] = np.concatenate(results)

    return float(out[0]) if values.ndim == 0 else out.reshape(values.shape)


def fourier_radial(profile, rho, rtol=1e-12):
    """F_d of a radial profile at rho >= 0, where d = profile.dimension.

    At rho = 0 the kernel tends to its limit, giving omega_{d-1} * integral of f(s) s^(d-1) ds.
    """
    d = profile.dimension
    nu = (d - 2) / 2.0
    prefactor = (2.0 * math.pi) ** (d / 2.0)

    def kernel(rho_block, s):
        return prefactor * s ** (d - 1) * bessel_j_scaled(nu, 2.0 * math.pi * rho_block * s)

    return _blocked_transform(profile, rho, kernel, lambda top: 1.0 / (4.0 * top), rtol)


def fourier_radial_on_rule(dimension, nodes, weights, values, rho):
    """F_d from precomputed profile values at fixed quadrature nodes, as one matrix product."""
    nu = (dimension - 2) / 2.0
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    prefactor = (2.0 * math.pi) ** (dimension / 2.0)

    weighted = prefactor * weights * values * nodes ** (dimension - 1)
    rows = [
        bessel_j_scaled(nu, 2.0 * math.pi * rho[start : start + BLOCK_SIZE, None] * nodes[None, :]) @ weighted
        for start in range(0, rho.size, BLOCK_SIZE)
    ]

    return np.concatenate(rows)


def cosine_transform(profile, t, rtol=1e-12):
    """C f(t) = integral of f(s) cos(st) ds over [0, inf)."""

    def kernel(t_block, s):
        return np.cos(t_block * s)

    return _blocked_transform(profile, t, kernel, lambda top: math.pi / (2.0 * top), rtol)


def bandlimited_inverse_cosine(profile, s, bandwidth, tail_tol=1e-13, block=256, max_samples=1 << 16):
    """C^-1 f(s) by the trapezoid rule for f whose line restriction is band-limited to ``bandwidth``.

    With step h and 2 pi / h > bandwidth + s the rule is alias-free, so the only error left is the
    truncation of the sample range, which is extended until f stays below tail_tol of its peak.
    """
    values, flat = _as_arguments(s)
    step = math.pi / (bandwidth + float(np.max(flat)))

    samples = [np.atleast_1d(profile(step * np.arange(block)))]
    peak = float(np.max(np.abs(samples[0])))
    quiet = 0
    while quiet < 2:
        if block * len(samples) >= max_samples:
            raise QuadratureError(f"{profile.name} did not decay below {tail_tol} of its peak within {max_samples} samples")

        start = block * len(samples)
        samples.append(np.atleast_1d(profile(step * np.arange(start, start + block))))
        peak = max(peak, float(np.max(np.abs(samples[-1]))))
        quiet = quiet + 1 if np.max(np.abs(samples[-1])) <= tail_tol * peak else 0

    sampled = np.concatenate(samples)
    weights = np.full(sampled.size, 2.0)
    weights[0] = 1.0
    nodes = step * np.arange(sampled.size)

    out = step / math.pi * (np.cos(np.outer(flat, nodes)) @ (weights * sampled))
    return float(out[0]) if values.ndim == 0 else out.reshape(values.shape)


def inverse_cosine_transform(profile, s, rtol=1e-12):
    """C^-1 f(s) = (2 / pi) * integral of f(t) cos(st) dt over [0, inf)."""
    bandwidth = getattr(profile, "bandwidth", None)
    if bandwidth is not None:
        return bandlimited_inverse_cosine(profile, s, bandwidth)

    return 2.0 / math.pi * cosine_transform(profile, s, rtol)


class TransformProfile(RadialProfile):
    """F_d of ``source``, computed in the source's dimension and evaluated on demand.

    ``with_dimension`` changes how the result is read (for transplantation), not the transform.
    """

    def __init__(self, source, effective_radius=None, rtol=1e-12):
        super().__init__(
            source.dimension,
            effective_radius=effective_radius or source.transform_radius,
            transform_radius=source.integration_radius,
        )
        self.source = source
        self.rtol = rtol
        self.name = f"fourier_{source.name}"
        # Angular bandwidth of the restriction to a line
        self.bandwidth = 2.0 * math.pi * source.support_radius if source.compact else None

    def _evaluate(self, r):
        return fourier_radial(self.source, r, self.rtol)

    def describe(self):
        return {**super().describe(), "source": self.source.describe(), "transform_dimension": self.source.dimension}


class CosineTransformProfile(RadialProfile):
    """C f, an even profile on the line."""

    def __init__(self, source, rtol=1e-12):
        super().__init__(1, transform_radius=source.integration_radius)
        self.source = source
        self.rtol = rtol
        self.name = f"cosine_{source.name}"
        self.bandwidth = source.support_radius if source.compact else None

    def _evaluate(self, t):
        return cosine_transform(self.source, t, self.rtol)


# Transplantation


def _check_transplant_dimensions(d, d_prime):
    if not 1 <= d_prime < d <= 4:
        raise UnsupportedDimensionError(f"transplantation needs 1 <= d' < d <= 4, got d={d}, d'={d_prime}")


def transplant_lhs(g, d_prime, s):
    """F_{d'}(F_d g)(s), both transforms computed directly."""
    _check_transplant_dimensions(g.dimension, d_prime)
    return fourier_radial(TransformProfile(g).with_dimension(d_prime), s)


def transplant_integral(g, d_prime, s):
    """Integral of (r^2 - s^2)^(beta - 1) r g(r) over r > s, with beta = (d - d') / 2."""
    _check_transplant_dimensions(g.dimension, d_prime)
    beta = (g.dimension - d_prime) / 2.0
    radius = g.integration_radius
    s = float(s)
    if s >= radius:
        return 0.0

    if beta < 1.0:
        # (r - s)^(beta - 1) is singular at r = s; the rest stays smooth
        def smooth_part(r):
            return (r + s) ** (beta - 1.0) * r * g(r)

        span = (radius - s) ** beta
        return integration.algebraic_endpoint(
            smooth_part,
            s,
            radius,
            beta,
            max_panel=span / PANELS_PER_SUPPORT,
        )

    def integrand(r):
        return (r * r - s * s) ** (beta - 1.0) * r * g(r)

    return integration.adaptive_quad(integrand, s, radius, max_panel=(radius - s) / PANELS_PER_SUPPORT)


def transplant_constant_closed_form(d, d_prime):
    beta = (d - d_prime) / 2.0
    return 2.0 * math.pi**beta / math.gamma(beta)


@functools.lru_cache(maxsize=None)
def transplant_constant(d, d_prime):
    """c_{d,d'} calibrated once on a Gaussian at a single point, then frozen."""
    _check_transplant_dimensions(d, d_prime)
    gaussian = GaussianProfile(d)
    s = TRANSPLANT_CALIBRATION_POINT

    return transplant_lhs(gaussian, d_prime, s) / transplant_integral(gaussian, d_prime, s)


def transplant(g, d_prime, s):
    """Right-hand side of the transplantation identity, c_{d,d'} times the radial integral."""
    constant = transplant_constant(g.dimension, d_prime)
    s = np.asarray(s, dtype=np.float64)
    values = np.array([constant * transplant_integral(g, d_prime, value) for value in np.atleast_1d(s).ravel()])

    return float(values[0]) if s.ndim == 0 else values.reshape(s.shape)


# E_nu identity


def verify_enu_identity(d, nu, z_abs, s):
    """Compare the oscillatory integral side of the E_nu transform identity with its Bessel side."""
    if not (d - 1) / 2.0 < nu < d / 2.0:
        raise OrderOutOfRangeError(f"nu must lie strictly between {(d - 1) / 2} and {d / 2}, got {nu}")
    if z_abs <= 0.0 or s <= 0.0:
        raise ValueError("z_abs and s must be positive")
    if s * z_abs > 100.0:
        raise ValueError("s * z_abs must not exceed 100")

    alpha = nu + (1.0 - d) / 2.0
    order = -nu + d / 2.0 - 1.0
    half_period = math.pi / s

    # First zero of cos(st) beyond z_abs
    first_zero = (math.floor(z_abs * s / math.pi - 0.5) + 1.5) * half_period

    def near_part(t):
        return t * (t + z_abs) ** (alpha - 1.0) * np.cos(s * t)

    def tail_part(t):
        return t * (t * t - z_abs * z_abs) ** (alpha - 1.0) * np.cos(s * t)

    near = integration.algebraic_endpoint(near_part, z_abs, first_zero, alpha)
    tail, segments = integration.alternating_tail(tail_part, first_zero, half_period)

    prefactor = 2.0 ** (-2.0 * nu + 1.0) / (math.pi ** ((d + 1) / 2.0) * math.gamma(alpha))
    lhs = prefactor * (near + tail)
    rhs = (
        math.pi ** (-d / 2.0)
        * 2.0 ** (-nu - d / 2.0)
        * s ** (-2.0 * nu - 1.0 + d)
        * bessel_j_scaled(order, s * z_abs)
    )

    return {
        "d": d,
        "nu": nu,
        "z_abs": z_abs,
        "s": s,
        "lhs": lhs,
        "rhs": rhs,
        "abs_err": abs(lhs - rhs),
        "rel_err": abs(lhs - rhs) / max(abs(rhs), 1e-300),
        "scale": abs(prefactor * near),
        "segments": segments,
    }
