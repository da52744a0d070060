"""Radial profiles f(|x|) on R^d, closed form or sampled on a uniform grid."""

import copy
import math

import numpy as np
from scipy.interpolate import CubicSpline


class RadialProfile:
    """Radial function of r >= 0, identically zero beyond ``support_radius``.

    ``effective_radius`` bounds the integration range of profiles with unbounded support, and
    ``transform_radius`` is where the d-dimensional Fourier transform of the profile is negligible.
    """

    name = "profile"

    def __init__(self, dimension, support_radius=math.inf, effective_radius=None, transform_radius=None):
        if dimension < 1:
            raise ValueError("profile dimension must be positive")

        self.dimension = int(dimension)
        self.support_radius = float(support_radius)
        self.effective_radius = effective_radius
        self.transform_radius = transform_radius

    def _evaluate(self, r):
        raise NotImplementedError

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        flat = np.atleast_1d(r)

        values = np.zeros(flat.shape)
        inside = flat <= self.support_radius
        if np.any(inside):
            values[inside] = self._evaluate(flat[inside])

        return float(values[0]) if r.ndim == 0 else values.reshape(r.shape)

    @property
    def compact(self):
        return math.isfinite(self.support_radius)

    @property
    def integration_radius(self):
        if self.compact:
            return self.support_radius
        if self.effective_radius is None:
            raise ValueError(f"{self.name} profile has neither finite support nor an effective radius")

        return float(self.effective_radius)

    def with_dimension(self, dimension):
        clone = copy.copy(self)
        clone.dimension = int(dimension)
        return clone

    def describe(self):
        return {
            "name": self.name,
            "dimension": self.dimension,
            "support_radius": self.support_radius if self.compact else None,
            "effective_radius": self.effective_radius,
        }


class BumpProfile(RadialProfile):
    """scale * exp(-1 / (1 - (r / radius)^2)) for r < radius."""

    name = "bump"

    def __init__(self, dimension, radius=0.5, scale=1.0):
        super().__init__(dimension, support_radius=radius, transform_radius=60.0 / radius)
        self.radius = float(radius)
        self.scale = float(scale)

    def _evaluate(self, r):
        gap = 1.0 - (r / self.radius) ** 2
        values = np.zeros_like(r)
        positive = gap > 0.0
        values[positive] = self.scale * np.exp(-1.0 / gap[positive])
        return values

    def describe(self):
        return {**super().describe(), "radius": self.radius, "scale": self.scale}


class GaussianProfile(RadialProfile):
    """exp(-pi r^2), its own Fourier transform in every dimension."""

    name = "gaussian"

    def __init__(self, dimension):
        super().__init__(dimension, effective_radius=6.0, transform_radius=6.0)

    def _evaluate(self, r):
        return np.exp(-np.pi * r * r)


class IndicatorProfile(RadialProfile):
    name = "indicator"

    def __init__(self, dimension, radius=1.0):
        super().__init__(dimension, support_radius=radius)

    def _evaluate(self, r):
        return np.ones_like(r)


def smoothstep(x):
    """C-infinity step from 0 (x <= 0) to 1 (x >= 1) built on exp(-1/x)."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        rise = np.where(x > 0.0, np.exp(-1.0 / x), 0.0)
        fall = np.where(x < 1.0, np.exp(-1.0 / (1.0 - x)), 0.0)

    return rise / (rise + fall)


class PlateauProfile(RadialProfile):
    """Equal to 1 on [0, inner], smoothly decreasing to 0 at ``outer``."""

    name = "plateau"

    def __init__(self, dimension, inner, outer):
        if not 0.0 < inner < outer:
            raise ValueError("plateau needs 0 < inner < outer")

        super().__init__(dimension, support_radius=outer)
        self.inner = float(inner)
        self.outer = float(outer)

    def _evaluate(self, r):
        return smoothstep((self.outer - r) / (self.outer - self.inner))

    def describe(self):
        return {**super().describe(), "inner": self.inner, "outer": self.outer}


class FunctionProfile(RadialProfile):
    def __init__(self, dimension, fn, name="function", **kwargs):
        super().__init__(dimension, **kwargs)
        self.fn = fn
        self.name = name

    def _evaluate(self, r):
        return np.asarray(self.fn(r), dtype=np.float64)


class ScaledProfile(RadialProfile):
    """amplitude * base(r / scale)."""

    def __init__(self, base, scale, amplitude=1.0):
        effective = None if base.effective_radius is None else base.effective_radius * scale
        super().__init__(base.dimension, support_radius=base.support_radius * scale, effective_radius=effective)
        self.base = base
        self.scale = float(scale)
        self.amplitude = float(amplitude)
        self.name = f"scaled_{base.name}"

    def _evaluate(self, r):
        return self.amplitude * self.base(r / self.scale)

    def describe(self):
        return {**super().describe(), "base": self.base.describe(), "scale": self.scale, "amplitude": self.amplitude}


class SampledProfile(RadialProfile):
    """Cubic spline through samples at r_k = k * step, zero beyond the last sample."""

    name = "sampled"

    def __init__(self, dimension, step, values, support_radius=math.inf, name=None):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 4:
            raise ValueError("a sampled profile needs at least four samples")

        extent = step * (values.size - 1)
        if math.isfinite(support_radius) and step > support_radius / 512.0:
            raise ValueError(f"grid step {step} too coarse for support radius {support_radius}")

        super().__init__(dimension, support_radius=min(support_radius, extent), effective_radius=extent)
        self.step = float(step)
        self.extent = extent
        self.values = values
        if name is not None:
            self.name = name

        grid = self.step * np.arange(values.size)
        # Smooth radial functions are even in r
        self.spline = CubicSpline(grid, values, bc_type=((1, 0.0), "not-a-knot"))

    @classmethod
    def from_function(cls, dimension, fn, extent, step, support_radius=math.inf, name=None):
        count = int(round(extent / step))
        grid = step * np.arange(count + 1)
        return cls(dimension, step, fn(grid), support_radius=support_radius, name=name)

    def _evaluate(self, r):
        values = self.spline(np.minimum(r, self.extent))
        values[r > self.extent] = 0.0
        return values

    def describe(self):
        return {**super().describe(), "step": self.step, "extent": self.extent, "samples": int(self.values.size)}
