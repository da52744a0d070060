"""Gauss-Legendre panel quadrature.

Integrands are vectorized: ``fn(nodes)`` takes a 1D array of abscissae and returns an array whose
last axis matches the nodes, so one pass integrates a whole batch (for instance many transform
arguments at once).
"""

import functools
import math

import numpy as np

from cm_lab.errors import AccelerationDivergenceError, QuadratureError


MAX_DEPTH = 20
MAX_PANELS = 1 << 13
# Panels whose error has stopped shrinking are accepted below this share of the integral of |fn|
STALL_RTOL = 1e-7
ROUNDOFF = 64.0 * np.finfo(np.float64).eps


@functools.lru_cache(maxsize=16)
def gauss_legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False

    return nodes, weights


def panel_edges(a, b, max_panel=None):
    count = 1 if not max_panel else max(1, int(math.ceil((b - a) / max_panel)))
    edges = np.linspace(a, b, count + 1)
    edges[-1] = b

    return edges


def fixed_rule(a, b, max_panel=None, order=16):
    edges = panel_edges(a, b, max_panel)
    nodes, weights = gauss_legendre(order)

    half = 0.5 * np.diff(edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    points = centers[:, None] + half[:, None] * nodes[None, :]

    return points.ravel(), (half[:, None] * weights[None, :]).ravel()


def _panel_sums(fn, lo, hi, order, magnitudes=False):
    nodes, weights = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    points = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]

    values = np.asarray(fn(points.ravel()), dtype=np.float64)
    values = values.reshape(values.shape[:-1] + points.shape)

    sums = (values @ weights) * half
    if not magnitudes:
        return sums

    return sums, (np.abs(values) @ weights) * half


def _finish(total):
    return float(total) if np.ndim(total) == 0 else total


def adaptive_quad(fn, a, b, max_panel=None, rtol=1e-12, atol=0.0, order=16, max_depth=MAX_DEPTH):
    """Integrate fn over [a, b] on panels of length <= max_panel.

    A panel is accepted when its n-point estimate and the sum over its two halves agree to within
    its share (by length) of rtol times the integral of |fn|, or to within the roundoff of its own
    absolute integral. Once halving stops reducing that disagreement for two levels running, the
    panel sits at the noise floor of fn and is accepted if it is within STALL_RTOL of its share.
    """
    if b <= a:
        return _finish(np.zeros(np.shape(fn(np.array([a])))[:-1]))

    edges = panel_edges(a, b, max_panel)
    lo, hi = edges[:-1], edges[1:]
    length = b - a
    parent = grandparent = np.full(lo.size, np.inf)

    total = scale = None
    for _ in range(max_depth + 1):
        count = lo.size
        if count > MAX_PANELS:
            raise QuadratureError(f"panel refinement on [{a}, {b}] needs more than {MAX_PANELS} panels")

        mid = 0.5 * (lo + hi)
        sums, magnitudes = _panel_sums(
            fn, np.concatenate([lo, lo, mid]), np.concatenate([hi, mid, hi]), order, magnitudes=True
        )
        whole = sums[..., :count]
        halves = sums[..., count : 2 * count] + sums[..., 2 * count :]
        magnitude = magnitudes[..., count : 2 * count] + magnitudes[..., 2 * count :]

        if scale is None:
            scale = np.sum(magnitude, axis=-1)
            total = np.zeros_like(scale)

        share = np.maximum(np.expand_dims(scale, -1) * ((hi - lo) / length), np.finfo(np.float64).tiny)
        error = np.abs(halves - whole)
        met = error <= np.maximum(atol + rtol * share, ROUNDOFF * magnitude)

        ratio = np.max((error / share).reshape(-1, count), axis=0)
        stalled = (ratio <= STALL_RTOL) & (ratio > 0.25 * parent) & (parent > 0.25 * grandparent)
        done = np.all(met.reshape(-1, count), axis=0) | stalled

        total = total + np.sum(halves[..., done], axis=-1)
        if np.all(done):
            return _finish(total)

        keep = ~done
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        grandparent = np.tile(parent[keep], 2)
        parent = np.tile(ratio[keep], 2)

    raise QuadratureError(f"panel refinement on [{a}, {b}] exceeded depth {max_depth}")


def algebraic_endpoint(fn, a, b, beta, **kwargs):
    """Integral of (t - a)^(beta - 1) fn(t) over [a, b], via t = a + u^(1 / beta)."""
    if b <= a:
        return adaptive_quad(fn, a, a, **kwargs)

    def substituted(u):
        return fn(a + np.power(u, 1.0 / beta)) / beta

    return adaptive_quad(substituted, 0.0, (b - a) ** beta, **kwargs)


def euler_average(partial_sums, rounds=None):
    values = np.asarray(partial_sums, dtype=np.float64)
    rounds = len(values) - 1 if rounds is None else min(rounds, len(values) - 1)

    window = values[len(values) - rounds - 1 :]
    for _ in range(rounds):
        window = 0.5 * (window[1:] + window[:-1])

    return float(window[0])


def alternating_tail(fn, start, half_period, rtol=1e-10, order=32, max_segments=200, rounds=24, batch=8):
    """Integral of fn over [start, inf) when fn changes sign every half_period from start.

    Each half-period segment is integrated by Gauss-Legendre, and the alternating partial sums are
    accelerated by repeated averaging. Converged once three successive accelerated estimates agree.
    """
    partial = []
    running = 0.0
    estimates = []

    while len(partial) < max_segments:
        first = len(partial)
        lo = start + half_period * np.arange(first, first + batch)
        for value in _panel_sums(fn, lo, lo + half_period, order):
            running += float(value)
            partial.append(running)

        estimates.extend(euler_average(partial[:n], rounds) for n in range(max(first, 2) + 1, len(partial) + 1))
        if len(partial) < 2 * rounds or len(estimates) < 4:
            continue

        scale = max(abs(value) for value in partial)
        last = estimates[-4:]
        if all(abs(last[i + 1] - last[i]) <= rtol * max(abs(last[-1]), scale) for i in range(3)):
            return last[-1], len(partial)

    raise AccelerationDivergenceError(f"alternating tail from {start} failed to settle after {max_segments} segments")
