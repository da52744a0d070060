"""Bessel functions of the first kind for real orders in [-1, 6] and nonnegative arguments.

The power series is used for small arguments. Large arguments go through the Hankel asymptotic
expansion, truncated at its smallest term, for the two fractional base orders, followed by the
three-term recurrence (stable upwards because every supported order stays below x / 2).
"""

import math

import numpy as np
from scipy import optimize

from cm_lab.errors import OrderOutOfRangeError


MIN_ORDER = -1.0
MAX_ORDER = 6.0
SERIES_LIMIT = 14.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 60


def _check_order(nu):
    nu = float(nu)
    if not MIN_ORDER <= nu <= MAX_ORDER:
        raise OrderOutOfRangeError(f"Bessel order {nu} outside [{MIN_ORDER}, {MAX_ORDER}]")

    return nu


def _as_argument(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("Bessel argument must be finite and nonnegative")

    return x


def _is_integer(nu):
    return float(nu).is_integer()


def _series_scaled(nu, x):
    """J_nu(x) / x^nu from the power series, nu > -1."""
    q = -0.25 * x * x
    term = np.full_like(x, 1.0 / (2.0**nu * math.gamma(nu + 1.0)))
    total = term.copy()
    largest = np.abs(term)

    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + nu))
        total += term
        magnitude = np.abs(term)
        largest = np.maximum(largest, magnitude)
        if np.all(magnitude <= 1e-17 * largest):
            break

    return total


def _asymptotic(mu, x):
    """Hankel expansion of J_mu at large x, each element truncated before its terms start to grow."""
    mu2 = 4.0 * mu * mu
    p = np.ones_like(x)
    q = np.zeros_like(x)

    term = np.ones_like(x)
    previous = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (mu2 - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        magnitude = np.abs(term)
        active &= magnitude < previous
        previous = np.where(active, magnitude, previous)

        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += np.where(active, sign * term, 0.0)
        else:
            p += np.where(active, sign * term, 0.0)

        if not np.any(active & (magnitude > 1e-17)):
            break

    phase = x - (0.5 * mu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(phase) - q * np.sin(phase))


def _large_argument(nu, x):
    base = math.floor(nu)
    mu = nu - base
    j_mu, j_next = _asymptotic(mu, x), _asymptotic(mu + 1.0, x)

    if base < 0:
        return 2.0 * mu / x * j_mu - j_next
    if base == 0:
        return j_mu

    previous, current = j_mu, j_next
    for order in range(1, base):
        previous, current = current, 2.0 * (mu + order) / x * current - previous

    return current


def _bessel_j(nu, x):
    if nu < 0.0 and _is_integer(nu):
        return (-1.0) ** int(-nu) * _bessel_j(-nu, x)

    values = np.empty_like(x)
    small = x <= SERIES_LIMIT
    if np.any(small):
        xs = x[small]
        with np.errstate(divide="ignore", invalid="ignore"):
            values[small] = _series_scaled(nu, xs) * np.power(xs, nu)
        if nu == 0.0:
            values[small & (x == 0.0)] = 1.0
        elif nu > 0.0:
            values[small & (x == 0.0)] = 0.0
    if np.any(~small):
        values[~small] = _large_argument(nu, x[~small])

    return values


def bessel_j(nu, x):
    """J_nu(x) for nu in [-1, 6] and x >= 0; scalars in, scalar out."""
    nu = _check_order(nu)
    x = _as_argument(x)
    if nu < 0.0 and not _is_integer(nu) and np.any(x == 0.0):
        raise OrderOutOfRangeError(f"J_{nu} is unbounded at x = 0")

    values = _bessel_j(nu, np.atleast_1d(x))
    return float(values[0]) if x.ndim == 0 else values.reshape(x.shape)


def bessel_j_scaled(nu, x):
    """J_nu(x) / x^nu, an entire function of x with value 1 / (2^nu Gamma(nu + 1)) at 0."""
    nu = _check_order(nu)
    x = _as_argument(x)
    flat = np.atleast_1d(x)

    if nu == -1.0:
        # J_{-1}(x) / x^{-1} = -x J_1(x)
        values = -flat * flat * bessel_j_scaled(1.0, flat)
    else:
        values = np.empty_like(flat)
        small = flat <= SERIES_LIMIT
        if np.any(small):
            values[small] = _series_scaled(nu, flat[small])
        if np.any(~small):
            large = flat[~small]
            values[~small] = _large_argument(nu, large) / np.power(large, nu)

    return float(values[0]) if x.ndim == 0 else values.reshape(x.shape)


def bessel_zero(nu, lower, upper, xtol=1e-14):
    return optimize.bisect(lambda x: bessel_j(nu, x), lower, upper, xtol=xtol, maxiter=200)


def bessel_first_zero(nu, step=0.25):
    """First positive zero of J_nu, bracketed by a scan then refined by bisection."""
    nu = _check_order(nu)
    lower = step
    value = bessel_j(nu, lower)
    while lower < 100.0:
        upper = lower + step
        next_value = bessel_j(nu, upper)
        if value * next_value <= 0.0:
            return bessel_zero(nu, lower, upper)
        lower, value = upper, next_value

    raise ValueError(f"no zero of J_{nu} found below 100")


def unit_sphere_area(dimension):
    return 2.0 * math.pi ** (dimension / 2.0) / math.gamma(dimension / 2.0)
