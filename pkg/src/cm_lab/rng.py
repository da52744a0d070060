"""Counter-based random streams.

Every random draw is addressed by (seed, counter, counter, ...) through ``jax.random.fold_in``,
so trial t of an experiment is the same whether it runs first, last or on another thread.
"""

import jax
import numpy as np
from jax import numpy as jnp

from cm_lab.errors import SeedMissingError


jax.config.update("jax_enable_x64", True)


def require_seed(seed):
    if seed is None:
        raise SeedMissingError("a seed is mandatory for randomized computations")

    return int(seed)


def stream_key(seed, *counters):
    seed = require_seed(seed) & 0xFFFFFFFFFFFFFFFF

    # Fold both 32-bit halves so the full 64-bit seed is significant
    key = jax.random.PRNGKey(seed & 0xFFFFFFFF)
    key = jax.random.fold_in(key, seed >> 32)
    for counter in counters:
        key = jax.random.fold_in(key, int(counter))

    return key


def _sample(key, manifold, num_points):
    if manifold.is_flat:
        return jax.random.uniform(key, (num_points, manifold.dimension), dtype=jnp.float64)

    vectors = jax.random.normal(key, (num_points, 3), dtype=jnp.float64)
    return vectors / jnp.linalg.norm(vectors, axis=-1, keepdims=True)


def uniform_points(key, manifold, num_points):
    """Uniform points: torus coordinates in [0, 1)^d, sphere points as normalized Gaussians."""
    return np.asarray(_sample(key, manifold, num_points))


def batched_uniform_points(seed, manifold, num_points, start, stop, *counters):
    """Points for trials start..stop-1, shape (stop - start, num_points, coord_dim)."""
    base = stream_key(seed, *counters)
    trials = jnp.arange(start, stop, dtype=jnp.uint32)

    keys = jax.vmap(lambda trial: jax.random.fold_in(base, trial))(trials)
    points = jax.vmap(lambda key: _sample(key, manifold, num_points))(keys)

    return np.asarray(points)


def uniform_values(key, shape, low=0.0, high=1.0):
    return np.asarray(jax.random.uniform(key, shape, dtype=jnp.float64, minval=low, maxval=high))


def normal_values(key, shape):
    return np.asarray(jax.random.normal(key, shape, dtype=jnp.float64))


def split(key, num=2):
    return jax.random.split(key, num)
