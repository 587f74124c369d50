# etl/rng.py
"""
Reproducible random streams.

Every generator is numpy's Generator over the Philox-4x64 counter-based bit
generator, keyed by SeedSequence([seed, *stream]). The same (seed, stream)
tuple yields the same stream on every platform and independently of how many
workers run in parallel. Normal variates come from Box-Muller over Philox
uniforms, never from numpy's own normal sampler.
"""
from __future__ import annotations

import numpy as np

PRNG_NAME = "Philox4x64-10 (numpy.random.Philox) + Box-Muller"
SEED_BITS = 63

# stream ids, so that no two consumers ever share a stream
STREAM_DATA_P = 1
STREAM_DATA_Q = 2
STREAM_SVM = 3
STREAM_MMD = 4
STREAM_TRIALS = 5
STREAM_BASELINE = 6
STREAM_SPLIT = 7


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    ss = np.random.SeedSequence([int(seed), *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


def draw_seed() -> int:
    """Fresh seed from OS entropy (used when --seed is omitted)."""
    return int(np.random.SeedSequence().entropy % (1 << SEED_BITS))


def child_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 1 << SEED_BITS))


def standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    shape = (size,) if np.isscalar(size) else tuple(size)
    count = int(np.prod(shape))
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1], keeps log finite
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:count].reshape(shape)
