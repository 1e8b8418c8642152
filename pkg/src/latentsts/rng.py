"""Reproducible counter-based random streams.

Every stochastic operation in the package draws from a Philox bit generator
keyed by an explicit integer tuple, so results are reproducible and
independent of execution order.  A Monte Carlo study derives the stream for
replica ``r`` (redraw attempt ``d``) as ``(master_seed, r, d, role)`` where
``role`` separates the latent-path draws from the response draws.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PATH_ROLE", "RESPONSE_ROLE", "stream_key", "bit_generator", "generator"]

PATH_ROLE = 0
RESPONSE_ROLE = 1


def stream_key(seed, *indices: int) -> tuple[int, ...]:
    """Normalize a seed plus substream indices into a hashable key tuple."""
    if isinstance(seed, (tuple, list)):
        key = tuple(int(s) for s in seed) + tuple(int(i) for i in indices)
    else:
        key = (int(seed),) + tuple(int(i) for i in indices)
    if any(k < 0 for k in key):
        raise ValueError(f"stream key components must be non-negative, got {key}")
    return key


def bit_generator(key) -> np.random.Philox:
    """Philox bit generator for a stream key (int or tuple of ints)."""
    return np.random.Philox(np.random.SeedSequence(stream_key(key)))


def generator(key) -> np.random.Generator:
    """numpy Generator over :func:`bit_generator`."""
    return np.random.Generator(bit_generator(key))
