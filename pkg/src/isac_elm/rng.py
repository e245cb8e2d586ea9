"""Seeded, order-independent random streams.

Every random draw in the simulator comes from a stream keyed by
``(master_seed, tag, *index)``.  Streams use the counter-based Philox
generator, so a realization's draws do not depend on which worker produced
it or in which order.
"""

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def tag_code(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def stream(master_seed: int, tag: str, *index: int) -> np.random.Generator:
    """Return the generator for ``(master_seed, tag, *index)``."""
    key = (tag_code(tag),) + tuple(int(i) for i in index)
    seq = np.random.SeedSequence(entropy=int(master_seed) & MASK64, spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian entries with variance ``var``."""
    x = rng.standard_normal(shape)
    y = rng.standard_normal(shape)
    return np.sqrt(var / 2.0) * (x + 1j * y)
