"""
Counter-based random streams

Every replicate owns a Philox stream keyed by (seed, stream_id); streams
never overlap and need no coordination between workers.
"""

import numpy as np

from crystalwalk.models.walk import RngSpec


def make_generator(spec: RngSpec) -> np.random.Generator:
    """Philox generator for one (seed, stream_id) pair"""
    sequence = np.random.SeedSequence(spec.seed, spawn_key=(spec.stream_id,))
    return np.random.Generator(np.random.Philox(sequence))


def uniform_chunks(generator: np.random.Generator, total: int, chunk_size: int):
    """
    Yield uniforms on [0, 1) in chunks of at most `chunk_size`

    Concatenating the chunks gives the same values as one draw of `total`.
    """
    remaining = total
    while remaining > 0:
        size = min(chunk_size, remaining)
        yield generator.random(size)
        remaining -= size
