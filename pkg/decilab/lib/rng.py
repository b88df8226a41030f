"""Seeded, splittable randomness.

Every random draw in decilab comes from a numpy ``Generator`` over the
Philox counter-based bit generator. A run is identified by a 64-bit seed;
independent substreams are addressed by a spawn key, e.g. ``(repetition,)``
for a harness repetition or ``(repetition, 1)`` for its sampler.
"""

from __future__ import annotations

import numpy as np

from ..utils.validation import ValidationError, validate_seed

_WORD_BITS = 32


def spawn_generator(seed: int, *stream: int) -> np.random.Generator:
    """Generator for substream ``stream`` of ``seed``.

    Identical (seed, stream) pairs give identical draws on every platform.
    """
    validate_seed(seed)
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(sequence))


def coerce_generator(source: int | np.random.Generator) -> np.random.Generator:
    """Accept either a seed or an existing generator."""
    if isinstance(source, np.random.Generator):
        return source
    return spawn_generator(source)


def uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in [0, bound), for bounds of any size.

    Large bounds are assembled from 32-bit words with rejection.

    Raises:
        ValidationError: If bound is not positive
    """
    if bound <= 0:
        raise ValidationError(f"bound must be positive (got {bound})")
    if bound < 2**63:
        return int(rng.integers(0, bound))
    bits = (bound - 1).bit_length()
    words = -(-bits // _WORD_BITS)
    mask = (1 << bits) - 1
    while True:
        value = 0
        for word in rng.integers(0, 2**_WORD_BITS, size=words, dtype=np.uint64):
            value = (value << _WORD_BITS) | int(word)
        value &= mask
        if value < bound:
            return value
