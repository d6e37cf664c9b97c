"""Deterministic counter-based random streams.

Every variate produced here is a pure function of three integers
(seed, stream, position): the 128-bit Philox key is set directly to
(seed, stream) and the position indexes into that keyed stream. Streams
never share state, so Monte Carlo trials can be generated independently,
in any order, on any number of threads, and always reproduce bit for bit.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

_MASK64 = (1 << 64) - 1


def uniforms(seed: int, stream: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform [0,1) doubles at positions ``start .. start+count-1`` of a stream.

    ``uniforms(s, t, n)[i] == uniforms(s, t, 1, start=i)[0]`` for all i, so
    bulk and single draws agree.
    """
    if count < 0 or start < 0:
        raise ValueError("count and start must be non-negative")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    bit = Philox(key=key)
    if start >= 4:
        bit.advance(start // 4)  # Philox counters move in 4-word blocks
    gen = Generator(bit)
    if start % 4:
        gen.random(start % 4)
    return gen.random(count)
