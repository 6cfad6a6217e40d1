"""Counter-based uniform streams for reproducible parallel trials.

Every stream is a Philox generator keyed by (seed, trial, stream id), so
draw n of a stream depends only on the key and the position n, never on
what other streams consumed.  Coupled experiments share the CENTERS
stream between two models while diverging on the ALT stream.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

MASK64 = (1 << 64) - 1

# stream ids
STREAM_MARKS = 0    # Bernoulli marks of the two-part decomposition
STREAM_CENTERS = 1  # plain trials and the shared component of coupled trials
STREAM_ALT = 2      # the non-shared component of coupled trials


def stream_key(seed: int, trial: int = 0, stream: int = STREAM_CENTERS):
    if not 0 <= stream < 256:
        raise ValueError("stream id out of range")
    return [seed & MASK64, ((trial & MASK64) << 8 | stream) & MASK64]


def uniforms(seed: int, count: int, trial: int = 0, stream: int = STREAM_CENTERS) -> np.ndarray:
    """First `count` uniforms of the (seed, trial, stream) stream."""
    gen = Generator(Philox(key=stream_key(seed, trial, stream)))
    return gen.random(count)
