"""Named random streams derived from a single run seed.

Every consumer of randomness draws from its own stream so no two of them
ever share a generator key.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Stream identifiers; the values are part of the reproducibility contract."""

    DISCRIMINATOR_INIT = 0
    GENERATOR_INIT = 1
    SAMPLE = 2
    SCORER_INIT = 3
    NOISE = 4
    SHUFFLE = 5
    TRAIN_STEP = 6


def stream_rng(seed: int, stream: Stream, index: int = 0) -> np.random.Generator:
    """Generator keyed by (seed, stream, index), e.g. index = epoch or step."""
    return np.random.default_rng([seed, int(stream), index])
