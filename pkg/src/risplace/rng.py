"""Named, splittable random streams.

Every stochastic quantity in the simulator is drawn from a generator keyed by
(root seed, symbolic path).  Streams for different paths are statistically
independent, so candidate evaluations can run in any order, on any number of
workers, and still reproduce bit-identical results.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Identifiers for the independent random streams of one run."""

    USERS = 1
    CANDIDATES = 2
    DIRECT = 3
    BS_RIS = 4
    RIS_USER = 5
    METRICS = 6
    SWEEP = 7
    LEVEL = 8


def substream(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream named by ``path`` under ``root_seed``."""
    key = tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(int(root_seed), spawn_key=key))


def derive_seed(root_seed: int, *path: int) -> int:
    """A child integer seed for APIs that take a seed rather than a stream."""
    return int(substream(root_seed, *path).integers(0, 2**63 - 1))
