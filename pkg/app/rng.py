"""
Reproducible random streams.

Every replication of an experiment draws from its own stream of a
counter-based Philox generator, keyed by ``SeedSequence(seed,
spawn_key=(stream, *path))``. Distinct keys give independent states, so
replications can run in any order or in parallel.
"""

from dataclasses import dataclass, replace
from typing import Tuple, Union

import numpy as np

RngLike = Union["SeedSpec", np.random.Generator, None]


@dataclass(frozen=True)
class SeedSpec:
    seed: int
    stream: int = 0
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream < 0:
            raise ValueError(f"Stream index must be nonnegative, got {self.stream}")

    def spawn(self, index: int) -> "SeedSpec":
        """Child stream, independent of the parent and of its siblings."""
        return replace(self, path=self.path + (index,))

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream,) + self.path
        )
        return np.random.Generator(np.random.Philox(sequence))


def as_generator(rng: RngLike) -> np.random.Generator:
    """Generator for ``rng``; ``None`` means fresh OS entropy."""
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()
