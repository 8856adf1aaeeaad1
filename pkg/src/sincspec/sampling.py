"""Seed-reproducible uniform sampling on I = [-1/2, 1/2].

Every Monte Carlo trial owns a generator derived from ``(master_seed,
trial_index)`` alone, so trials can be scheduled on any number of workers in
any order without changing a single draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be non-negative, got {self.trial_index}")


def derive_generator(seed: SeedSpec) -> np.random.Generator:
    """Return a fresh Philox generator keyed by ``(master_seed, trial_index)``.

    The trial index enters through the ``SeedSequence`` spawn key, which hashes
    it together with the master seed; distinct trials get independent Philox
    keys and hence non-overlapping counter streams.
    """
    ss = np.random.SeedSequence(entropy=seed.master_seed, spawn_key=(seed.trial_index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_uniform(gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. points uniform on [-1/2, 1/2); advances ``gen``."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    # Generator.random uses the top 53 bits of each 64-bit draw
    return gen.random(n) - 0.5


def trial_sample(master_seed: int, trial_index: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw one sample of size 2n and split it into (Z, Y): first n, last n."""
    u = sample_uniform(derive_generator(SeedSpec(master_seed, trial_index)), 2 * n)
    return u[:n], u[n:]
