"""Counter-based random streams.

Every draw is addressed by (seed, episode step, purpose, sample index) through
Philox keys and counters, so a sample's noise never depends on how many other
samples exist or on the order in which workers process them.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
SAMPLING = 0
EXECUTION = 1


def _generator(seed: int, step: int, purpose: int, index: int = 0) -> np.random.Generator:
    key = (int(seed) & _MASK64) | ((int(step) * 4 + purpose) & _MASK64) << 64
    # the top counter word separates per-sample streams
    counter = [0, 0, 0, int(index) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


class StepStreams:
    """Random streams for one planning step."""

    def __init__(self, seed: int, step: int):
        self.seed = int(seed)
        self.step = int(step)

    def normals(self, K: int, T: int, m: int) -> np.ndarray:
        """Standard normals of shape (K, T, m); row k comes from stream k."""
        out = np.empty((K, T, m))
        for k in range(K):
            out[k] = _generator(self.seed, self.step, SAMPLING, k).standard_normal((T, m))
        return out

    def execution_noise(self, mean, P) -> np.ndarray:
        xi = _generator(self.seed, self.step, EXECUTION).standard_normal(len(mean))
        return np.asarray(mean) + np.asarray(P) @ xi
