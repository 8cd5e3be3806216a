"""
Counter-based random streams.

Every random component (sketch node, sample draw, initializer, error-monitor
sample) derives its own Philox generator from the master seed plus an integer
key path, so components are independent and runs are reproducible bit-for-bit
regardless of the order in which they are created.
"""

import numpy as np

from .errors import ConfigError

# Key-path tags for the different consumers of randomness.
SKETCH = 0
SAMPLE = 1
INIT = 2
MONITOR = 3
SYNTH = 4


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for (seed, *key)."""
    if seed < 0 or any(k < 0 for k in key):
        raise ConfigError(f"seed and key must be non-negative, got {seed}, {key}")
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))
