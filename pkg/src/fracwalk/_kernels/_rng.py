"""Counter-based splitmix64 streams shared by both simulation backends.

Every path owns an independent stream derived from ``(seed, stream_id,
path_index)``, so parallel generation never overlaps and both the compiled
and the numpy kernel reproduce identical draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def path_state(seed: int, stream_id: int, path_index: int) -> int:
    """Initial splitmix64 state for one path's stream."""
    return mix64(mix64(mix64(seed & MASK64) ^ (stream_id & MASK64)) ^ (path_index & MASK64))


def path_states(seed: int, stream_id: int, path_indices: np.ndarray) -> np.ndarray:
    """Vectorized :func:`path_state` over an array of path indices."""
    base = np.uint64(mix64(mix64(seed & MASK64) ^ (stream_id & MASK64)))
    return mix64_vec(base ^ path_indices.astype(np.uint64))


def mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def next_uniforms(states: np.ndarray) -> np.ndarray:
    """Advance the given splitmix64 states in place and return uniforms in (0,1)."""
    states += np.uint64(GOLDEN)
    z = mix64_vec(states)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


@dataclass
class Stream:
    """Sequential splitmix64 stream (scalar, pure-Python)."""

    state: int

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        return ((self.next_u64() >> 11) + 0.5) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """n sequential uniforms, vectorized; advances the stream by n."""
        counters = np.uint64(self.state) + np.uint64(GOLDEN) * np.arange(1, n + 1, dtype=np.uint64)
        self.state = (self.state + n * GOLDEN) & MASK64
        z = mix64_vec(counters)
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def exponential(self, rate: float = 1.0) -> float:
        return -np.log(self.uniform()) / rate
