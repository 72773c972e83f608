"""Deterministic counter-based random stream used by every seeded generator.

All randomness in this package flows through one explicitly specified
64-bit mixing function so that datasets regenerate bit-identically across
runs, platforms, and reimplementations in other languages.

The mixer is the splitmix64 finalizer applied to ``seed + n * GOLDEN``
(mod 2^64), where ``n`` is a 1-based draw counter and GOLDEN is
0x9E3779B97F4A7C15.  Because each output depends only on (seed, n), draws
can be produced sequentially (``Stream``) or as a vectorized block
(``uniform_block``) with identical results.

Draw conventions, fixed for reproducibility:

- ``uniform``: high 53 bits of the mixed word divided by 2^53, in [0, 1).
- ``gauss_pair``: Box-Muller on two consecutive uniforms; the first is
  shifted into (0, 1] as ``(bits53 + 1) / 2^53`` before the log.
- ``randint(n)``: ``floor(uniform() * n)``; the modulo bias of this
  floor construction is below 2^-53 * n and is accepted.
- ``derive(seed, k)``: mix(mix(seed, 1) XOR k, 1), used to give every
  sample, layer, or worker its own independent stream.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix64(seed: int, n: int) -> int:
    """splitmix64 finalizer of (seed + n * GOLDEN) mod 2^64."""
    z = (seed + n * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive(seed: int, key: int) -> int:
    """Independent child seed for stream ``key`` of ``seed``."""
    return mix64(mix64(seed & _MASK64, 1) ^ (key & _MASK64), 1)


class Stream:
    """Sequential view of the counter-based stream for a given seed."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.count = 0

    def next_u64(self) -> int:
        self.count += 1
        return mix64(self.seed, self.count)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * _INV53
        return lo + u * (hi - lo)

    def randint(self, n: int) -> int:
        """Integer in [0, n)."""
        return min(int(self.uniform() * n), n - 1)

    def gauss_pair(self) -> tuple[float, float]:
        """Two independent standard normals via Box-Muller."""
        u1 = ((self.next_u64() >> 11) + 1) * _INV53
        u2 = (self.next_u64() >> 11) * _INV53
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)

    def gauss(self, sigma: float = 1.0) -> float:
        """One normal draw; the sine half of the pair is discarded."""
        return self.gauss_pair()[0] * sigma

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, swapping index i with randint(i + 1) from the end down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def uniform_block(seed: int, count: int, lo: float = 0.0, hi: float = 1.0,
                  offset: int = 0) -> np.ndarray:
    """Vectorized draws equal to Stream(seed).uniform() calls offset+1 .. offset+count."""
    n = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = (np.uint64(seed & _MASK64) + n * np.uint64(_GOLDEN))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) * _INV53
    return lo + u * (hi - lo)
