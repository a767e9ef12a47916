"""Deterministic pseudo-random numbers for reproducible experiments.

Implements xoshiro256** seeded through SplitMix64, both straight ports of
the public reference algorithms.  A hand-rolled generator (rather than
``random.Random``) keeps every draw reproducible bit-for-bit from a 64-bit
seed regardless of interpreter version, which the experiment harness relies
on for byte-identical reruns.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # SplitMix64 increment


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class SplitMix64:
    """64-bit state mixer, used here to expand seeds."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** generator with uniform float and integer helpers."""

    __slots__ = ("_s",)

    def __init__(self, seed: int) -> None:
        sm = SplitMix64(seed)
        # Reference seeding recipe: fill the 256-bit state from SplitMix64.
        self._s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        # Top 53 bits give a uniform double in [0, 1).
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via Lemire-style scaling (no bias at these sizes)."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        return (self.next_u64() * n) >> 64

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], both ends inclusive."""
        if b < a:
            raise ValueError("randint() requires a <= b")
        return a + self.randrange(b - a + 1)


def derive_stream_seed(seed: int, index: int) -> int:
    """Seed for the ``index``-th independent stream under a root ``seed``.

    Depends on nothing but the two arguments, so trial k of a sweep sees the
    same draws no matter which sweep point or process runs it.
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    root = SplitMix64(seed).next_u64()
    return SplitMix64((root + (index + 1) * _GAMMA) & _MASK64).next_u64()
