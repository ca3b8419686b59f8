"""Deterministic 64-bit PRNG for reproducible rule and traffic generation.

Python's ``random`` module is deliberately not used: generated rulesets and
packet batches must be byte-identical for a given seed across platforms and
interpreter versions, so the generator is pinned to a fixed, published
recurrence.

The stream is produced by xorshift64* (Marsaglia xorshift with a
multiplicative output scramble):

    x ^= x >> 12
    x ^= (x << 25) & 2**64-1
    x ^= x >> 27
    output = (x * 0x2545F4914F6CDD1D) & 2**64-1

State is initialised from the user seed with one splitmix64 step, which maps
any 64-bit seed (including 0) to a well-mixed nonzero state:

    z = (seed + 0x9E3779B97F4A7C15) & 2**64-1
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 2**64-1
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 2**64-1
    state = z ^ (z >> 31)
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(seed: int) -> int:
    z = (seed + _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Xorshift64Star:
    """xorshift64* stream with bias-free bounded draws."""

    def __init__(self, seed: int) -> None:
        self._state = _splitmix64(seed & _MASK64)
        if self._state == 0:  # xorshift state must be nonzero
            self._state = _SPLITMIX_GAMMA

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), exact via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.randbelow(hi - lo + 1)

    def chance(self, p: float) -> bool:
        """True with probability p; p outside [0, 1] is clamped."""
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self.next_u64() < int(p * 2.0**64)


def derive_seed(seed: int, stream: int) -> int:
    """Stable sub-seed for independent streams drawn from one user seed."""
    return _splitmix64((seed & _MASK64) ^ _splitmix64(stream & _MASK64))
