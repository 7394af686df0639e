"""SplitMix64: a tiny splittable 64-bit generator for reproducible workloads.

The algorithm is fully specified (Steele, Lea & Flood's splitmix64 step),
so seeding and simulation summaries reproduce anywhere, independent of the
host language's default RNG.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def split(self) -> "SplitMix64":
        """Independent child stream seeded from this one."""
        return SplitMix64(self.next_u64())

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError("hi must be >= lo")
        return lo + self.below(hi - lo + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def distinct_choices(self, seq: Sequence[T], k: int) -> list[T]:
        """k distinct elements, order of first draw preserved. k <= len(seq)."""
        if k > len(seq):
            raise ValueError("k exceeds population size")
        picked: list[T] = []
        seen: set[int] = set()
        while len(picked) < k:
            i = self.below(len(seq))
            if i not in seen:
                seen.add(i)
                picked.append(seq[i])
        return picked
