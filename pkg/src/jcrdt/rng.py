"""xorshift64* pseudo-random generator.

Fixed so that traces replay bit-for-bit on any platform or language:

    seed:  state = splitmix64(seed)  (state 0 is replaced by 0x9E3779B97F4A7C15)
    step:  x ^= x >> 12; x ^= x << 25; x ^= x >> 27   (all mod 2**64)
           output = (x * 0x2545F4914F6CDD1D) mod 2**64
    below(n)   = output mod n
    random()   = (output >> 11) / 2**53
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


class XorShift64Star:
    def __init__(self, seed: int) -> None:
        self.state = splitmix64(seed & _MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() needs n > 0")
        return self.next_u64() % n

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def weighted(self, items: Sequence[T], weights: Sequence[float]) -> T:
        total = sum(weights)
        r = self.random() * total
        for item, w in zip(items, weights):
            if r < w:
                return item
            r -= w
        return items[-1]

    def shuffle(self, seq: MutableSequence) -> None:
        # Fisher-Yates, high index first
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def fork(self) -> XorShift64Star:
        return XorShift64Star(self.next_u64())
