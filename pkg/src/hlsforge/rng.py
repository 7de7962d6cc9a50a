"""Deterministic PRNG for design-space sampling.

xoshiro256** seeded through splitmix64, so equal seeds give identical draw
sequences on every platform regardless of the interpreter's hash or random
module state.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** 1.0 (Blackman/Vigna); 64-bit outputs."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, out = _splitmix64(state)
            s.append(out)
        if not any(s):
            # all-zero state is the one fixed point xoshiro cannot leave
            s[0] = 1
        self._s = s

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

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) with rejection; bound may exceed 2**64."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        if bound <= _MASK64 + 1:
            # reject the tail that would bias the modulo
            limit = ((_MASK64 + 1) // bound) * bound
            while True:
                x = self.next_u64()
                if x < limit:
                    return x % bound
        n_words = (bound.bit_length() + 63) // 64
        while True:
            x = 0
            for _ in range(n_words):
                x = (x << 64) | self.next_u64()
            x >>= n_words * 64 - bound.bit_length()
            if x < bound:
                return x

    def shuffle_prefix(self, items: list, k: int) -> None:
        """Fisher-Yates on the first k slots; items[:k] becomes the sample."""
        n = len(items)
        for i in range(min(k, n - 1)):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]
