"""Brute-force nearest neighbours for the seeded 50 x 16 feature set used by
the acceptance suite.

Re-derives the feature values from the generator's definition (64-bit Mersenne
Twister, top 53 bits scaled to [0, 1), rounded to binary32) without the
library, then prints the Euclidean nearest reference of every query.
Run: python3 tests/oracles/nearest_neighbour.py
"""
import math
import struct

MASK = (1 << 64) - 1


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.index = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def next(self):
        if self.index >= 312:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK


def to_float32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def features(count, dim, seed):
    rng = MT19937_64(seed)
    return [[to_float32((rng.next() >> 11) * 2.0 ** -53) for _ in range(dim)]
            for _ in range(count)]


def main():
    refs = features(50, 16, 101)
    queries = features(50, 16, 202)
    best = []
    for q in queries:
        dists = [math.sqrt(sum((a - b) ** 2 for a, b in zip(q, r))) for r in refs]
        best.append(min(range(len(refs)), key=lambda i: (dists[i], i)))
    print(", ".join(str(b) for b in best))


if __name__ == "__main__":
    # Sanity check against the standard's 10000th output for the default seed.
    g = MT19937_64(5489)
    for _ in range(9999):
        g.next()
    assert g.next() == 9981545732273789042
    main()
