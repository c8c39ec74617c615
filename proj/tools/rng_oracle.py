#!/usr/bin/env python3
"""Reference transcription of the simulator's generator (see docs/rng.md).

Prints the values frozen in tests/simcore_test.cpp and tests/netmodel_test.cpp.
"""

import sys

MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


class Rng:
    def __init__(self, seed):
        self.state = splitmix64(seed) or 0x9E3779B97F4A7C15

    def next(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def draw(self, bound):
        threshold = ((1 << 64) - bound) % bound
        while True:
            r = self.next()
            if r >= threshold:
                return r % bound


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
    rng = Rng(seed)
    print("draw(100) x3:", [rng.draw(100) for _ in range(3)])
    rng = Rng(seed)
    print("next() x3:", [rng.next() for _ in range(3)])
    rng = Rng(seed)
    draws = [rng.draw(1 << 32) for _ in range(100)]
    print("corrupted of 100 at p=0.5:", sum(1 for d in draws if d < (1 << 31)))


if __name__ == "__main__":
    main()
