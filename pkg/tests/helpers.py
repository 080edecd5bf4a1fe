"""Seeded random instances and brute-force oracles shared by the tests."""

import itertools
import random
from fractions import Fraction as F

from icenvy.core import AdTypesInstance, DiscountCurve, PositionInstance

Q = F(1, 100)


def random_curve(rng: random.Random, m: int, steps: int = 100) -> DiscountCurve:
    return DiscountCurve(tuple(sorted((F(rng.randint(0, steps), steps) for _ in range(m)), reverse=True)))


def spaced_bids(rng: random.Random, n: int, gap: int = 3, hi: int = 3000) -> list:
    """n distinct cent amounts, pairwise at least ``gap`` cents apart, in random order."""
    while True:
        xs = sorted(rng.sample(range(1, hi), n))
        if all(b - a >= gap for a, b in zip(xs, xs[1:])):
            rng.shuffle(xs)
            return [F(x, 100) for x in xs]


def tied_bids(rng: random.Random, n: int) -> list:
    pool = [F(rng.randint(1, 40), 4) for _ in range(max(1, n // 2))]
    return [rng.choice(pool) for _ in range(n)]


def random_position(rng: random.Random, n: int, m: int, ties: bool = False) -> PositionInstance:
    bids = tied_bids(rng, n) if ties else spaced_bids(rng, n)
    return PositionInstance.truthful(bids, random_curve(rng, m))


def random_adtypes(rng: random.Random, n: int, m: int = None) -> AdTypesInstance:
    m = n if m is None else m
    vals = [F(rng.randint(1, 2000), 100) for _ in range(n)]
    return AdTypesInstance.truthful(vals, [random_curve(rng, m) for _ in range(n)])


def brute_force_max(weights) -> F:
    n = len(weights)
    return max(sum((weights[i][p[i]] for i in range(n)), F(0)) for p in itertools.permutations(range(n)))
