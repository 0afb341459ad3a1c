"""Seeded random inputs for experiments and property tests."""

from __future__ import annotations

import random

from .algebra import Poly, PolyRing, RationalFunction, RFMatrix


def random_univariate(rng: random.Random, ring: PolyRing, var: str, max_deg: int, nonzero: bool = False) -> RationalFunction:
    mod = ring.domain.modulus
    i = ring.index[var]
    while True:
        terms = {}
        for d in range(max_deg + 1):
            c = rng.randrange(mod) if mod else rng.randint(-5, 5)
            if c:
                e = [0] * ring.nvars
                e[i] = d
                terms[tuple(e)] = c
        f = RationalFunction(Poly(ring, terms))
        if f or not nonzero:
            return f


def random_constant_invertible(rng: random.Random, ring: PolyRing, r: int) -> RFMatrix:
    mod = ring.domain.modulus
    while True:
        rows = [[RationalFunction.const(ring, rng.randrange(mod) if mod else rng.randint(-3, 3)) for _ in range(r)] for _ in range(r)]
        g = RFMatrix(ring, rows)
        if g.det():
            return g


def random_strict_upper(rng: random.Random, ring: PolyRing, var: str, r: int, max_deg: int) -> RFMatrix:
    zero = RationalFunction(ring.zero())
    rows = [[random_univariate(rng, ring, var, max_deg) if b > a else zero for b in range(r)] for a in range(r)]
    return RFMatrix(ring, rows)


def random_nilpotent(rng: random.Random, ring: PolyRing, var: str, r: int, order: int, max_deg: int = 3) -> RFMatrix:
    """Nilpotent ``r x r`` matrix of exact order ``order``, conjugated by a random constant matrix."""
    if not 1 <= order <= r:
        raise ValueError("order must lie in 1..r")
    zero = RationalFunction(ring.zero())
    rows = [[zero] * r for _ in range(r)]
    for a in range(order - 1):
        rows[a][a + 1] = random_univariate(rng, ring, var, max_deg, nonzero=True)
    for a in range(order - 1):
        for b in range(a + 2, order):
            rows[a][b] = random_univariate(rng, ring, var, max_deg)
    N = RFMatrix(ring, rows)
    g = random_constant_invertible(rng, ring, r)
    return g * N * g.inverse()


def random_trace_zero(rng: random.Random, ring: PolyRing, var: str, r: int, max_deg: int = 2) -> RFMatrix:
    rows = [[random_univariate(rng, ring, var, max_deg) for _ in range(r)] for _ in range(r)]
    tr = RationalFunction(ring.zero())
    for a in range(r - 1):
        tr = tr + rows[a][a]
    rows[r - 1][r - 1] = -tr
    return RFMatrix(ring, rows)
