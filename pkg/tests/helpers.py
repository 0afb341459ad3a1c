"""Shared strategies and independent oracles for the test suite."""

from __future__ import annotations

from fractions import Fraction

import sympy
from hypothesis import strategies as st

from isocurve.algebra import QQ, Poly, PolyRing, PrimeField, RationalFunction, RFMatrix, parse_in_ring


def rf(text, ring):
    return parse_in_ring(str(text), ring)


def mat(rows, ring):
    return RFMatrix(ring, [[rf(e, ring) for e in row] for row in rows])


def polys(ring: PolyRing, max_terms=4, max_exp=3, coeff=5):
    mod = ring.domain.modulus
    coeffs = st.integers(0, mod - 1) if mod else st.integers(-coeff, coeff)
    expo = st.tuples(*[st.integers(0, max_exp)] * ring.nvars)
    return st.dictionaries(expo, coeffs, max_size=max_terms).map(lambda d: Poly(ring, d))


def rationals(ring: PolyRing, **kw):
    nonzero = polys(ring, **kw).filter(lambda p: not p.is_zero())
    return st.tuples(polys(ring, **kw), nonzero).map(lambda t: RationalFunction(*t))


def to_sympy(f, ring: PolyRing):
    """Over Q only; an oracle that never touches the in-house arithmetic."""
    syms = sympy.symbols(list(ring.variables))

    def conv(p):
        acc = sympy.Integer(0)
        for e, c in p.terms.items():
            c = Fraction(c)
            term = sympy.Rational(c.numerator, c.denominator)
            for s, k in zip(syms, e):
                term *= s**k
            acc += term
        return acc

    if isinstance(f, Poly):
        return conv(f)
    return conv(f.num) / conv(f.den)


def sympy_equal(a, b) -> bool:
    return sympy.simplify(sympy.together(a - b)) == 0


def naive_apply_connection(A: RFMatrix, var: str, steps: int) -> RFMatrix:
    """Apply ``D = d + A`` ``steps`` times to each basis column, one column at a time."""
    r = A.size
    ring = A.ring
    cols = []
    for c in range(r):
        v = [RationalFunction.const(ring, 1 if i == c else 0) for i in range(r)]
        for _ in range(steps):
            v = [v[i].derive(var) + sum_rf([A[i, k] * v[k] for k in range(r)], ring) for i in range(r)]
        cols.append(v)
    return RFMatrix(ring, [[cols[c][i] for c in range(r)] for i in range(r)])


def sum_rf(items, ring):
    acc = RationalFunction(ring.zero())
    for x in items:
        acc = acc + x
    return acc


FIELDS = [QQ, PrimeField(2), PrimeField(3), PrimeField(5), PrimeField(101)]
