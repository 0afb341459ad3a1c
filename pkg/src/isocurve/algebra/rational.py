"""Normalised rational functions ``num/den`` over a :class:`PolyRing`.

Canonical form: ``gcd(num, den) = 1`` and ``den`` monic under grlex.  Two
rational functions are equal exactly when their canonical forms agree.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .domain import BadReduction, PrimeField, Rationals
from .polynomial import Poly, PolyRing, format_poly, poly_gcd


def _is_single_gen(p: Poly) -> bool:
    if len(p.terms) != 1:
        return False
    ((e, c),) = p.terms.items()
    return c == 1 and sum(e) == 1


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, normalized: bool = False):
        if den is None:
            den = num.ring.one()
            normalized = True
        if num.ring != den.ring:
            raise TypeError("numerator and denominator live in different rings")
        if not den.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    @classmethod
    def const(cls, ring: PolyRing, c) -> "RationalFunction":
        return cls(ring.const(c))

    @classmethod
    def gen(cls, ring: PolyRing, name: str) -> "RationalFunction":
        return cls(ring.gen(name))

    # -- predicates --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num.terms

    def __bool__(self):
        return bool(self.num.terms)

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.is_constant()

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return (
                self.ring == other.ring
                and self.num.terms == other.num.terms
                and self.den.terms == other.den.terms
            )
        if isinstance(other, Poly):
            return self.den.is_one() and self.num == other
        try:
            return self.den.is_one() and self.num == self.ring.const(other)
        except (TypeError, ValueError, BadReduction):
            return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def cross_equal(self, other: "RationalFunction") -> bool:
        """Equality by cross multiplication, independent of normalisation."""
        return (self.num * other.den - other.num * self.den).is_zero()

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.ring != self.ring:
                raise TypeError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, Poly):
            return RationalFunction(self._check(other))
        return RationalFunction(self.ring.const(other))

    def _check(self, p: Poly) -> Poly:
        if p.ring != self.ring:
            raise TypeError(f"ring mismatch: {self.ring} vs {p.ring}")
        return p

    def __add__(self, other):
        o = self._coerce(other)
        if not o.num.terms:
            return self
        if not self.num.terms:
            return o
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if d1.is_one() and d2.is_one():
            return RationalFunction(n1 + n2)
        if d1.terms == d2.terms:
            return RationalFunction(n1 + n2, d1)
        if d1.is_one():
            return RationalFunction(n1 * d2 + n2, d2, normalized=True)
        if d2.is_one():
            return RationalFunction(n1 + n2 * d1, d1, normalized=True)
        g = poly_gcd(d1, d2)
        if g.is_one():
            # products of monic polynomials are monic
            return RationalFunction(n1 * d2 + n2 * d1, d1 * d2, normalized=True)
        d1g, d2g = d1.exact_div(g), d2.exact_div(g)
        num = n1 * d2g + n2 * d1g
        h = poly_gcd(num, g)
        if not h.is_one():
            num = num.exact_div(h)
            d2 = d2.exact_div(h)
        return RationalFunction(num, d1g * d2, normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, normalized=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.num.terms or not o.num.terms:
            return RationalFunction(self.ring.zero())
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if d1.is_one() and d2.is_one():
            return RationalFunction(n1 * n2)
        g1 = poly_gcd(n1, d2) if not d2.is_one() else None
        g2 = poly_gcd(n2, d1) if not d1.is_one() else None
        if g1 is not None and not g1.is_one():
            n1, d2 = n1.exact_div(g1), d2.exact_div(g1)
        if g2 is not None and not g2.is_one():
            n2, d1 = n2.exact_div(g2), d1.exact_div(g2)
        num, den = n1 * n2, d1 * d2
        lc = den.lc()
        if lc != 1:
            inv = self.ring.domain.inv(lc)
            num, den = num.scale(inv), den.scale(inv)
        return RationalFunction(num, den, normalized=True)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self.num.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        num, den = self.den, self.num
        lc = den.lc()
        if lc != 1:
            inv = self.ring.domain.inv(lc)
            num, den = num.scale(inv), den.scale(inv)
        return RationalFunction(num, den, normalized=True)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RationalFunction(self.num**n, self.den**n, normalized=True)

    # -- calculus and substitution ----------------------------------------
    def derive(self, var: str) -> "RationalFunction":
        return derive(self, var)

    def substitute(self, assignment: Mapping[str, "RationalFunction"], ring: PolyRing | None = None):
        return substitute(self, assignment, ring)

    def degree(self) -> int:
        return max(self.num.degree(), self.den.degree())

    def __str__(self):
        return format_rational(self)

    def __repr__(self):
        return f"RationalFunction({format_rational(self)!r})"


def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    ring = num.ring
    if not num.terms:
        return num, ring.one()
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_one():
            num, den = num.exact_div(g), den.exact_div(g)
    lc = den.lc()
    if lc != 1:
        inv = ring.domain.inv(lc)
        num, den = num.scale(inv), den.scale(inv)
    return num, den


def format_rational(f: RationalFunction) -> str:
    if f.den.is_one():
        return format_poly(f.num)
    ns = format_poly(f.num)
    if len(f.num.terms) > 1:
        ns = f"({ns})"
    ds = format_poly(f.den)
    if not _is_single_gen(f.den):
        ds = f"({ds})"
    return f"{ns}/{ds}"


def derive(f: RationalFunction, var: str) -> RationalFunction:
    """Exact partial derivative by the quotient rule."""
    ring = f.ring
    i = ring.index[var]
    n, d = f.num, f.den
    if d.is_one():
        return RationalFunction(n.derivative(i))
    dd = d.derivative(i)
    dn = n.derivative(i)
    if not dd.terms:
        return RationalFunction(dn, d)
    g = poly_gcd(d, dd)
    e = d.exact_div(g)
    num = dn * e - n * dd.exact_div(g)
    return RationalFunction(num, e * d)


def substitute(
    f: RationalFunction,
    assignment: Mapping[str, RationalFunction],
    ring: PolyRing | None = None,
) -> RationalFunction:
    """Compose ``f`` with ``var -> value``; unassigned variables map to themselves.

    The target ring defaults to the ring of the assigned values (or of ``f``).
    """
    if ring is None:
        ring = next((v.ring for v in assignment.values() if isinstance(v, RationalFunction)), f.ring)
    src = f.ring
    values: list[RationalFunction] = []
    for name in src.variables:
        if name in assignment:
            v = assignment[name]
            if not isinstance(v, RationalFunction):
                v = RationalFunction(v) if isinstance(v, Poly) else RationalFunction.const(ring, v)
            if v.ring != ring:
                raise TypeError(f"substituted value for {name} lives in {v.ring}, expected {ring}")
            values.append(v)
        else:
            if name not in ring.index:
                raise KeyError(f"variable {name!r} has no image in {ring}")
            values.append(RationalFunction.gen(ring, name))
    if src.domain != ring.domain:
        raise TypeError("substitution cannot change the coefficient domain")
    # common-denominator evaluation: n(a)/d(a) with a_i = p_i/q_i equals
    # N~/D~ where both are scaled by prod q_i^{D_i}
    return _eval_scaled(f.num, f.den, values, ring)


def _eval_scaled(num: Poly, den: Poly, values, ring: PolyRing) -> RationalFunction:
    nv = len(values)
    top = [max(num.degree_in(i), den.degree_in(i), 0) for i in range(nv)]
    pnum = [v.num for v in values]
    pden = [v.den for v in values]
    cache: dict = {}

    def power(kind, i, k):
        key = (kind, i, k)
        if key not in cache:
            base = pnum[i] if kind == 0 else pden[i]
            cache[key] = base**k
        return cache[key]

    def scaled(p: Poly) -> Poly:
        total = ring.zero()
        for e, c in p.terms.items():
            t = ring.const(c)
            for i, k in enumerate(e):
                if k:
                    t = t * power(0, i, k)
                if not pden[i].is_one() and top[i] - k:
                    t = t * power(1, i, top[i] - k)
            total = total + t
        return total

    N, D = scaled(num), scaled(den)
    if not D.terms:
        raise ZeroDivisionError("denominator vanishes after substitution")
    return RationalFunction(N, D)


def change_ring(f: RationalFunction, ring: PolyRing) -> RationalFunction:
    """Re-embed ``f`` into a ring with the same domain and a superset of variables."""
    src = f.ring
    if src == ring:
        return f
    if src.domain != ring.domain:
        raise TypeError("change_ring keeps the coefficient domain")
    pos = [ring.index[v] for v in src.variables]

    def move(p: Poly) -> Poly:
        res = {}
        for e, c in p.terms.items():
            ne = [0] * ring.nvars
            for j, k in zip(pos, e):
                ne[j] = k
            res[tuple(ne)] = c
        return Poly._raw(ring, res)

    return RationalFunction(move(f.num), move(f.den), normalized=True)


def reduce_mod_p(f: RationalFunction, p: int) -> RationalFunction:
    """Coefficientwise reduction of a rational function over Q to F_p."""
    if not isinstance(f.ring.domain, Rationals):
        raise TypeError("reduce_mod_p expects a rational function over Q")
    target = f.ring.with_domain(PrimeField(p))

    def red(c):
        c = Fraction(c)
        if c.denominator % p == 0:
            raise BadReduction(p, f"coefficient {c}")
        return c

    num = f.num.map_coefficients(target, red)
    den = f.den.map_coefficients(target, red)
    if not den.terms:
        raise BadReduction(p, "denominator vanishes")
    return RationalFunction(num, den)
