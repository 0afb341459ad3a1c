"""Sparse multivariate polynomials over a coefficient domain.

Terms live in a dict mapping exponent tuples to nonzero coefficients.  The
monomial order is graded lexicographic in the declared variable order; it
fixes leading terms, monic normalisation and printing.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .domain import QQ, Domain


def grlex_key(e: tuple) -> tuple:
    return (sum(e), e)


def _neg_key(e: tuple) -> tuple:
    return (-sum(e), tuple(-x for x in e))


class PolyRing:
    """``domain[variables]``.  Rings compare equal when both parts agree."""

    __slots__ = ("domain", "variables", "index", "nvars", "mod", "_zero_exp")

    def __init__(self, domain: Domain, variables: Sequence[str]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        self.domain = domain
        self.variables = variables
        self.index = {v: i for i, v in enumerate(variables)}
        self.nvars = len(variables)
        self.mod = domain.modulus
        self._zero_exp = (0,) * self.nvars

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.domain == other.domain
            and self.variables == other.variables
        )

    def __hash__(self):
        return hash((self.domain, self.variables))

    def __repr__(self):
        return f"PolyRing({self.domain}, {list(self.variables)})"

    def zero(self) -> "Poly":
        return Poly._raw(self, {})

    def one(self) -> "Poly":
        return Poly._raw(self, {self._zero_exp: 1})

    def const(self, c) -> "Poly":
        c = self.domain.convert(c)
        return Poly(self, {self._zero_exp: c} if c else {})

    def gen(self, name: str) -> "Poly":
        if name not in self.index:
            raise KeyError(f"unknown variable {name!r}")
        e = [0] * self.nvars
        e[self.index[name]] = 1
        return Poly._raw(self, {tuple(e): 1})

    def gens(self) -> list["Poly"]:
        return [self.gen(v) for v in self.variables]

    def monomial(self, exps: Sequence[int], c=1) -> "Poly":
        return Poly(self, {tuple(exps): self.domain.convert(c)})

    def with_domain(self, domain: Domain) -> "PolyRing":
        return PolyRing(domain, self.variables)

    def extend(self, names: Iterable[str]) -> "PolyRing":
        extra = [n for n in names if n not in self.index]
        return PolyRing(self.domain, self.variables + tuple(extra))


def _clean_terms(ring: PolyRing, terms: Mapping[tuple, object]) -> dict:
    mod = ring.mod
    conv = ring.domain.convert
    out = {}
    for e, c in terms.items():
        e = tuple(e)
        if len(e) != ring.nvars:
            raise ValueError(f"exponent {e} does not match {ring.nvars} variables")
        if mod is not None and isinstance(c, int):
            c %= mod
        elif not (mod is None and isinstance(c, (int, Fraction))):
            c = conv(c)
        if c:
            out[e] = c
    return out


class Poly:
    """Immutable sparse polynomial.  ``terms`` must never hold a zero."""

    __slots__ = ("ring", "terms", "_lead")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple, object]):
        self.ring = ring
        self.terms = _clean_terms(ring, terms)
        self._lead = None

    @classmethod
    def _raw(cls, ring: PolyRing, terms: dict) -> "Poly":
        """Trusted constructor: ``terms`` already reduced with no zeros."""
        obj = object.__new__(cls)
        obj.ring = ring
        obj.terms = terms
        obj._lead = None
        return obj

    # -- construction helpers ---------------------------------------------
    def _new(self, terms: dict) -> "Poly":
        mod = self.ring.mod
        if mod is not None:
            terms = {e: c % mod for e, c in terms.items() if c % mod}
        else:
            terms = {e: c for e, c in terms.items() if c}
        return Poly._raw(self.ring, terms)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise TypeError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        return self.ring.const(other)

    # -- predicates --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (
            len(self.terms) == 1 and self.ring._zero_exp in self.terms
        )

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(self.ring._zero_exp) == 1

    def constant_value(self):
        return self.terms.get(self.ring._zero_exp, 0)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        try:
            return self.terms == self.ring.const(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- degree data -------------------------------------------------------
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def support_vars(self) -> set[int]:
        s = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    s.add(i)
        return s

    def lead(self) -> tuple[tuple, object]:
        if self._lead is None:
            if not self.terms:
                raise ValueError("zero polynomial has no leading term")
            e = max(self.terms, key=grlex_key)
            self._lead = (e, self.terms[e])
        return self._lead

    def lc(self):
        return self.lead()[1]

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        res = dict(self.terms)
        for e, c in other.terms.items():
            res[e] = res.get(e, 0) + c
        return self._new(res)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if not other.terms:
            return self
        res = dict(self.terms)
        for e, c in other.terms.items():
            res[e] = res.get(e, 0) - c
        return self._new(res)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "Poly":
        c = self.ring.domain.convert(c)
        if not c:
            return self.ring.zero()
        if c == 1:
            return self
        return self._new({e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return self.ring.zero()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            ((e2, c2),) = b.items()
            if not any(e2):
                return self._new({e: c * c2 for e, c in a.items()})
            return self._new(
                {tuple(x + y for x, y in zip(e, e2)): c * c2 for e, c in a.items()}
            )
        res: dict = {}
        get = res.get
        for e1, c1 in b.items():
            for e2, c2 in a.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                res[e] = get(e, 0) + c1 * c2
        return self._new(res)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_monomial(self, exps: tuple, c=1) -> "Poly":
        return self._new(
            {tuple(x + y for x, y in zip(e, exps)): v * c for e, v in self.terms.items()}
        )

    def derivative(self, i: int) -> "Poly":
        res = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = list(e)
                ne[i] = k - 1
                res[tuple(ne)] = c * k
        return self._new(res)

    def diff(self, name: str) -> "Poly":
        return self.derivative(self.ring.index[name])

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        lc = self.lc()
        if lc == 1:
            return self
        return self.scale(self.ring.domain.inv(lc))

    # -- division ----------------------------------------------------------
    def try_divide(self, d: "Poly"):
        """Exact quotient ``self / d`` or ``None`` when ``d`` does not divide."""
        d = self._coerce(d)
        if not d.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return self
        if d.is_one():
            return self
        ld, lcd = d.lead()
        inv = self.ring.domain.inv(lcd)
        mod = self.ring.mod
        if len(d.terms) == 1:
            q = {}
            for e, c in self.terms.items():
                ne = tuple(x - y for x, y in zip(e, ld))
                if min(ne) < 0:
                    return None
                q[ne] = c * inv
            return self._new(q)
        rem = dict(self.terms)
        heap = [(_neg_key(e), e) for e in rem]
        heapq.heapify(heap)
        q = {}
        dterms = list(d.terms.items())
        while rem:
            _, e = heapq.heappop(heap)
            c = rem.get(e)
            if c is None:
                continue
            qe = tuple(x - y for x, y in zip(e, ld))
            if min(qe) < 0:
                return None
            qc = c * inv
            if mod is not None:
                qc %= mod
            q[qe] = qc
            for de, dc in dterms:
                m = tuple(x + y for x, y in zip(qe, de))
                v = rem.get(m, 0) - qc * dc
                if mod is not None:
                    v %= mod
                if v:
                    if m not in rem:
                        heapq.heappush(heap, (_neg_key(m), m))
                    rem[m] = v
                else:
                    rem.pop(m, None)
        return self._new(q)

    def exact_div(self, d: "Poly") -> "Poly":
        q = self.try_divide(d)
        if q is None:
            raise ArithmeticError("inexact polynomial division")
        return q

    # -- structural helpers ------------------------------------------------
    def split(self, idx: Iterable[int]) -> dict[tuple, "Poly"]:
        """Group terms by the exponents of the variables in ``idx``."""
        idx = tuple(idx)
        groups: dict = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            if any(key):
                ne = list(e)
                for i in idx:
                    ne[i] = 0
                ne = tuple(ne)
            else:
                ne = e
            groups.setdefault(key, {})[ne] = c
        return {k: Poly._raw(self.ring, t) for k, t in groups.items()}

    def monomial_content(self) -> tuple:
        it = iter(self.terms)
        m = list(next(it))
        for e in it:
            for i, k in enumerate(e):
                if k < m[i]:
                    m[i] = k
        return tuple(m)

    def map_coefficients(self, ring: PolyRing, fn) -> "Poly":
        """Apply ``fn`` to every coefficient, landing in ``ring`` (same variables)."""
        if ring.nvars != self.ring.nvars:
            raise ValueError("coefficient map must keep the variable list")
        conv = ring.domain.convert
        res = {}
        for e, c in self.terms.items():
            v = conv(fn(c))
            if v:
                res[e] = v
        return Poly._raw(ring, res)

    def evaluate(self, values: Sequence):
        """Evaluate at a point given as one value per variable (any ring-like)."""
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    # -- printing ----------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def _mono_str(ring: PolyRing, e: tuple) -> str:
    parts = []
    for name, k in zip(ring.variables, e):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def format_poly(f: Poly) -> str:
    """Canonical text in the input grammar; ``parse(format_poly(f)) == f``."""
    if not f.terms:
        return "0"
    dom = f.ring.domain
    out = []
    for n, (e, c) in enumerate(f.sorted_terms()):
        mono = _mono_str(f.ring, e)
        neg = dom.modulus is None and c < 0
        a = -c if neg else c
        astr = dom.format(a)
        if n == 0:
            if neg:
                # unary minus binds tighter than '^' in the grammar; keep it on the coefficient
                out.append(f"-{astr}*{mono}" if mono else f"-{astr}")
            else:
                out.append(mono if (mono and a == 1) else (f"{astr}*{mono}" if mono else astr))
        else:
            body = mono if (mono and a == 1) else (f"{astr}*{mono}" if mono else astr)
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# -- gcd -------------------------------------------------------------------

def _univariate(f: Poly, v: int) -> dict[int, Poly]:
    return {k[0]: c for k, c in f.split((v,)).items()}


def _from_univariate(ring: PolyRing, u: dict[int, Poly], v: int) -> Poly:
    res = {}
    for k, c in u.items():
        for e, val in c.terms.items():
            ne = list(e)
            ne[v] = k
            res[tuple(ne)] = val
    return Poly._raw(ring, res)


def _prem(A: dict, B: dict) -> dict:
    dA, dB = max(A), max(B)
    lcB = B[dB]
    R = dict(A)
    delta = dA - dB + 1
    while R and max(R) >= dB:
        dR = max(R)
        lcR = R[dR]
        shift = dR - dB
        newR = {k: c * lcB for k, c in R.items()}
        for k, c in B.items():
            kk = k + shift
            val = newR.get(kk)
            t = lcR * c
            newR[kk] = -t if val is None else val - t
        R = {k: c for k, c in newR.items() if c.terms}
        delta -= 1
    if delta and R:
        f = lcB**delta
        R = {k: c * f for k, c in R.items()}
    return R


def _content(u: dict[int, Poly]) -> Poly:
    coeffs = sorted(u.values(), key=len)
    g = coeffs[0].monic()
    for c in coeffs[1:]:
        if g.is_one():
            break
        g = poly_gcd(g, c)
    return g


def _subresultant(A: dict, B: dict, ring: PolyRing) -> dict:
    one = ring.one()
    g = h = one
    while True:
        delta = max(A) - max(B)
        R = _prem(A, B)
        if not R:
            return B
        if max(R) == 0:
            return {0: one}
        A = B
        div = g * h**delta
        B = {k: c.exact_div(div) for k, c in R.items()}
        g = A[max(A)]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = (g**delta).exact_div(h ** (delta - 1))


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic greatest common divisor over the coefficient field."""
    if not f.terms:
        return g.monic()
    if not g.terms:
        return f.monic()
    ring = f.ring
    if f.is_constant() or g.is_constant():
        return ring.one()
    if f.terms == g.terms:
        return f.monic()
    mf, mg = f.monomial_content(), g.monomial_content()
    m = tuple(min(a, b) for a, b in zip(mf, mg))
    if any(mf):
        f = f.exact_div(ring.monomial(mf))
    if any(mg):
        g = g.exact_div(ring.monomial(mg))
    core = _gcd_core(f, g)
    if any(m):
        core = core.mul_monomial(m)
    return core.monic()


def _gcd_core(f: Poly, g: Poly) -> Poly:
    ring = f.ring
    if f.is_constant() or g.is_constant():
        return ring.one()
    vf, vg = f.support_vars(), g.support_vars()
    only_f, only_g = vf - vg, vg - vf
    if only_f or only_g:
        pieces = list(f.split(sorted(only_f)).values()) if only_f else [f]
        pieces += list(g.split(sorted(only_g)).values()) if only_g else [g]
        pieces.sort(key=len)
        acc = pieces[0]
        for q in pieces[1:]:
            acc = poly_gcd(acc, q)
            if acc.is_constant():
                return ring.one()
        return acc.monic()
    v = min(vf, key=lambda i: (max(f.degree_in(i), g.degree_in(i)), i))
    F, G = _univariate(f, v), _univariate(g, v)
    cf, cg = _content(F), _content(G)
    if not cf.is_one():
        F = {k: c.exact_div(cf) for k, c in F.items()}
    if not cg.is_one():
        G = {k: c.exact_div(cg) for k, c in G.items()}
    c = poly_gcd(cf, cg)
    if max(F) < max(G):
        F, G = G, F
    H = _subresultant(F, G, ring)
    if max(H) == 0:
        return c
    ch = _content(H)
    if not ch.is_one():
        H = {k: x.exact_div(ch) for k, x in H.items()}
    return (_from_univariate(ring, H, v) * c).monic()


def poly_lcm(f: Poly, g: Poly) -> Poly:
    return (f * g.exact_div(poly_gcd(f, g))).monic()


def to_fraction(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


__all__ = ["PolyRing", "Poly", "poly_gcd", "poly_lcm", "format_poly", "grlex_key", "QQ"]
