"""Mapping-class-group dynamics on integral points of the Fricke cubic.

Points live in ``Z[alpha] = Z[a]/(m)`` for a monic integer polynomial ``m``;
``m = a`` gives the rational integers.  Embedding sizes are bounded
rigorously: root approximations from mpmath are certified by Smith's
inclusion discs, evaluated in exact rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .algebra import QQ, Poly, PolyRing, format_poly, parse_in_ring
from .limits import check_time, current


class PrecisionExhausted(ArithmeticError):
    pass


def _as_int(c) -> int:
    c = Fraction(c)
    if c.denominator != 1:
        raise ValueError(f"coefficient {c} is not an integer")
    return c.numerator


def _sqrt_upper(x: Fraction) -> Fraction:
    """Rational ``u >= sqrt(x)`` with relative error below ``2^-60``."""
    if x <= 0:
        return Fraction(0)
    scale = 1 << 120
    n = x.numerator * scale * scale // x.denominator + 1
    r = math.isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r, scale)


def _sqrt_lower(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    scale = 1 << 120
    return Fraction(math.isqrt(x.numerator * scale * scale // x.denominator), scale)


class _Gauss:
    """Exact Gaussian rational."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        return _Gauss(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return _Gauss(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return _Gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im


def _mpf_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    man = -int(man) if sign else int(man)
    return Fraction(man * (1 << exp)) if exp >= 0 else Fraction(man, 1 << -exp)


def _horner(coeffs: list[int], z: _Gauss) -> _Gauss:
    acc = _Gauss(0)
    for c in reversed(coeffs):
        acc = acc * z + _Gauss(c)
    return acc


@dataclass(frozen=True)
class RootDisc:
    """``|root - center| <= radius``; ``center`` as (re, im)."""

    center: tuple[Fraction, Fraction]
    radius: Fraction

    def to_json(self) -> dict:
        return {"center": [float(self.center[0]), float(self.center[1])], "radius": float(self.radius)}


def isolate_roots(coeffs: list[int], dps: int) -> list[RootDisc]:
    """Pairwise disjoint discs, one around each root of the monic ``coeffs`` (low degree first)."""
    d = len(coeffs) - 1
    if d == 1:
        return [RootDisc((Fraction(-coeffs[0]), Fraction(0)), Fraction(0))]
    with mpmath.workdps(dps):
        approx = mpmath.polyroots(list(reversed(coeffs)), maxsteps=20 * d + 50, extraprec=2 * dps)
        zs = [_Gauss(_mpf_fraction(z.real), _mpf_fraction(z.imag)) for z in map(mpmath.mpc, approx)]
    radii = []
    for i, z in enumerate(zs):
        prod = Fraction(1)
        for j, w in enumerate(zs):
            if j != i:
                prod *= (z - w).abs2()
        if prod == 0:
            raise PrecisionExhausted(f"root approximations collide at {dps} digits")
        radii.append(_sqrt_upper(d * d * _horner(coeffs, z).abs2() / prod))
    for i, j in itertools.combinations(range(d), 2):
        if (radii[i] + radii[j]) ** 2 >= (zs[i] - zs[j]).abs2():
            raise PrecisionExhausted(f"inclusion discs overlap at {dps} digits")
    return [RootDisc((z.re, z.im), r) for z, r in zip(zs, radii)]


def _taylor(coeffs: list[int]) -> list[list[int]]:
    """Taylor coefficient polynomials ``e^(j)/j!`` of an integer polynomial."""
    out = []
    d = len(coeffs) - 1
    for j in range(d + 1):
        out.append([math.comb(k, j) * coeffs[k] for k in range(j, d + 1)])
    return out


def _disc_range(coeffs: list[int], disc: RootDisc) -> tuple[Fraction, Fraction]:
    """Lower and upper bounds for ``|e(zeta)|`` over the disc."""
    z = _Gauss(*disc.center)
    tay = _taylor(coeffs)
    centre = _horner(tay[0], z).abs2()
    tail = Fraction(0)
    rp = Fraction(1)
    for t in tay[1:]:
        rp *= disc.radius
        if rp == 0:
            break
        tail += _sqrt_upper(_horner(t, z).abs2()) * rp
    return max(Fraction(0), _sqrt_lower(centre) - tail), _sqrt_upper(centre) + tail


class NumberRing:
    """``Z[a]/(m)`` with ``m`` monic integral."""

    def __init__(self, minpoly: str = "a", generator: str = "a"):
        self.generator = generator
        self.poly_ring = PolyRing(QQ, [generator])
        m = parse_in_ring(minpoly, self.poly_ring)
        if not m.is_polynomial():
            raise ValueError("minimal polynomial must be a polynomial")
        num = m.num
        deg = num.degree()
        if deg < 1:
            raise ValueError("minimal polynomial must have positive degree")
        coeffs = [0] * (deg + 1)
        for (e,), c in num.terms.items():
            coeffs[e] = _as_int(c)
        if coeffs[-1] != 1:
            raise ValueError("minimal polynomial must be monic")
        self.minpoly_text = minpoly
        self.m = tuple(coeffs)
        self.degree = deg
        self._discs: list[RootDisc] | None = None
        self._dps = 30

    def __eq__(self, other):
        return isinstance(other, NumberRing) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def reduce(self, coeffs) -> tuple[int, ...]:
        c = list(coeffs)
        d = self.degree
        for k in range(len(c) - 1, d - 1, -1):
            lead = c[k]
            if lead:
                for i in range(d):
                    c[k - d + i] -= lead * self.m[i]
            c[k] = 0
        c = c[:d] + [0] * max(0, d - len(c))
        return tuple(c)

    def element(self, text) -> tuple[int, ...]:
        if isinstance(text, int):
            return self.reduce([text])
        f = parse_in_ring(str(text), self.poly_ring)
        if not f.is_polynomial():
            raise ValueError(f"{text!r} is not a ring element")
        deg = max(f.num.degree(), 0)
        coeffs = [0] * (deg + 1)
        for (e,), c in f.num.terms.items():
            coeffs[e] = _as_int(c)
        return self.reduce(coeffs)

    def add(self, u, v):
        return tuple(a + b for a, b in zip(u, v))

    def sub(self, u, v):
        return tuple(a - b for a, b in zip(u, v))

    def mul(self, u, v):
        prod = [0] * (2 * self.degree - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    prod[i + j] += a * b
        return self.reduce(prod)

    def const(self, c: int):
        return self.reduce([c])

    def format(self, u) -> str:
        return format_poly(Poly(self.poly_ring, {(k,): c for k, c in enumerate(u) if c}))

    def discs(self, dps: int | None = None) -> list[RootDisc]:
        if dps is not None and dps > self._dps:
            self._discs = None
            self._dps = dps
        if self._discs is None:
            dps = self._dps
            while True:
                try:
                    self._discs = isolate_roots(list(self.m), dps)
                    break
                except PrecisionExhausted:
                    dps *= 2
                    if dps > 4000:
                        raise
            self._dps = dps
        return self._discs

    def embedding_range(self, u, dps: int | None = None) -> tuple[Fraction, Fraction]:
        """Bounds on ``max_i |iota_i(u)|``."""
        if not any(u):
            return Fraction(0), Fraction(0)
        if self.degree == 1:
            v = Fraction(abs(u[0]))
            return v, v
        lo = hi = Fraction(0)
        for disc in self.discs(dps):
            a, b = _disc_range(list(u), disc)
            lo, hi = max(lo, a), max(hi, b)
        return lo, hi


INTEGERS = NumberRing()

SLACK = Fraction(101, 100)


@dataclass(frozen=True)
class EmbeddingBound:
    upper: Fraction
    lower: Fraction
    discs: tuple[RootDisc, ...] = ()

    @property
    def value(self) -> float:
        x = float(self.upper)
        return math.nextafter(x, math.inf) if Fraction(x) < self.upper else x

    def __float__(self):
        return self.value

    def to_json(self) -> dict:
        return {
            "upper": self.value,
            "lower": float(self.lower),
            "root_discs": [d.to_json() for d in self.discs],
        }


@dataclass(frozen=True)
class NumberRingPoint:
    ring: NumberRing
    coords: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.ring.reduce(c) for c in self.coords))
        if len(self.coords) != 3:
            raise ValueError("a Fricke point has three coordinates")

    @classmethod
    def integers(cls, x: int, y: int, z: int) -> "NumberRingPoint":
        return cls(INTEGERS, tuple(INTEGERS.const(c) for c in (x, y, z)))

    @classmethod
    def parse(cls, ring: NumberRing, coords) -> "NumberRingPoint":
        return cls(ring, tuple(ring.element(c) for c in coords))

    @property
    def key(self):
        return self.coords

    def to_strings(self) -> list[str]:
        return [self.ring.format(c) for c in self.coords]

    def __str__(self):
        return "(" + ", ".join(self.to_strings()) + ")"


def kappa(pt: NumberRingPoint):
    """``x^2 + y^2 + z^2 - xyz - 2`` as a ring element."""
    R = pt.ring
    x, y, z = pt.coords
    s = R.add(R.add(R.mul(x, x), R.mul(y, y)), R.mul(z, z))
    return R.sub(R.sub(s, R.mul(R.mul(x, y), z)), R.const(2))


@dataclass(frozen=True)
class FrickeSurface:
    """The level set ``kappa = k``."""

    ring: NumberRing
    k: tuple[int, ...]

    @classmethod
    def through(cls, pt: NumberRingPoint) -> "FrickeSurface":
        return cls(pt.ring, kappa(pt))

    def contains(self, pt: NumberRingPoint) -> bool:
        return pt.ring == self.ring and kappa(pt) == self.k


@dataclass(frozen=True)
class MCGMove:
    """A coordinate permutation or the Vieta involution ``z -> xy - z``."""

    name: str
    perm: tuple[int, int, int] | None = None

    def __call__(self, pt: NumberRingPoint) -> NumberRingPoint:
        return apply_move(pt, self)


PERMUTATIONS = (
    MCGMove("id", (0, 1, 2)),
    MCGMove("(xy)", (1, 0, 2)),
    MCGMove("(xz)", (2, 1, 0)),
    MCGMove("(yz)", (0, 2, 1)),
    MCGMove("(xyz)", (1, 2, 0)),
    MCGMove("(xzy)", (2, 0, 1)),
)
VIETA = MCGMove("vieta")
MOVES = PERMUTATIONS + (VIETA,)


def apply_move(pt: NumberRingPoint, mv: MCGMove) -> NumberRingPoint:
    R = pt.ring
    x, y, z = pt.coords
    if mv.perm is None:
        out = NumberRingPoint(R, (x, y, R.sub(R.mul(x, y), z)))
    else:
        c = pt.coords
        out = NumberRingPoint(R, tuple(c[i] for i in mv.perm))
    before, after = kappa(pt), kappa(out)
    if before != after:
        raise AssertionError(f"move {mv.name} changed kappa on {pt}")
    return out


def embedding_sup_norm(pt: NumberRingPoint, slack: Fraction = SLACK, max_dps: int = 2000) -> EmbeddingBound:
    """Rigorous ``U >= max |iota_i(coord)|`` with ``U <= slack * max``."""
    R = pt.ring
    dps = None
    while True:
        lo = hi = Fraction(0)
        for c in pt.coords:
            a, b = R.embedding_range(c, dps)
            lo, hi = max(lo, a), max(hi, b)
        if hi <= slack * lo or hi == 0:
            discs = tuple(R.discs()) if R.degree > 1 else ()
            return EmbeddingBound(hi, lo, discs)
        dps = 2 * R._dps
        if dps > max_dps:
            raise PrecisionExhausted(f"could not reach slack {slack} within {max_dps} digits")


def _exceeds(pt: NumberRingPoint, B: Fraction) -> tuple[bool, EmbeddingBound]:
    """Decide ``max |iota| > B`` rigorously, refining precision when the bound straddles ``B``."""
    bound = embedding_sup_norm(pt)
    dps = pt.ring._dps
    while bound.lower <= B < bound.upper:
        dps *= 2
        if dps > 4000:
            raise PrecisionExhausted(f"cannot separate the embedding norm of {pt} from {B}")
        pt.ring.discs(dps)
        bound = embedding_sup_norm(pt)
    return bound.lower > B, bound


@dataclass
class OrbitResult:
    status: str  # "finite" | "exceeded" | "capped"
    start: NumberRingPoint
    height_bound: Fraction
    expanded: int
    orbit: list[NumberRingPoint] = field(default_factory=list)
    moves: dict = field(default_factory=dict)
    witness: NumberRingPoint | None = None
    witness_bound: EmbeddingBound | None = None
    path: list[tuple[str, NumberRingPoint]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.orbit)

    def verdict(self) -> str:
        if self.status == "finite":
            return f"finite orbit of size {self.size}"
        if self.status == "exceeded":
            return f"height bound exceeded at {self.witness}"
        return f"node cap reached after {self.expanded} expansions"

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "verdict": self.verdict(),
            "start": self.start.to_strings(),
            "height_bound": str(self.height_bound),
            "expanded": self.expanded,
        }
        if self.status == "finite":
            out["orbit_size"] = self.size
            out["orbit"] = [p.to_strings() for p in self.orbit]
            out["move_table"] = {
                ",".join(p.to_strings()): {m: ",".join(q.to_strings()) for m, q in row.items()}
                for p, row in ((p, self.moves[p.key]) for p in self.orbit)
            }
        if self.status == "exceeded":
            out["witness"] = self.witness.to_strings()
            out["witness_bound"] = self.witness_bound.to_json()
            out["path"] = [{"move": m, "point": p.to_strings()} for m, p in self.path]
        return out


def _orbit_cap(B: Fraction, deg: int) -> int:
    return (2 * math.floor(B) + 1) ** (3 * deg)


def orbit_search(pt: NumberRingPoint, height_bound, node_cap: int | None = None, moves=MOVES) -> OrbitResult:
    """Breadth-first closure of ``pt`` under ``moves``."""
    B = Fraction(height_bound)
    if B <= 0:
        raise ValueError("height bound must be positive")
    cap = current().node_cap if node_cap is None else int(node_cap)
    if cap <= 0:
        raise ValueError("node cap must be positive")
    exceeded, bound = _exceeds(pt, B)
    if exceeded:
        return OrbitResult("exceeded", pt, B, 0, witness=pt, witness_bound=bound, path=[("start", pt)])
    parent: dict = {pt.key: None}
    points = {pt.key: pt}
    table: dict = {}
    queue = deque([pt])
    expanded = 0
    while queue:
        if expanded >= cap:
            return OrbitResult("capped", pt, B, expanded)
        check_time()
        cur = queue.popleft()
        expanded += 1
        row = {}
        for mv in moves:
            nxt = apply_move(cur, mv)
            row[mv.name] = nxt
            if nxt.key in points:
                continue
            parent[nxt.key] = (cur.key, mv.name)
            points[nxt.key] = nxt
            exceeded, bound = _exceeds(nxt, B)
            if exceeded:
                return OrbitResult(
                    "exceeded", pt, B, expanded, witness=nxt, witness_bound=bound, path=_path(parent, points, nxt.key)
                )
            queue.append(nxt)
        table[cur.key] = row
    orbit = [points[k] for k in sorted(points)]
    limit = _orbit_cap(B, pt.ring.degree)
    if len(orbit) > limit:
        raise AssertionError(f"orbit of size {len(orbit)} exceeds the lattice bound {limit}")
    return OrbitResult("finite", pt, B, expanded, orbit=orbit, moves=table)


def _path(parent, points, key):
    out = []
    while parent[key] is not None:
        prev, mv = parent[key]
        out.append((mv, points[key]))
        key = prev
    out.append(("start", points[key]))
    return out[::-1]


def orbit_is_closed(res: OrbitResult, moves=MOVES) -> bool:
    keys = {p.key for p in res.orbit}
    return all(apply_move(p, mv).key in keys for p in res.orbit for mv in moves)


def random_word(rng, length: int, moves=MOVES) -> list[MCGMove]:
    return [rng.choice(moves) for _ in range(length)]


def apply_word(pt: NumberRingPoint, word) -> NumberRingPoint:
    for mv in word:
        pt = apply_move(pt, mv)
    return pt


__all__ = [
    "EmbeddingBound",
    "FrickeSurface",
    "INTEGERS",
    "MCGMove",
    "MOVES",
    "NumberRing",
    "NumberRingPoint",
    "OrbitResult",
    "PERMUTATIONS",
    "PrecisionExhausted",
    "RootDisc",
    "VIETA",
    "apply_move",
    "apply_word",
    "embedding_sup_norm",
    "isolate_roots",
    "kappa",
    "orbit_is_closed",
    "orbit_search",
    "random_word",
]
