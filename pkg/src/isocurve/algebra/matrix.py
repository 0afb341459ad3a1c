"""Square matrices with rational-function entries."""

from __future__ import annotations

from itertools import permutations
from typing import Callable, Sequence

from .polynomial import PolyRing
from .rational import RationalFunction, change_ring, derive, substitute


class RFMatrix:
    """Immutable ``r x r`` matrix over the fraction field of ``ring``."""

    __slots__ = ("ring", "rows", "size")

    def __init__(self, ring: PolyRing, rows: Sequence[Sequence]):
        self.ring = ring
        conv = []
        for row in rows:
            conv.append(tuple(_as_rf(ring, x) for x in row))
        self.rows = tuple(conv)
        self.size = len(self.rows)
        if any(len(r) != self.size for r in self.rows):
            raise ValueError("matrix must be square")
        if self.size == 0:
            raise ValueError("matrix size must be positive")

    @classmethod
    def zero(cls, ring: PolyRing, r: int) -> "RFMatrix":
        z = RationalFunction(ring.zero())
        return cls(ring, [[z] * r for _ in range(r)])

    @classmethod
    def identity(cls, ring: PolyRing, r: int) -> "RFMatrix":
        z, o = RationalFunction(ring.zero()), RationalFunction(ring.one())
        return cls(ring, [[o if i == j else z for j in range(r)] for i in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self):
        for row in self.rows:
            yield from row

    def map(self, fn: Callable[[RationalFunction], RationalFunction], ring: PolyRing | None = None):
        return RFMatrix(ring or self.ring, [[fn(x) for x in row] for row in self.rows])

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.entries())

    def __eq__(self, other):
        return isinstance(other, RFMatrix) and self.ring == other.ring and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def _check(self, other: "RFMatrix"):
        if self.size != other.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other):
        self._check(other)
        return RFMatrix(
            self.ring, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)]
        )

    def __sub__(self, other):
        self._check(other)
        return RFMatrix(
            self.ring, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)]
        )

    def __neg__(self):
        return RFMatrix(self.ring, [[-a for a in r] for r in self.rows])

    def scale(self, c) -> "RFMatrix":
        return RFMatrix(self.ring, [[a * c for a in r] for r in self.rows])

    def __mul__(self, other):
        if not isinstance(other, RFMatrix):
            return self.scale(other)
        self._check(other)
        cols = list(zip(*other.rows))
        zero = RationalFunction(self.ring.zero())
        out = []
        for row in self.rows:
            new = []
            for col in cols:
                acc = zero
                for a, b in zip(row, col):
                    if a.num.terms and b.num.terms:
                        acc = acc + a * b
                new.append(acc)
            out.append(new)
        return RFMatrix(self.ring, out)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, n: int) -> "RFMatrix":
        result = RFMatrix.identity(self.ring, self.size)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def commutator(self, other: "RFMatrix") -> "RFMatrix":
        return self * other - other * self

    def trace(self) -> RationalFunction:
        acc = RationalFunction(self.ring.zero())
        for i in range(self.size):
            acc = acc + self.rows[i][i]
        return acc

    def derive(self, var: str) -> "RFMatrix":
        return self.map(lambda x: derive(x, var))

    def substitute(self, assignment, ring: PolyRing | None = None) -> "RFMatrix":
        target = ring or next(
            (v.ring for v in assignment.values() if isinstance(v, RationalFunction)), self.ring
        )
        return self.map(lambda x: substitute(x, assignment, target), target)

    def change_ring(self, ring: PolyRing) -> "RFMatrix":
        return self.map(lambda x: change_ring(x, ring), ring)

    def transpose(self) -> "RFMatrix":
        return RFMatrix(self.ring, list(zip(*self.rows)))

    def charpoly(self) -> list[RationalFunction]:
        """Coefficients ``[1, c_1, ..., c_r]`` of ``det(t - M)`` (Berkowitz, division free)."""
        return berkowitz(self)

    def det(self) -> RationalFunction:
        c = berkowitz(self)
        return c[-1] if self.size % 2 == 0 else -c[-1]

    def inverse(self) -> "RFMatrix":
        """Gauss-Jordan inverse over the rational-function field."""
        n = self.size
        one = RationalFunction(self.ring.one())
        zero = RationalFunction(self.ring.zero())
        aug = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col]), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = aug[col][col].inverse()
            aug[col] = [x * inv for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return RFMatrix(self.ring, [row[n:] for row in aug])

    def max_degree(self) -> int:
        return max(x.degree() for x in self.entries())

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.rows]

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(r) + "]" for r in self.to_strings()) + "]"

    __repr__ = __str__


def _as_rf(ring: PolyRing, x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        if x.ring != ring:
            raise TypeError(f"entry lives in {x.ring}, expected {ring}")
        return x
    return RationalFunction.const(ring, x)


def berkowitz(M: RFMatrix) -> list[RationalFunction]:
    """Characteristic polynomial coefficients of ``det(t I - M)`` in any characteristic."""
    n = M.size
    ring = M.ring
    one = RationalFunction(ring.one())
    zero = RationalFunction(ring.zero())
    a = M.rows
    # vector of coefficients, highest degree first
    poly = [one, -a[0][0]]
    for k in range(1, n):
        # M_k = leading k x k block; R row, C column, akk corner
        R = [a[k][j] for j in range(k)]
        C = [a[i][k] for i in range(k)]
        Ak = [list(a[i][:k]) for i in range(k)]
        # Toeplitz column: 1, -a_kk, -R C, -R A C, -R A^2 C, ...
        col = [one, -a[k][k]]
        v = C
        for _ in range(k):
            s = zero
            for x, y in zip(R, v):
                if x and y:
                    s = s + x * y
            col.append(-s)
            v = [sum_products(Ak[i], v, zero) for i in range(k)]
        new = []
        for i in range(k + 2):
            s = zero
            for j in range(len(poly)):
                if 0 <= i - j < len(col):
                    s = s + col[i - j] * poly[j]
            new.append(s)
        poly = new
    return poly


def sum_products(row, v, zero):
    s = zero
    for x, y in zip(row, v):
        if x and y:
            s = s + x * y
    return s


def det_leibniz(M: RFMatrix) -> RationalFunction:
    """Permutation-sum determinant; slow, used as an independent check."""
    n = M.size
    total = RationalFunction(M.ring.zero())
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = RationalFunction(M.ring.one())
        for i in range(n):
            term = term * M.rows[i][perm[i]]
        total = total + term if sign > 0 else total - term
    return total
