"""Coefficient domains: prime fields, integers mod p^2 and the rationals.

Polynomials store raw coefficients (``int`` residues or ``Fraction``) and ask
their domain for the few operations that differ between domains.  The
:class:`Scalar` wrapper is the public, self-describing form of a single
coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class BadReduction(ArithmeticError):
    """A rational coefficient cannot be reduced modulo ``p``."""

    def __init__(self, p: int, detail: str = ""):
        self.p = p
        msg = f"bad reduction at p = {p}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes ``p`` with ``lo <= p <= hi``."""
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"prime field modulus must be prime, got {self.p}")

    @property
    def modulus(self) -> int:
        return self.p

    @property
    def characteristic(self) -> int:
        return self.p

    is_field = True

    def convert(self, value) -> int:
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise BadReduction(self.p, f"denominator of {value}")
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        return int(value) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in F_%d" % self.p)
        return pow(a, -1, self.p)

    def format(self, a: int) -> str:
        return str(a)

    def to_json(self) -> dict:
        return {"kind": "Fp", "p": self.p}

    def __str__(self):
        return f"F_{self.p}"


@dataclass(frozen=True)
class IntegersModP2:
    """``Z/p^2``; a ring, used only for polynomial Frobenius lifts."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")

    @property
    def modulus(self) -> int:
        return self.p * self.p

    @property
    def characteristic(self) -> int:
        return self.p * self.p

    is_field = False

    def convert(self, value) -> int:
        m = self.modulus
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise BadReduction(self.p, f"denominator of {value}")
            return value.numerator * pow(value.denominator, -1, m) % m
        return int(value) % m

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"{a} is not a unit mod {self.modulus}")
        return pow(a, -1, self.modulus)

    def format(self, a: int) -> str:
        return str(a)

    def to_json(self) -> dict:
        return {"kind": "Zp2", "p": self.p}

    def __str__(self):
        return f"Z/{self.p}^2"


@dataclass(frozen=True)
class Rationals:
    modulus = None
    characteristic = 0
    is_field = True

    def convert(self, value) -> Fraction:
        return Fraction(value)

    def inv(self, a: Fraction) -> Fraction:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in Q")
        return 1 / Fraction(a)

    def format(self, a: Fraction) -> str:
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def to_json(self) -> dict:
        return {"kind": "Q"}

    def __str__(self):
        return "Q"


QQ = Rationals()
Domain = Union[PrimeField, IntegersModP2, Rationals]


def domain_from_json(spec: dict) -> Domain:
    kind = spec.get("kind")
    if kind == "Q":
        return QQ
    if kind == "Fp":
        return PrimeField(int(spec["p"]))
    if kind == "Zp2":
        return IntegersModP2(int(spec["p"]))
    raise ValueError(f"unknown domain kind {kind!r}")


@dataclass(frozen=True)
class Scalar:
    """A single coefficient tagged with its domain, in canonical form."""

    domain: Domain
    value: Union[int, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "value", self.domain.convert(self.value))

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.domain != self.domain:
                raise TypeError(f"domain mismatch: {self.domain} vs {other.domain}")
            return other
        return Scalar(self.domain, other)

    def __add__(self, other):
        return Scalar(self.domain, self.value + self._coerce(other).value)

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.domain, self.value - self._coerce(other).value)

    def __rsub__(self, other):
        return Scalar(self.domain, self._coerce(other).value - self.value)

    def __mul__(self, other):
        return Scalar(self.domain, self.value * self._coerce(other).value)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(self.domain, -self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        return Scalar(self.domain, self.value * self.domain.inv(o.value))

    def __pow__(self, n: int):
        if self.domain.modulus is not None:
            return Scalar(self.domain, pow(self.value, n, self.domain.modulus))
        return Scalar(self.domain, self.value**n)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.domain == other.domain and self.value == other.value
        try:
            return self.value == self.domain.convert(other)
        except (TypeError, ValueError, BadReduction):
            return False

    def __hash__(self):
        return hash((self.domain, self.value))

    def __bool__(self):
        return self.value != 0

    def __str__(self):
        return self.domain.format(self.value)
