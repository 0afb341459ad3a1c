"""Exact arithmetic: coefficient domains, sparse polynomials, rational functions."""

from .domain import (
    QQ,
    BadReduction,
    IntegersModP2,
    PrimeField,
    Rationals,
    Scalar,
    domain_from_json,
    is_prime,
    primes_in_range,
)
from .matrix import RFMatrix, berkowitz, det_leibniz
from .parser import ParseError, UnknownVariableError, parse_expression, parse_in_ring
from .polynomial import Poly, PolyRing, format_poly, poly_gcd, poly_lcm
from .rational import RationalFunction, change_ring, derive, reduce_mod_p, substitute

__all__ = [
    "QQ", "BadReduction", "IntegersModP2", "PrimeField", "Rationals", "Scalar",
    "domain_from_json", "is_prime", "primes_in_range", "RFMatrix", "berkowitz",
    "det_leibniz", "ParseError", "UnknownVariableError", "parse_expression",
    "parse_in_ring", "Poly", "PolyRing", "format_poly", "poly_gcd", "poly_lcm",
    "RationalFunction", "change_ring", "derive", "reduce_mod_p", "substitute",
]
