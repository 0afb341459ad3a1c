"""Inverse Cartier transform on one-variable charts in characteristic p.

A Frobenius lift on the chart ``x`` is ``x -> x^p + p f(x)`` over ``Z/p^2``.
Dividing its pullback of ``dx`` by ``p`` gives the divided Frobenius
``zeta(F* dx) = (x^(p-1) + f'(x)) dx``.  For nilpotent Higgs data ``Theta``
the inverse Cartier transform on the chart is ``d - zeta(F* Theta)``, i.e.
the connection matrix ``-Theta(x^p) (x^(p-1) + f'(x))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from .algebra import (
    IntegersModP2,
    Poly,
    PolyRing,
    PrimeField,
    RationalFunction,
    RFMatrix,
    change_ring,
    substitute,
)
from .connection import FlatConnection, gauge_transform, nilpotency_order, p_curvature


class NilpotenceBoundError(ValueError):
    pass


@dataclass(frozen=True)
class FrobeniusLift:
    """``x -> x^p + p f(x)``; ``f`` is a polynomial over ``F_p`` in the chart variable."""

    var: str
    f: RationalFunction
    p: int

    def __post_init__(self):
        if not self.f.is_polynomial():
            raise ValueError("the lift perturbation must be a polynomial")
        if self.f.ring.domain != PrimeField(self.p):
            raise ValueError(f"the lift perturbation must live over F_{self.p}")
        if self.var not in self.f.ring.index:
            raise ValueError(f"{self.var!r} is not a variable of the lift ring")

    @property
    def ring(self) -> PolyRing:
        return self.f.ring

    @classmethod
    def standard(cls, ring: PolyRing, var: str = "x") -> "FrobeniusLift":
        return cls(var, RationalFunction(ring.zero()), ring.domain.characteristic)

    def lift_polynomial(self) -> Poly:
        """The lift ``x^p + p f~(x)`` as a polynomial over ``Z/p^2``."""
        ring2 = self.ring.with_domain(IntegersModP2(self.p))
        x = ring2.gen(self.var)
        lifted = Poly(ring2, {e: int(c) for e, c in self.f.num.terms.items()})
        return x**self.p + lifted.scale(self.p)

    def zeta_dx(self) -> RationalFunction:
        """Coefficient of ``dx`` in ``zeta(F* dx)``: ``x^(p-1) + f'(x)``."""
        x = self.ring.gen(self.var)
        return RationalFunction(x ** (self.p - 1)) + self.f.derive(self.var)

    def zeta_dx_via_lift(self) -> RationalFunction:
        """Same coefficient computed by differentiating the lift mod ``p^2`` and dividing by ``p``."""
        d = self.lift_polynomial().diff(self.var)
        terms = {}
        for e, c in d.terms.items():
            if c % self.p:
                raise ArithmeticError("derivative of a Frobenius lift must be divisible by p")
            terms[e] = (c // self.p) % self.p
        return RationalFunction(Poly(self.ring, {e: c for e, c in terms.items() if c}))


def frobenius_twist(M: RFMatrix, var: str, p: int) -> RFMatrix:
    """Substitute ``var -> var^p`` entrywise."""
    x = RationalFunction.gen(M.ring, var)
    return M.substitute({var: x**p}, M.ring)


def divided_frobenius(lift: FrobeniusLift, g: RationalFunction) -> RationalFunction:
    """Coefficient of ``dx`` in ``zeta(F*(g dx))`` = ``g(x^p) (x^(p-1) + f'(x))``."""
    x = RationalFunction.gen(lift.ring, lift.var)
    return substitute(g, {lift.var: x**lift.p}, lift.ring) * lift.zeta_dx()


def _check_nilpotence(theta: RFMatrix, bound: int, what: str) -> int:
    order = nilpotency_order(theta)
    if order is None or order > bound:
        raise NilpotenceBoundError(f"{what} needs nilpotence order <= {bound}, got {order or 'not nilpotent'}")
    return order


def inverse_cartier_matrix(theta: RFMatrix, lift: FrobeniusLift) -> RFMatrix:
    return frobenius_twist(theta, lift.var, lift.p).scale(-lift.zeta_dx())


def inverse_cartier_chart(theta: RFMatrix, lift: FrobeniusLift, p: int) -> FlatConnection:
    """``d - zeta(F* Theta)`` as a connection with matrix ``-Theta(x^p)(x^(p-1) + f')``."""
    if p != lift.p:
        raise ValueError(f"lift is for p = {lift.p}, got p = {p}")
    _check_nilpotence(theta, p - 1, "the inverse Cartier transform")
    A = inverse_cartier_matrix(theta, lift)
    return FlatConnection(theta.ring, (lift.var,), {lift.var: A})


@dataclass
class CheckResult:
    passed: bool
    discrepancy: RFMatrix | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        out = {"pass": self.passed}
        if self.discrepancy is not None and not self.passed:
            out["discrepancy"] = self.discrepancy.to_strings()
        out.update(self.details)
        return out


def ov_check(theta: RFMatrix, lift: FrobeniusLift, p: int, degree_cap: int | None = None) -> CheckResult:
    """p-curvature of the inverse Cartier transform against the Frobenius twist ``Theta(x^p)``."""
    conn = inverse_cartier_chart(theta, lift, p)
    psi = p_curvature(conn, lift.var, p, degree_cap)
    twist = frobenius_twist(theta, lift.var, p)
    diff = psi - twist
    return CheckResult(
        diff.is_zero(),
        diff,
        {"psi": psi.to_strings(), "frobenius_twist": twist.to_strings(), "connection": conn[lift.var].to_strings()},
    )


def truncated_exp(X: RFMatrix, p: int) -> RFMatrix:
    """``sum_{i<p} X^i / i!``."""
    dom = X.ring.domain
    term = RFMatrix.identity(X.ring, X.size)
    total = term
    for i in range(1, p):
        term = term * X
        if term.is_zero():
            break
        total = total + term.scale(dom.inv(dom.convert(factorial(i))))
    return total


def gluing_matrix(theta: RFMatrix, lift1: FrobeniusLift, lift2: FrobeniusLift, p: int) -> RFMatrix:
    """``G = exp((f_2 - f_1) Theta(x^p))`` truncated below degree ``p``."""
    if lift1.var != lift2.var or lift1.ring != lift2.ring:
        raise ValueError("lifts must share the chart")
    h = lift2.f - lift1.f
    return truncated_exp(frobenius_twist(theta, lift1.var, p).scale(h), p)


def change_of_lift_check(
    theta: RFMatrix, lift1: FrobeniusLift, lift2: FrobeniusLift, p: int
) -> CheckResult:
    """``A_2 = G A_1 G^-1 - (dG) G^-1`` for the truncated-exponential gluing ``G``."""
    _check_nilpotence(theta, (p - 1) // 2, "change of lift")
    A1 = inverse_cartier_matrix(theta, lift1)
    A2 = inverse_cartier_matrix(theta, lift2)
    G = gluing_matrix(theta, lift1, lift2, p)
    glued = gauge_transform(A1, G, lift1.var)
    diff = glued - A2
    return CheckResult(diff.is_zero(), diff, {"G": G.to_strings()})


def _lambda_name(ring: PolyRing) -> str:
    name = "lam"
    while name in ring.index:
        name += "_"
    return name


@dataclass
class CanonicalSectionFamily:
    theta: RFMatrix
    lift: FrobeniusLift
    p: int
    lam: str
    ring: PolyRing
    A: RFMatrix
    psi: RFMatrix

    @property
    def theta_tilde(self) -> RFMatrix:
        lam = RationalFunction.gen(self.ring, self.lam)
        return self.psi.map(lambda x: x / lam)

    def at(self, value):
        """Specialise ``lambda`` to a scalar; returns ``(A, theta_tilde)``."""
        c = RationalFunction.const(self.ring, value)
        sub = {self.lam: c}
        return self.A.substitute(sub, self.ring), self.theta_tilde.substitute(sub, self.ring)

    def conjugate_point(self) -> "ConjugatePoint":
        return ConjugatePoint(self.A, self.theta_tilde, RationalFunction.gen(self.ring, self.lam), self.p, self.lift.var)


def canonical_section(theta: RFMatrix, lift: FrobeniusLift, p: int, degree_cap: int | None = None) -> CanonicalSectionFamily:
    """Inverse Cartier transform of ``(E, lambda Theta)`` over ``F_p(lambda)(x)``."""
    _check_nilpotence(theta, p - 1, "the canonical section")
    lam = _lambda_name(theta.ring)
    ring = theta.ring.extend([lam])
    th = theta.change_ring(ring)
    lift_l = FrobeniusLift(lift.var, change_ring(lift.f, ring), p)
    A = inverse_cartier_matrix(th, lift_l).scale(RationalFunction.gen(ring, lam))
    conn = FlatConnection(ring, (lift.var,), {lift.var: A})
    psi = p_curvature(conn, lift.var, p, degree_cap)
    return CanonicalSectionFamily(th, lift_l, p, lam, ring, A, psi)


def _lambda_divisible(M: RFMatrix, lam: str) -> bool:
    zero = {lam: RationalFunction(M.ring.zero())}
    for x in M.entries():
        q = x / RationalFunction.gen(M.ring, lam)
        if substitute(RationalFunction(q.den), zero, M.ring).is_zero():
            return False
    return True


def nonabelian_katz_check(theta: RFMatrix, lift: FrobeniusLift, p: int, degree_cap: int | None = None) -> CheckResult:
    """Psi vanishes at lambda = 0, is lambda-divisible, and Psi/lambda at 0 is ``Theta(x^p)``."""
    fam = canonical_section(theta, lift, p, degree_cap)
    zero = {fam.lam: RationalFunction(fam.ring.zero())}
    psi0 = fam.psi.substitute(zero, fam.ring)
    vanishes = psi0.is_zero()
    divisible = _lambda_divisible(fam.psi, fam.lam)
    twist = frobenius_twist(fam.theta, lift.var, p)
    if divisible:
        central = fam.theta_tilde.substitute(zero, fam.ring)
        diff = central - twist
        matches = diff.is_zero()
    else:
        central, diff, matches = None, None, False
    return CheckResult(
        vanishes and divisible and matches,
        diff,
        {
            "psi_at_0_vanishes": vanishes,
            "lambda_divisible": divisible,
            "central_fiber_is_twist": matches,
            "psi": fam.psi.to_strings(),
            "theta_tilde_at_0": central.to_strings() if central is not None else None,
        },
    )


@dataclass
class ConjugatePoint:
    """``(A, Theta_hat, lambda)`` with ``theta = Theta_hat * F* dx``."""

    A: RFMatrix
    theta_hat: RFMatrix
    lam: RationalFunction
    p: int
    var: str = "x"


def conj_membership(pt: ConjugatePoint, degree_cap: int | None = None) -> list[str]:
    """Violated conditions among p-curvature identity, horizontality and trace zero."""
    violations = []
    conn = FlatConnection(pt.A.ring, (pt.var,), {pt.var: pt.A})
    psi = p_curvature(conn, pt.var, pt.p, degree_cap)
    if not (psi - pt.theta_hat.scale(pt.lam)).is_zero():
        violations.append("p-curvature identity psi_p = lambda * theta")
    if not (pt.theta_hat.derive(pt.var) + pt.A.commutator(pt.theta_hat)).is_zero():
        violations.append("horizontality d theta + [A, theta] = 0")
    if not pt.theta_hat.trace().is_zero():
        violations.append("trace zero")
    return violations
