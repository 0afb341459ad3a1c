"""Flat connections on coordinate charts, their curvature and p-curvature.

A connection is given by one matrix ``A_i`` per chart coordinate and acts on
column vectors by ``D_i v = d_i v + A_i v``.  For a coordinate derivation
``d`` in characteristic ``p`` we have ``d^p = 0``, so the p-curvature is
``D^p``; its matrix is ``M_p`` in the recursion ``M_1 = A``,
``M_{k+1} = d M_k + A M_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from .algebra import (
    QQ,
    BadReduction,
    Poly,
    PolyRing,
    PrimeField,
    RationalFunction,
    RFMatrix,
    domain_from_json,
    parse_in_ring,
    poly_lcm,
    reduce_mod_p,
)
from .limits import check_degree


class NotFlatError(ValueError):
    """The supplied matrices have nonzero curvature."""


class CharacteristicMismatch(ValueError):
    pass


def _curvatures(variables, matrices) -> list[tuple[tuple[str, str], RFMatrix]]:
    out = []
    for a in range(len(variables)):
        for b in range(a + 1, len(variables)):
            vi, vj = variables[a], variables[b]
            Ai, Aj = matrices[vi], matrices[vj]
            K = Aj.derive(vi) - Ai.derive(vj) + Ai.commutator(Aj)
            out.append(((vi, vj), K))
    return out


@dataclass(frozen=True)
class FlatConnection:
    ring: PolyRing
    variables: tuple[str, ...]
    matrices: Mapping[str, RFMatrix]
    trace_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "matrices", dict(self.matrices))
        if set(self.matrices) != set(self.variables):
            raise ValueError("need exactly one matrix per chart variable")
        for v in self.variables:
            if v not in self.ring.index:
                raise ValueError(f"chart variable {v!r} is not a ring variable")
        sizes = {m.size for m in self.matrices.values()}
        if len(sizes) != 1:
            raise ValueError(f"matrices have different sizes {sorted(sizes)}")
        for v, m in self.matrices.items():
            if m.ring != self.ring:
                raise TypeError(f"matrix for {v} lives in {m.ring}")
        for (vi, vj), K in _curvatures(self.variables, self.matrices):
            if not K.is_zero():
                raise NotFlatError(f"curvature K[{vi},{vj}] = {K} is nonzero")
        if self.trace_zero:
            for v, m in self.matrices.items():
                if not m.trace().is_zero():
                    raise ValueError(f"trace of A_{v} is {m.trace()}, expected 0")

    @property
    def rank(self) -> int:
        return next(iter(self.matrices.values())).size

    @property
    def domain(self):
        return self.ring.domain

    def __getitem__(self, var: str) -> RFMatrix:
        return self.matrices[var]

    def conjugate(self, g: RFMatrix) -> "FlatConnection":
        """Constant gauge change ``A -> g A g^-1`` (no ``dg`` term for constant ``g``)."""
        ginv = g.inverse()
        return FlatConnection(
            self.ring,
            self.variables,
            {v: g * m * ginv for v, m in self.matrices.items()},
            self.trace_zero,
        )

    def reduce_mod_p(self, p: int) -> "FlatConnection":
        if self.domain != QQ:
            raise TypeError("only connections over Q can be reduced")
        ring = self.ring.with_domain(PrimeField(p))
        mats = {v: m.map(lambda x: reduce_mod_p(x, p), ring) for v, m in self.matrices.items()}
        return FlatConnection(ring, self.variables, mats, self.trace_zero)

    # -- JSON --------------------------------------------------------------
    @classmethod
    def from_json(cls, spec: dict) -> "FlatConnection":
        ring, variables, mats = matrices_from_json(spec)
        return cls(ring, variables, mats, bool(spec.get("trace_zero", False)))

    def to_json(self) -> dict:
        return matrices_to_json(self.ring, self.variables, self.matrices, self.rank)


def matrices_from_json(spec: dict):
    domain = domain_from_json(spec["domain"])
    variables = list(spec["variables"])
    params = [p for p in spec.get("parameters", []) if p not in variables]
    ring = PolyRing(domain, params + variables)
    r = int(spec["rank"])
    mats = {}
    for v in variables:
        rows = spec["matrices"][v]
        if len(rows) != r or any(len(row) != r for row in rows):
            raise ValueError(f"matrix for {v} is not {r}x{r}")
        mats[v] = RFMatrix(ring, [[parse_in_ring(str(x), ring) for x in row] for row in rows])
    return ring, variables, mats


def matrices_to_json(ring, variables, matrices, rank) -> dict:
    params = [v for v in ring.variables if v not in variables]
    out = {"domain": ring.domain.to_json(), "variables": list(variables), "rank": rank}
    if params:
        out["parameters"] = params
    out["matrices"] = {v: matrices[v].to_strings() for v in variables}
    return out


def curvature(conn: FlatConnection) -> list[RFMatrix]:
    """All ``K_ij = d_i A_j - d_j A_i + [A_i, A_j]`` for ``i < j`` in chart order."""
    return [K for _, K in _curvatures(conn.variables, conn.matrices)]


def _poly_matrix(A: RFMatrix) -> tuple[list[list[Poly]], Poly]:
    """Write ``A = P / q`` with a common monic denominator ``q``."""
    q = A.ring.one()
    for x in A.entries():
        if not x.den.is_one():
            q = poly_lcm(q, x.den)
    P = [[x.num * q.exact_div(x.den) for x in row] for row in A.rows]
    return P, q


def _pmat_mul(P, N):
    r = len(P)
    zero = P[0][0].ring.zero()
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = zero
            for k in range(r):
                if P[i][k].terms and N[k][j].terms:
                    acc = acc + P[i][k] * N[k][j]
            row.append(acc)
        out.append(row)
    return out


def iterate_connection(A: RFMatrix, var: str, steps: int, degree_cap: int | None = None) -> RFMatrix:
    """Return ``M_steps`` of the recursion ``M_{k+1} = d M_k + A M_k``.

    Runs on ``M_k = N_k / q^k`` with polynomial ``N_k`` so that no gcd is
    taken until the final normalisation.
    """
    ring = A.ring
    i = ring.index[var]
    P, q = _poly_matrix(A)
    dq = q.derivative(i)
    N = P
    r = A.size
    for k in range(1, steps):
        PN = _pmat_mul(P, N)
        new = []
        for a in range(r):
            row = []
            for b in range(r):
                x = N[a][b]
                t = PN[a][b]
                if x.terms:
                    t = t + q * x.derivative(i)
                    if dq.terms:
                        t = t - x * dq.scale(k)
                row.append(t)
            new.append(row)
        N = new
        check_degree(max(x.degree() for row in N for x in row), degree_cap)
    qk = q**steps
    return RFMatrix(ring, [[RationalFunction(x, qk) for x in row] for row in N])


def p_curvature(conn: FlatConnection, var: str, p: int, degree_cap: int | None = None) -> RFMatrix:
    """Matrix of ``psi_p(d_var) = D_var^p`` for a connection over ``F_p``."""
    if conn.domain.characteristic != p:
        raise CharacteristicMismatch(
            f"connection is over {conn.domain}, p-curvature requested for p = {p}"
        )
    if var not in conn.matrices:
        raise KeyError(f"{var!r} is not a chart variable")
    return iterate_connection(conn.matrices[var], var, p, degree_cap)


def nilpotency_order(M: RFMatrix) -> int | None:
    """Smallest ``l >= 1`` with ``M^l = 0``; ``None`` when ``M`` is not nilpotent."""
    P = M
    for ell in range(1, M.size + 1):
        if P.is_zero():
            return ell
        P = P * M
    return None


def joint_nilpotence_order(mats: Sequence[RFMatrix]) -> int | None:
    """Smallest ``l`` killing every length-``l`` product of commuting matrices."""
    mats = list(mats)
    if not mats:
        return 1
    r = mats[0].size
    for ell in range(1, r + 1):
        if all(_product(mats, idx).is_zero() for idx in combinations_with_replacement(range(len(mats)), ell)):
            return ell
    return None


def _product(mats, idx):
    out = mats[idx[0]]
    for j in idx[1:]:
        out = out * mats[j]
    return out


def gauge_transform(A: RFMatrix, G: RFMatrix, var: str) -> RFMatrix:
    """Connection matrix in the frame ``G``: ``G A G^-1 - (dG) G^-1``."""
    Ginv = G.inverse()
    return G * A * Ginv - G.derive(var) * Ginv


@dataclass
class PCurvatureReport:
    p: int
    matrices: dict[str, RFMatrix]
    vanishes: bool
    nilpotency_order: int | None

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "psi": {v: m.to_strings() for v, m in self.matrices.items()},
            "vanishes": self.vanishes,
            "nilpotency_order": self.nilpotency_order if self.nilpotency_order is not None else "not nilpotent",
        }


def p_curvature_report(conn: FlatConnection, p: int, degree_cap: int | None = None) -> PCurvatureReport:
    mats = {v: p_curvature(conn, v, p, degree_cap) for v in conn.variables}
    vanishes = all(m.is_zero() for m in mats.values())
    order = 1 if vanishes else joint_nilpotence_order(list(mats.values()))
    return PCurvatureReport(p, mats, vanishes, order)


@dataclass
class PrimeOutcome:
    p: int
    status: str  # "vanishes" | "nonzero" | "bad-reduction"
    nilpotency_order: int | None = None
    report: PCurvatureReport | None = None
    detail: str = ""

    def to_json(self) -> dict:
        out = {"p": self.p, "status": self.status}
        if self.status == "nonzero":
            out["nilpotency_order"] = (
                self.nilpotency_order if self.nilpotency_order is not None else "not nilpotent"
            )
        if self.report is not None and self.status == "nonzero":
            out["psi"] = {v: m.to_strings() for v, m in self.report.matrices.items()}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class KatzScan:
    outcomes: list[PrimeOutcome] = field(default_factory=list)

    @property
    def bad(self) -> list[int]:
        return [o.p for o in self.outcomes if o.status == "bad-reduction"]

    @property
    def nonzero(self) -> list[int]:
        return [o.p for o in self.outcomes if o.status == "nonzero"]

    @property
    def vanishing(self) -> list[int]:
        return [o.p for o in self.outcomes if o.status == "vanishes"]

    def verdict(self) -> str:
        if not self.nonzero:
            return f"vanishes at all good primes; bad: {self.bad}"
        return f"nonzero at {self.nonzero}; vanishes at {self.vanishing}; bad: {self.bad}"

    def __getitem__(self, p: int) -> PrimeOutcome:
        for o in self.outcomes:
            if o.p == p:
                return o
        raise KeyError(p)


def katz_scan(conn: FlatConnection, primes: Sequence[int], degree_cap: int | None = None) -> KatzScan:
    """Reduce ``conn`` modulo each prime and classify its p-curvature."""
    scan = KatzScan()
    for p in sorted(set(int(p) for p in primes)):
        try:
            red = conn.reduce_mod_p(p)
        except (BadReduction, ZeroDivisionError) as exc:
            scan.outcomes.append(PrimeOutcome(p, "bad-reduction", detail=str(exc)))
            continue
        except NotFlatError as exc:  # pragma: no cover - reduction preserves flatness
            scan.outcomes.append(PrimeOutcome(p, "bad-reduction", detail=str(exc)))
            continue
        rep = p_curvature_report(red, p, degree_cap)
        status = "vanishes" if rep.vanishes else "nonzero"
        scan.outcomes.append(PrimeOutcome(p, status, rep.nilpotency_order, rep))
    return scan


def legendre_companion(var: str = "lam") -> RFMatrix:
    """Companion matrix ``C`` of ``l(1-l) y'' + (1-2l) y' - y/4``, so ``(y, y')' = C (y, y')``."""
    ring = PolyRing(QQ, [var])
    x = var
    rows = [
        ["0", "1"],
        [f"1/(4*{x}*(1-{x}))", f"-(1-2*{x})/({x}*(1-{x}))"],
    ]
    return RFMatrix(ring, [[parse_in_ring(e, ring) for e in row] for row in rows])


def build_legendre(var: str = "lam") -> FlatConnection:
    """Gauss-Manin connection of the Legendre family over ``Q(lam)``.

    With ``D = d + A`` the horizontal sections ``(y, y')`` of the
    Picard-Fuchs equation need ``A = -C`` for the companion matrix ``C``.
    """
    C = legendre_companion(var)
    return FlatConnection(C.ring, (var,), {var: -C})
