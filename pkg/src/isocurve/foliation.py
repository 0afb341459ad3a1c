"""Derivations, horizontal foliations and the Schlesinger system.

A :class:`VectorField` is a derivation of the fraction field of a
:class:`PolyRing`, fixed by its images on the coordinates.  A horizontal
foliation on ``base x fiber`` is spanned by lifts
``D_j = d/dt_j + sum_i R_ij d/dy_i``; its p-curvature vanishes exactly when
every ``D_j^p`` is zero, because ``D_j^p`` has no base component.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .algebra import (
    QQ,
    BadReduction,
    Poly,
    PolyRing,
    PrimeField,
    RationalFunction,
    domain_from_json,
    parse_in_ring,
    poly_lcm,
    reduce_mod_p,
    substitute,
)
from .limits import InvariantViolation, check_degree


class NotIntegrableError(ValueError):
    pass


class LeafPoleError(ZeroDivisionError):
    """The foliation or its p-curvature has a pole along the proposed leaf."""


class VectorField:
    """Derivation ``v`` with ``v(x) = images[x]``; missing images are zero."""

    __slots__ = ("ring", "images", "_poly_form")

    def __init__(self, ring: PolyRing, images: Mapping[str, RationalFunction]):
        self.ring = ring
        imgs = {}
        for name, val in images.items():
            if name not in ring.index:
                raise KeyError(f"unknown variable {name!r}")
            if not isinstance(val, RationalFunction):
                val = RationalFunction(val) if isinstance(val, Poly) else RationalFunction.const(ring, val)
            if val.ring != ring:
                raise TypeError(f"image of {name} lives in {val.ring}")
            if val:
                imgs[name] = val
        self.images = {v: imgs[v] for v in ring.variables if v in imgs}
        self._poly_form = None

    def __getitem__(self, name: str) -> RationalFunction:
        return self.images.get(name) or RationalFunction(self.ring.zero())

    def is_zero(self) -> bool:
        return not self.images

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.ring == other.ring and self.images == other.images

    def __add__(self, other: "VectorField") -> "VectorField":
        names = set(self.images) | set(other.images)
        return VectorField(self.ring, {n: self[n] + other[n] for n in names})

    def __sub__(self, other: "VectorField") -> "VectorField":
        names = set(self.images) | set(other.images)
        return VectorField(self.ring, {n: self[n] - other[n] for n in names})

    def scale(self, c) -> "VectorField":
        return VectorField(self.ring, {n: f * c for n, f in self.images.items()})

    def __repr__(self):
        body = " + ".join(f"({f})*d/d{n}" for n, f in self.images.items()) or "0"
        return f"VectorField({body})"

    # -- polynomial form ---------------------------------------------------
    def poly_form(self) -> tuple[Poly, list[tuple[int, Poly]]]:
        """``(q, [(i, P_i)])`` with ``v = (1/q) sum_i P_i d/dx_i`` and polynomial ``P_i``."""
        if self._poly_form is None:
            q = self.ring.one()
            for f in self.images.values():
                if not f.den.is_one():
                    q = poly_lcm(q, f.den)
            parts = [
                (self.ring.index[n], f.num * q.exact_div(f.den)) for n, f in self.images.items()
            ]
            self._poly_form = (q, parts)
        return self._poly_form

    def apply_poly(self, n: Poly) -> Poly:
        """``q * v(n)`` for a polynomial ``n``, a polynomial again."""
        _, parts = self.poly_form()
        acc = self.ring.zero()
        for i, P in parts:
            if n.degree_in(i) > 0:
                acc = acc + P * n.derivative(i)
        return acc

    def apply_raw(self, num: Poly, den: Poly) -> tuple[Poly, Poly]:
        """Unnormalised ``v(num/den)`` as a numerator/denominator pair."""
        q, _ = self.poly_form()
        vn = self.apply_poly(num)
        if den.is_one():
            return vn, q
        vd = self.apply_poly(den)
        return vn * den - num * vd, q * den * den

    def apply(self, f) -> RationalFunction:
        if isinstance(f, Poly):
            f = RationalFunction(f)
        n, d = self.apply_raw(f.num, f.den)
        return RationalFunction(n, d)

    def __call__(self, f) -> RationalFunction:
        return self.apply(f)

    def iterate(self, f: Poly, steps: int, degree_cap: int | None = None) -> RationalFunction:
        """``v^steps(f)`` for a polynomial ``f`` by repeated application.

        Keeps the running value as ``N / q^k`` with polynomial ``N``; when
        ``v(q) = s q`` for a polynomial ``s`` the exponent grows by one per
        step, otherwise by two.
        """
        q, _ = self.poly_form()
        if isinstance(f, RationalFunction):
            if not f.den.is_one():
                g = f
                for _ in range(steps):
                    g = self.apply(g)
                return g
            f = f.num
        vq = self.apply_poly(q) if not q.is_constant() else self.ring.zero()
        s = vq.try_divide(q) if vq.terms else self.ring.zero()
        N, k = f, 0
        for _ in range(steps):
            if not N.terms:
                return RationalFunction(N)
            vN = self.apply_poly(N)
            if s is not None:
                N = vN - N * s.scale(k) if (k and s.terms) else vN
                k += 1
            else:
                N = q * vN - N * vq.scale(k) if k else q * vN
                k += 2
            check_degree(N.degree(), degree_cap)
        return RationalFunction(N, q**k)


def bracket(v: VectorField, w: VectorField) -> VectorField:
    """``[v, w](x) = v(w(x)) - w(v(x))``."""
    if v.ring != w.ring:
        raise TypeError("vector fields live in different rings")
    images = {}
    for name in v.ring.variables:
        wx, vx = w[name], v[name]
        val = RationalFunction(v.ring.zero())
        if wx:
            val = val + v.apply(wx)
        if vx:
            val = val - w.apply(vx)
        if val:
            images[name] = val
    return VectorField(v.ring, images)


def bracket_vanishes(v: VectorField, w: VectorField) -> bool:
    """Zero test for ``[v, w]`` by cross multiplication, without normalising."""
    for name in v.ring.variables:
        wx, vx = w[name], v[name]
        n1, d1 = v.apply_raw(wx.num, wx.den) if wx else (v.ring.zero(), v.ring.one())
        n2, d2 = w.apply_raw(vx.num, vx.den) if vx else (v.ring.zero(), v.ring.one())
        if (n1 * d2 - n2 * d1).terms:
            return False
    return True


def pth_power(v: VectorField, p: int, verify: bool = True, degree_cap: int | None = None) -> VectorField:
    """``v^p``, again a derivation in characteristic ``p``."""
    if v.ring.domain.characteristic != p:
        raise ValueError(f"pth_power needs characteristic {p}, ring is over {v.ring.domain}")
    images = {name: v.iterate(v.ring.gen(name), p, degree_cap) for name in v.ring.variables}
    vp = VectorField(v.ring, images)
    if verify and v.ring.nvars >= 1:
        names = v.ring.variables
        a, b = v.ring.gen(names[0]), v.ring.gen(names[-1])
        lhs = v.iterate(a * b, p, degree_cap)
        rhs = vp[names[0]] * RationalFunction(b) + RationalFunction(a) * vp[names[-1]]
        if lhs != rhs:
            raise InvariantViolation("Leibniz rule for v^p", f"on {names[0]}*{names[-1]}")
    return vp


# -- horizontal foliations --------------------------------------------------

@dataclass
class HorizontalFoliation:
    ring: PolyRing
    base: tuple[str, ...]
    fiber: tuple[str, ...]
    lifts: dict[str, VectorField]
    integrable: bool = True
    check_flatness: bool = True

    def __post_init__(self):
        self.base, self.fiber = tuple(self.base), tuple(self.fiber)
        if set(self.lifts) != set(self.base):
            raise ValueError("need exactly one lift per base variable")
        for j, D in self.lifts.items():
            for k in self.base:
                want = 1 if k == j else 0
                if D[k] != want:
                    raise ValueError(f"lift D_{j} has D_{j}({k}) = {D[k]}, expected {want}")
            for name in D.images:
                if name not in self.base and name not in self.fiber:
                    raise ValueError(f"lift D_{j} moves the parameter {name}")
        if self.integrable and self.check_flatness:
            for a in range(len(self.base)):
                for b in range(a + 1, len(self.base)):
                    ti, tj = self.base[a], self.base[b]
                    if not bracket_vanishes(self.lifts[ti], self.lifts[tj]):
                        raise NotIntegrableError(f"[D_{ti}, D_{tj}] is nonzero")

    @property
    def domain(self):
        return self.ring.domain

    def R(self, fiber_var: str, base_var: str) -> RationalFunction:
        return self.lifts[base_var][fiber_var]

    def reduce_mod_p(self, p: int) -> "HorizontalFoliation":
        ring = self.ring.with_domain(PrimeField(p))
        lifts = {
            j: VectorField(ring, {n: reduce_mod_p(f, p) for n, f in D.images.items()})
            for j, D in self.lifts.items()
        }
        return HorizontalFoliation(ring, self.base, self.fiber, lifts, self.integrable, self.check_flatness)

    @classmethod
    def from_json(cls, spec: dict) -> "HorizontalFoliation":
        domain = domain_from_json(spec.get("domain", {"kind": "Q"}))
        base, fiber = list(spec["base"]), list(spec["fiber"])
        params = [p for p in spec.get("parameters", []) if p not in base and p not in fiber]
        ring = PolyRing(domain, base + fiber + params)
        lifts = {}
        for t in base:
            images = {t: RationalFunction(ring.one())}
            for y, expr in spec.get("lifts", {}).get(t, {}).items():
                if y not in fiber:
                    raise ValueError(f"lift of {t} names {y!r}, which is not a fiber variable")
                images[y] = parse_in_ring(str(expr), ring)
            lifts[t] = VectorField(ring, images)
        return cls(ring, base, fiber, lifts, bool(spec.get("integrable", True)))

    def to_json(self) -> dict:
        params = [v for v in self.ring.variables if v not in self.base and v not in self.fiber]
        out = {
            "domain": self.ring.domain.to_json(),
            "base": list(self.base),
            "fiber": list(self.fiber),
            "lifts": {t: {y: str(D[y]) for y in self.fiber if D[y]} for t, D in self.lifts.items()},
        }
        if params:
            out["parameters"] = params
        return out


def horizontal_lift(ring: PolyRing, base_var: str, fiber_images: Mapping[str, RationalFunction]) -> VectorField:
    images = dict(fiber_images)
    images[base_var] = RationalFunction(ring.one())
    return VectorField(ring, images)


@dataclass
class PClosedResult:
    p: int
    closed: bool
    certificate: tuple[str, str, RationalFunction] | None = None
    checked: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"p": self.p, "closed": self.closed}
        if self.certificate is not None:
            j, y, res = self.certificate
            out["certificate"] = {"lift": j, "fiber": y, "residual": str(res)}
        return out


def p_closed_test(F: HorizontalFoliation, p: int | None = None, degree_cap: int | None = None) -> PClosedResult:
    """Decide whether every ``D_j^p`` vanishes; otherwise return the first nonzero image."""
    if p is None:
        p = F.domain.characteristic
    if F.domain.characteristic != p:
        raise ValueError(f"foliation is over {F.domain}, test requested for p = {p}")
    if not F.integrable:
        raise NotIntegrableError("p-closedness is only defined for integrable foliations")
    result = PClosedResult(p, True)
    for j in F.base:
        D = F.lifts[j]
        for k in F.base:
            if D.iterate(F.ring.gen(k), p, degree_cap):
                raise InvariantViolation("D_j^p has zero base components", f"D_{j}^{p}({k}) != 0")
        for y in F.fiber:
            res = D.iterate(F.ring.gen(y), p, degree_cap)
            result.checked.append((j, y))
            if res:
                result.closed = False
                result.certificate = (j, y, res)
                return result
    return result


@dataclass
class LeafReport:
    is_leaf: bool
    residuals: dict[tuple[str, str], RationalFunction]
    p_curvature: dict[int, dict[tuple[str, str], RationalFunction]] = field(default_factory=dict)
    bad_primes: list[int] = field(default_factory=list)

    def vanishes(self, p: int) -> bool:
        return all(not v for v in self.p_curvature[p].values())

    def to_json(self) -> dict:
        out: dict = {"is_leaf": self.is_leaf}
        if not self.is_leaf:
            out["residuals"] = {f"{j}:{y}": str(r) for (j, y), r in self.residuals.items() if r}
            return out
        out["p_curvature"] = {
            str(p): {
                "vanishes": self.vanishes(p),
                "values": {f"{j}:{y}": str(v) for (j, y), v in vals.items()},
            }
            for p, vals in sorted(self.p_curvature.items())
        }
        if self.bad_primes:
            out["bad_primes"] = self.bad_primes
        return out


def leaf_restrict(
    F: HorizontalFoliation,
    phi: Mapping[str, RationalFunction],
    primes: Sequence[int] | None = None,
    degree_cap: int | None = None,
) -> LeafReport:
    """Test whether ``y = phi(t)`` is a leaf, then restrict ``D_j^p`` to it."""
    for y, f in phi.items():
        if y not in F.fiber:
            raise ValueError(f"{y!r} is not a fiber variable")
        if f.num.support_vars() & {F.ring.index[v] for v in F.fiber} or f.den.support_vars() & {
            F.ring.index[v] for v in F.fiber
        }:
            raise ValueError(f"leaf value for {y} depends on fiber variables")
    missing = [y for y in F.fiber if y not in phi]
    if missing:
        raise ValueError(f"leaf must give every fiber variable, missing {missing}")
    residuals = {}
    for j in F.base:
        for y in F.fiber:
            try:
                on_leaf = substitute(F.R(y, j), phi, F.ring)
            except ZeroDivisionError as exc:
                raise LeafPoleError(f"R[{y},{j}] has a pole on the leaf") from exc
            residuals[(j, y)] = phi[y].derive(j) - on_leaf
    if any(residuals.values()):
        return LeafReport(False, residuals)
    report = LeafReport(True, residuals)
    if F.domain.characteristic:
        jobs = [(F.domain.characteristic, F, dict(phi))]
    else:
        jobs = []
        for p in sorted(set(primes or [])):
            try:
                Fp = F.reduce_mod_p(p)
                phip = {y: reduce_mod_p(f, p) for y, f in phi.items()}
            except BadReduction:
                report.bad_primes.append(p)
                continue
            jobs.append((p, Fp, phip))
    for p, Fp, phip in jobs:
        vals = {}
        for j in Fp.base:
            D = Fp.lifts[j]
            for y in Fp.fiber:
                img = D.iterate(Fp.ring.gen(y), p, degree_cap)
                try:
                    vals[(j, y)] = substitute(img, phip, Fp.ring)
                except ZeroDivisionError as exc:
                    raise LeafPoleError(f"D_{j}^{p}({y}) has a pole on the leaf") from exc
        report.p_curvature[p] = vals
    return report


# -- Schlesinger system -----------------------------------------------------

def entry_name(i: int, a: int, b: int) -> str:
    """Variable name of the residue entry ``(A_i)_{ab}`` (1-based)."""
    return f"a{i}_{a}{b}"


@dataclass
class ResidueChart:
    """Fuchsian chart ``A(x) = sum_i A_i / (x - t_i)`` with indeterminate residues."""

    ring: PolyRing
    poles: tuple[str, ...]
    residues: list[list[list[Poly]]]
    rank: int
    entry_vars: dict[str, tuple[int, int, int]]

    @property
    def n(self) -> int:
        return len(self.poles)

    @property
    def fiber(self) -> tuple[str, ...]:
        return tuple(self.entry_vars)

    def residue(self, i: int) -> list[list[Poly]]:
        return self.residues[i]


def schlesinger_chart(n: int, r: int, domain=QQ, diagonal: bool = False) -> ResidueChart:
    if n < 2 or r < 1:
        raise ValueError("need n >= 2 poles and rank r >= 1")
    poles = [f"t{i}" for i in range(1, n + 1)]
    entries = {}
    for i in range(1, n + 1):
        for a in range(1, r + 1):
            for b in range(1, r + 1):
                if diagonal and a != b:
                    continue
                entries[entry_name(i, a, b)] = (i - 1, a - 1, b - 1)
    ring = PolyRing(domain, poles + list(entries))
    zero = ring.zero()
    residues = [[[zero] * r for _ in range(r)] for _ in range(n)]
    for name, (i, a, b) in entries.items():
        residues[i][a][b] = ring.gen(name)
    return ResidueChart(ring, tuple(poles), residues, r, entries)


def _pm_mul(A, B):
    r = len(A)
    zero = A[0][0].ring.zero()
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = zero
            for k in range(r):
                if A[i][k].terms and B[k][j].terms:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def _pm_comm(A, B):
    AB, BA = _pm_mul(A, B), _pm_mul(B, A)
    return [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(AB, BA)]


def _pm_trace(A) -> Poly:
    acc = A[0][0].ring.zero()
    for i in range(len(A)):
        acc = acc + A[i][i]
    return acc


def schlesinger_lifts(chart: ResidueChart) -> dict[str, VectorField]:
    """``D_j(A_i) = [A_i, A_j]/(t_i - t_j)`` for ``i != j`` and the balancing ``D_j(A_j)``."""
    ring = chart.ring
    t = [ring.gen(v) for v in chart.poles]
    lifts = {}
    for j in range(chart.n):
        images: dict[str, RationalFunction] = {chart.poles[j]: RationalFunction(ring.one())}
        Aj = chart.residues[j]
        own = [[RationalFunction(ring.zero())] * chart.rank for _ in range(chart.rank)]
        for i in range(chart.n):
            if i == j:
                continue
            Ai = chart.residues[i]
            C = _pm_comm(Ai, Aj)
            dij = t[i] - t[j]
            for name, (ii, a, b) in chart.entry_vars.items():
                if ii == i and C[a][b].terms:
                    images[name] = RationalFunction(C[a][b], dij)
            Cji = _pm_comm(Aj, Ai)
            dji = t[j] - t[i]
            for a in range(chart.rank):
                for b in range(chart.rank):
                    if Cji[a][b].terms:
                        own[a][b] = own[a][b] - RationalFunction(Cji[a][b], dji)
        for name, (ii, a, b) in chart.entry_vars.items():
            if ii == j and own[a][b]:
                images[name] = own[a][b]
        lifts[chart.poles[j]] = VectorField(ring, images)
    return lifts


def build_schlesinger(n: int, r: int, domain=QQ, check_flatness: bool = True) -> HorizontalFoliation:
    """Isomonodromy foliation of an ``n``-pole rank-``r`` Fuchsian system."""
    if n < 2 or r < 2:
        raise ValueError("build_schlesinger needs n >= 2 and r >= 2")
    chart = schlesinger_chart(n, r, domain)
    F = HorizontalFoliation(
        chart.ring, chart.poles, chart.fiber, schlesinger_lifts(chart), True, check_flatness
    )
    F.chart = chart  # type: ignore[attr-defined]
    return F


def residue_power_traces(chart: ResidueChart, k: int) -> list[Poly]:
    """``tr(A_i^k)`` for every pole ``i``."""
    out = []
    for A in chart.residues:
        P = A
        for _ in range(k - 1):
            P = _pm_mul(P, A)
        out.append(_pm_trace(P))
    return out


def lie_poisson_field(H, chart: ResidueChart) -> VectorField:
    """Hamiltonian field ``X_H(f) = {f, H}`` for the product Lie-Poisson bracket.

    ``{(A_i)_ab, (A_j)_cd} = delta_ij (delta_cb (A_i)_ad - delta_ad (A_i)_cb)``;
    pole positions are Casimirs.
    """
    ring = chart.ring
    if isinstance(H, Poly):
        H = RationalFunction(H)
    r = chart.rank
    index = {(i, a, b): name for name, (i, a, b) in chart.entry_vars.items()}
    partial = {name: H.derive(name) for name in chart.entry_vars}
    images = {}
    for name, (i, a, b) in chart.entry_vars.items():
        A = chart.residues[i]
        acc = RationalFunction(ring.zero())
        for d in range(r):
            z = index.get((i, b, d))
            if z is not None and A[a][d].terms and partial[z]:
                acc = acc + RationalFunction(A[a][d]) * partial[z]
        for c in range(r):
            z = index.get((i, c, a))
            if z is not None and A[c][b].terms and partial[z]:
                acc = acc - RationalFunction(A[c][b]) * partial[z]
        if acc:
            images[name] = acc
    return VectorField(ring, images)


def chen_hamiltonian(chart: ResidueChart, j: int) -> RationalFunction:
    """Residue at ``t_j`` of ``tr A(x)^2 / 2``: ``sum_{i != j} tr(A_i A_j)/(t_j - t_i)``."""
    ring = chart.ring
    t = [ring.gen(v) for v in chart.poles]
    acc = RationalFunction(ring.zero())
    for i in range(chart.n):
        if i != j:
            tr = _pm_trace(_pm_mul(chart.residues[i], chart.residues[j]))
            if tr.terms:
                acc = acc + RationalFunction(tr, t[j] - t[i])
    return acc


@dataclass
class ChenResult:
    matched: bool
    constant: RationalFunction | None
    per_lift: dict[str, str] = field(default_factory=dict)
    mismatch: tuple[str, str] | None = None

    def to_json(self) -> dict:
        out = {"matched": self.matched, "constant": None if self.constant is None else str(self.constant)}
        out["per_lift"] = dict(self.per_lift)
        if self.mismatch:
            out["mismatch"] = {"lift": self.mismatch[0], "entry": self.mismatch[1]}
        return out


def chen_check(chart: ResidueChart) -> ChenResult:
    """Compare ``X_{H_j}`` with the vertical part of the Schlesinger lift ``D_j``.

    Reports the single constant ``c`` with ``X_{H_j} = c * vertical(D_j)``
    for every ``j``; when both sides vanish identically ``c`` is undetermined
    and the match is reported with ``constant = None``.
    """
    lifts = schlesinger_lifts(chart)
    c = None
    result = ChenResult(True, None)
    for j, tj in enumerate(chart.poles):
        X = lie_poisson_field(chen_hamiltonian(chart, j), chart)
        D = lifts[tj]
        cj = None
        for y in chart.fiber:
            x, d = X[y], D[y]
            if not d and not x:
                continue
            if not d or not x:
                return ChenResult(False, c, result.per_lift, (tj, y))
            ratio = x / d
            if not ratio.is_constant() or (cj is not None and ratio != cj):
                return ChenResult(False, c, result.per_lift, (tj, y))
            cj = ratio
        result.per_lift[tj] = "0 = 0" if cj is None else str(cj)
        if cj is not None:
            if c is not None and cj != c:
                return ChenResult(False, c, result.per_lift, (tj, "constant differs between lifts"))
            c = cj
    result.constant = c
    return result
