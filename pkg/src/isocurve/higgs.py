"""Higgs fields and lambda-connections on coordinate charts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import PolyRing, RationalFunction, RFMatrix
from .connection import FlatConnection, joint_nilpotence_order, matrices_from_json, matrices_to_json


class NotIntegrableHiggs(ValueError):
    pass


@dataclass(frozen=True)
class HiggsChart:
    """Commuting matrices ``theta_i``, the coefficients of ``dx_i``."""

    ring: PolyRing
    variables: tuple[str, ...]
    theta: Mapping[str, RFMatrix]
    trace_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "theta", dict(self.theta))
        if set(self.theta) != set(self.variables):
            raise ValueError("need exactly one Higgs matrix per chart variable")
        vs = self.variables
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                if not self.theta[vs[a]].commutator(self.theta[vs[b]]).is_zero():
                    raise NotIntegrableHiggs(f"[theta_{vs[a]}, theta_{vs[b]}] != 0")
        if self.trace_zero:
            for v, m in self.theta.items():
                if not m.trace().is_zero():
                    raise ValueError(f"tr theta_{v} = {m.trace()}, expected 0")

    @property
    def rank(self) -> int:
        return next(iter(self.theta.values())).size

    def scaled(self, c) -> "HiggsChart":
        return HiggsChart(self.ring, self.variables, {v: m.scale(c) for v, m in self.theta.items()}, self.trace_zero)

    @classmethod
    def single(cls, theta: RFMatrix, var: str, trace_zero: bool = False) -> "HiggsChart":
        return cls(theta.ring, (var,), {var: theta}, trace_zero)

    @classmethod
    def from_json(cls, spec: dict) -> "HiggsChart":
        ring, variables, mats = matrices_from_json(spec)
        return cls(ring, variables, mats, bool(spec.get("trace_zero", False)))

    def to_json(self) -> dict:
        out = matrices_to_json(self.ring, self.variables, self.theta, self.rank)
        out["higgs"] = True
        if self.trace_zero:
            out["trace_zero"] = True
        return out


def _single(h: HiggsChart) -> RFMatrix:
    if len(h.variables) != 1:
        raise ValueError("this operation is defined on single-variable charts")
    return h.theta[h.variables[0]]


def hitchin_map(h: HiggsChart) -> list[RationalFunction]:
    """``[h_2, ..., h_r]`` with ``det(t - theta) = t^r + h_2 t^(r-2) + ... + h_r``."""
    if not h.trace_zero:
        raise ValueError("hitchin_map expects a trace-zero chart")
    coeffs = _single(h).charpoly()
    return coeffs[2:]


def quadratic_hitchin(h: HiggsChart) -> RationalFunction:
    """``-tr(theta^2)/2``."""
    theta = _single(h)
    if h.ring.domain.characteristic == 2:
        raise ZeroDivisionError("-tr(theta^2)/2 is undefined in characteristic 2")
    half = h.ring.domain.inv(h.ring.domain.convert(2))
    return -(theta * theta).trace() * half


def nilpotence_order(h: HiggsChart) -> int | None:
    """Order of nilpotence; ``None`` when the field is not nilpotent."""
    return joint_nilpotence_order([h.theta[v] for v in h.variables])


@dataclass(frozen=True)
class LambdaConnectionChart:
    """``gamma_i = lambda d_i + Gamma_i`` with ``lambda`` a ring variable or constant."""

    ring: PolyRing
    variables: tuple[str, ...]
    lam: RationalFunction
    gamma: Mapping[str, RFMatrix]
    lam_var: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "gamma", dict(self.gamma))
        for (vi, vj), K in self.curvatures():
            if not K.is_zero():
                raise ValueError(f"lambda-curvature [{vi},{vj}] = {K} is nonzero")

    @property
    def rank(self) -> int:
        return next(iter(self.gamma.values())).size

    def curvatures(self):
        vs = self.variables
        out = []
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                Gi, Gj = self.gamma[vs[a]], self.gamma[vs[b]]
                K = (Gj.derive(vs[a]) - Gi.derive(vs[b])).scale(self.lam) + Gi.commutator(Gj)
                out.append(((vs[a], vs[b]), K))
        return out

    def scaled(self, mu) -> "LambdaConnectionChart":
        """``mu * gamma``, a ``mu*lambda``-connection."""
        return LambdaConnectionChart(
            self.ring,
            self.variables,
            self.lam * mu,
            {v: g.scale(mu) for v, g in self.gamma.items()},
            None,
        )


def rees_specialize(fam: LambdaConnectionChart, at):
    """Set ``lambda = at``: a flat connection at 1, a Higgs field at 0."""
    if fam.lam_var is None:
        raise ValueError("the family must use a formal lambda coordinate")
    ring = fam.ring
    value = RationalFunction.const(ring, at)
    assignment = {fam.lam_var: value}
    try:
        mats = {v: g.substitute(assignment, ring) for v, g in fam.gamma.items()}
    except ZeroDivisionError as exc:
        raise ZeroDivisionError(f"the family has a pole at lambda = {at}") from exc
    if value == 1:
        return FlatConnection(ring, fam.variables, mats)
    if value == 0:
        return HiggsChart(ring, fam.variables, mats)
    return LambdaConnectionChart(ring, fam.variables, value, mats, None)
