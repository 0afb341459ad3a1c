"""JSON job schemas and handlers behind the command line.

Every handler returns a plain dict whose mathematical entries are strings in
the expression grammar, so reports can be diffed and re-parsed exactly.
"""

from __future__ import annotations

import copy
import platform
import time
from typing import Callable

import jsonschema

from . import __version__
from .algebra import PolyRing, PrimeField, RationalFunction, RFMatrix, domain_from_json, parse_in_ring, primes_in_range
from .betti import INTEGERS, NumberRing, NumberRingPoint, PrecisionExhausted, embedding_sup_norm, orbit_search
from .cartier import (
    ConjugatePoint,
    FrobeniusLift,
    NilpotenceBoundError,
    canonical_section,
    change_of_lift_check,
    conj_membership,
    nonabelian_katz_check,
    ov_check,
)
from .connection import FlatConnection, build_legendre, katz_scan, p_curvature_report
from .foliation import (
    HorizontalFoliation,
    build_schlesinger,
    chen_check,
    leaf_restrict,
    p_closed_test,
    residue_power_traces,
    schlesinger_chart,
)
from .higgs import HiggsChart, hitchin_map, nilpotence_order, quadratic_hitchin
from .limits import InvariantViolation, ResourceLimitExceeded, limits

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_INVARIANT = 4

_expr = {"type": ["string", "integer"]}
_names = {"type": "array", "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}, "uniqueItems": True}
_prime = {"type": "integer", "minimum": 2}
_domain = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["Q", "Fp", "Zp2"]}, "p": _prime},
}
_square = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _expr}}
_connection = {
    "type": "object",
    "required": ["domain", "variables", "rank", "matrices"],
    "properties": {
        "domain": _domain,
        "variables": {**_names, "minItems": 1},
        "parameters": _names,
        "rank": {"type": "integer", "minimum": 1},
        "matrices": {"type": "object", "additionalProperties": _square},
        "trace_zero": {"type": "boolean"},
        "higgs": {"type": "boolean"},
    },
}
_foliation = {
    "type": "object",
    "required": ["base", "fiber"],
    "properties": {
        "domain": _domain,
        "base": {**_names, "minItems": 1},
        "fiber": {**_names, "minItems": 1},
        "parameters": _names,
        "lifts": {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": _expr}},
        "integrable": {"type": "boolean"},
    },
}
_chart = {
    "p": _prime,
    "theta": _square,
    "variable": {"type": "string"},
    "parameters": _names,
}
_limits = {
    "type": "object",
    "properties": {
        "degree_cap": {"type": "integer", "minimum": 1},
        "node_cap": {"type": "integer", "minimum": 1},
        "time_budget": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}


def _schema(required, properties):
    props = {"kind": {"type": "string"}, "id": {"type": "string"}, "limits": _limits}
    props.update(properties)
    return {
        "type": "object",
        "required": ["kind", *required],
        "properties": props,
        "additionalProperties": False,
    }


def _rank_schema(properties):
    """``n`` poles and a rank given as ``rank`` (or ``r``)."""
    rank = {"type": "integer", "minimum": 2}
    out = _schema(["n"], {"n": {"type": "integer", "minimum": 2}, "rank": rank, "r": rank, **properties})
    out["oneOf"] = [{"required": ["rank"]}, {"required": ["r"]}]
    return out


def _rank(job) -> int:
    return job["rank"] if "rank" in job else job["r"]


SCHEMAS = {
    "connection-pcurvature": _schema(["connection", "p"], {"connection": _connection, "p": _prime}),
    "katz-scan": _schema(
        ["connection"],
        {
            "connection": {"oneOf": [_connection, {"enum": ["legendre"]}]},
            "primes": {"type": "array", "items": _prime, "minItems": 1},
            "prime_range": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        },
    ),
    "foliation-pclosed": _schema(["foliation"], {"foliation": _foliation, "p": _prime}),
    "leaf-check": _schema(
        ["foliation", "leaf"],
        {
            "foliation": _foliation,
            "leaf": {"type": "object", "additionalProperties": _expr},
            "primes": {"type": "array", "items": _prime},
        },
    ),
    "schlesinger": _rank_schema({"p": _prime, "trace_powers": {"type": "integer", "minimum": 0}}),
    "chen-check": _rank_schema({}),
    "ov-check": _schema(["p", "theta"], {**_chart, "lift": _expr}),
    "change-of-lift": _schema(["p", "theta", "lifts"], {**_chart, "lifts": {"type": "array", "items": _expr, "minItems": 2, "maxItems": 2}}),
    "canonical-section": _schema(["p", "theta"], {**_chart, "lift": _expr, "specialize": {"type": "array", "items": _expr}}),
    "nonabelian-katz": _schema(["p", "theta"], {**_chart, "lift": _expr}),
    "hitchin": _schema(["higgs"], {"higgs": _connection}),
    "orbit": _schema(
        ["point", "height_bound"],
        {
            "minpoly": {"type": "string"},
            "generator": {"type": "string"},
            "point": {"type": "array", "items": _expr, "minItems": 3, "maxItems": 3},
            "height_bound": {"type": "number", "exclusiveMinimum": 0},
            "node_cap": {"type": "integer", "minimum": 1},
        },
    ),
}

KINDS = tuple(SCHEMAS)

_job_envelope = {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": list(KINDS)}}}
MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["jobs"],
    "properties": {"jobs": {"type": "array", "items": {"type": "object"}}},
}


class SchemaError(ValueError):
    pass


def validate(job) -> None:
    try:
        jsonschema.validate(job, _job_envelope)
        jsonschema.validate(job, SCHEMAS[job["kind"]])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None


# -- handlers ---------------------------------------------------------------


def _pcurv_verdict(rep) -> str:
    if rep.vanishes:
        return "psi_p vanishes"
    if rep.nilpotency_order is None:
        return "psi_p nonzero, not nilpotent"
    return f"psi_p nonzero, nilpotent of order {rep.nilpotency_order}"


def _connection_mod_p(spec: dict, p: int) -> FlatConnection:
    conn = FlatConnection.from_json(spec)
    if conn.domain.characteristic == 0:
        return conn.reduce_mod_p(p)
    if conn.domain != PrimeField(p):
        raise ValueError(f"connection is over {conn.domain.to_json()}, p-curvature requested for p = {p}")
    return conn


def _h_connection_pcurvature(job, cap):
    conn = _connection_mod_p(job["connection"], job["p"])
    rep = p_curvature_report(conn, job["p"], cap)
    return _pcurv_verdict(rep), rep.to_json()


def _scan_primes(job) -> list[int]:
    primes = set(job.get("primes", []))
    if "prime_range" in job:
        lo, hi = job["prime_range"]
        primes.update(primes_in_range(lo, hi))
    if not primes:
        raise ValueError("katz-scan needs primes or prime_range")
    return sorted(primes)


def _h_katz_scan(job, cap):
    spec = job["connection"]
    conn = build_legendre() if spec == "legendre" else FlatConnection.from_json(spec)
    if conn.domain.characteristic != 0:
        raise ValueError("katz-scan needs a connection over Q")
    scan = katz_scan(conn, _scan_primes(job), cap)
    return scan.verdict(), {
        "bad": scan.bad,
        "vanishing": scan.vanishing,
        "nonzero": scan.nonzero,
        "primes": [o.to_json() for o in scan.outcomes],
    }


def _foliation_mod_p(spec: dict, p: int | None) -> HorizontalFoliation:
    F = HorizontalFoliation.from_json(spec)
    if p is not None and F.domain.characteristic == 0:
        F = F.reduce_mod_p(p)
    return F


def _h_foliation_pclosed(job, cap):
    F = _foliation_mod_p(job["foliation"], job.get("p"))
    if F.domain.characteristic == 0:
        raise ValueError("foliation-pclosed needs p or a foliation over F_p")
    res = p_closed_test(F, None, cap)
    return ("p-closed" if res.closed else "not p-closed"), res.to_json()


def _h_leaf_check(job, cap):
    F = HorizontalFoliation.from_json(job["foliation"])
    phi = {y: parse_in_ring(str(e), F.ring) for y, e in job["leaf"].items()}
    rep = leaf_restrict(F, phi, job.get("primes"), cap)
    if not rep.is_leaf:
        verdict = "not a leaf"
    else:
        zero = [p for p in sorted(rep.p_curvature) if rep.vanishes(p)]
        nonzero = [p for p in sorted(rep.p_curvature) if not rep.vanishes(p)]
        verdict = f"leaf; restricted p-curvature vanishes at {zero}; nonzero at {nonzero}"
    return verdict, rep.to_json()


def _h_schlesinger(job, cap):
    domain = PrimeField(job["p"]) if "p" in job else domain_from_json({"kind": "Q"})
    F = build_schlesinger(job["n"], _rank(job), domain)
    chart = F.chart
    kmax = job.get("trace_powers", 3)
    conserved = {}
    for k in range(1, kmax + 1):
        traces = residue_power_traces(chart, k)
        ok = all(not F.lifts[t](RationalFunction(tr)) for t in F.base for tr in traces)
        conserved[str(k)] = ok
    out = {"n": job["n"], "rank": _rank(job), "lifts_commute": True, "trace_invariants": conserved}
    if not all(conserved.values()):
        raise InvariantViolation("Schlesinger lifts preserve tr A_i^k")
    verdict = "integrable; trace invariants conserved"
    if "p" in job:
        res = p_closed_test(F, job["p"], cap)
        out["p_closed"] = res.to_json()
        verdict += "; p-closed" if res.closed else "; not p-closed"
    return verdict, out


def _h_chen_check(job, cap):
    res = chen_check(schlesinger_chart(job["n"], _rank(job)))
    verdict = f"matched with constant {res.constant}" if res.matched else "mismatch"
    return verdict, res.to_json()


def _cartier_inputs(job):
    p = job["p"]
    var = job.get("variable", "x")
    params = [v for v in job.get("parameters", []) if v != var]
    ring = PolyRing(PrimeField(p), params + [var])
    rows = job["theta"]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("theta must be square")
    theta = RFMatrix(ring, [[parse_in_ring(str(e), ring) for e in r] for r in rows])

    def lift(text):
        return FrobeniusLift(var, parse_in_ring(str(text), ring), p)

    return p, theta, lift


def _pass(ok: bool) -> str:
    return "pass" if ok else "fail"


def _h_ov_check(job, cap):
    p, theta, lift = _cartier_inputs(job)
    res = ov_check(theta, lift(job.get("lift", "0")), p, cap)
    return _pass(res.passed), res.to_json()


def _h_change_of_lift(job, cap):
    p, theta, lift = _cartier_inputs(job)
    l1, l2 = (lift(t) for t in job["lifts"])
    res = change_of_lift_check(theta, l1, l2, p)
    return _pass(res.passed), res.to_json()


def _h_canonical_section(job, cap):
    p, theta, lift = _cartier_inputs(job)
    fam = canonical_section(theta, lift(job.get("lift", "0")), p, cap)
    point = fam.conjugate_point()
    violations = conj_membership(point, cap)
    out = {
        "lambda": fam.lam,
        "A_lambda": fam.A.to_strings(),
        "psi": fam.psi.to_strings(),
        "theta_tilde": fam.theta_tilde.to_strings(),
        "conj_violations": violations,
    }
    specs = {}
    for value in job.get("specialize", []):
        c = parse_in_ring(str(value), fam.ring)
        if not c.is_constant():
            raise ValueError(f"specialization value {value!r} is not a scalar")
        A, th = fam.at(c.num.constant_value())
        lam = RationalFunction.const(fam.ring, c.num.constant_value())
        specs[str(value)] = conj_membership(ConjugatePoint(A, th, lam, p, point.var), cap)
    if specs:
        out["specializations"] = specs
    ok = not violations and not any(specs.values())
    return ("on the conjugate locus" if ok else "conjugate-locus violations"), out


def _h_nonabelian_katz(job, cap):
    p, theta, lift = _cartier_inputs(job)
    res = nonabelian_katz_check(theta, lift(job.get("lift", "0")), p, cap)
    return _pass(res.passed), res.to_json()


def _h_hitchin(job, cap):
    h = HiggsChart.from_json(job["higgs"])
    out = {"nilpotence_order": nilpotence_order(h)}
    if out["nilpotence_order"] is None:
        out["nilpotence_order"] = "not nilpotent"
    if h.trace_zero:
        hs = hitchin_map(h)
        out["h"] = [str(x) for x in hs]
        verdict = "h = [" + ", ".join(out["h"]) + "]"
    else:
        out["charpoly"] = [str(x) for x in h.theta[h.variables[0]].charpoly()]
        verdict = "charpoly computed"
    if h.ring.domain.characteristic != 2 and len(h.variables) == 1:
        out["quadratic_hitchin"] = str(quadratic_hitchin(h))
    return verdict, out


def _h_orbit(job, cap):
    ring = NumberRing(job["minpoly"], job.get("generator", "a")) if "minpoly" in job else INTEGERS
    pt = NumberRingPoint.parse(ring, job["point"])
    res = orbit_search(pt, job["height_bound"], job.get("node_cap"))
    out = res.to_json()
    if res.status == "finite" and ring.degree > 1:
        out["orbit_sup_norm"] = max((embedding_sup_norm(q) for q in res.orbit), key=lambda b: b.upper).to_json()
    return res.verdict(), out


HANDLERS: dict[str, Callable] = {
    "connection-pcurvature": _h_connection_pcurvature,
    "katz-scan": _h_katz_scan,
    "foliation-pclosed": _h_foliation_pclosed,
    "leaf-check": _h_leaf_check,
    "schlesinger": _h_schlesinger,
    "chen-check": _h_chen_check,
    "ov-check": _h_ov_check,
    "change-of-lift": _h_change_of_lift,
    "canonical-section": _h_canonical_section,
    "nonabelian-katz": _h_nonabelian_katz,
    "hitchin": _h_hitchin,
    "orbit": _h_orbit,
}

_INPUT_ERRORS = (SchemaError, ValueError, ZeroDivisionError, ArithmeticError, KeyError, NilpotenceBoundError)


def versions() -> dict:
    return {"isocurve": __version__, "python": ".".join(platform.python_version_tuple()[:2])}


def run_job(
    job,
    *,
    degree_cap: int | None = None,
    node_cap: int | None = None,
    time_budget: float | None = None,
    timing: bool = False,
) -> dict:
    """Run one job; never raises, the outcome is encoded in ``exit_code``."""
    report: dict = {"job": copy.deepcopy(job), "versions": versions()}
    t0 = time.perf_counter()
    try:
        validate(job)
        lim = job.get("limits", {})
        with limits(
            lim.get("degree_cap", degree_cap), lim.get("node_cap", node_cap), lim.get("time_budget", time_budget)
        ) as active:
            verdict, result = HANDLERS[job["kind"]](job, active.degree_cap)
        report.update(status="ok", exit_code=EXIT_OK, verdict=verdict, result=result)
    except SchemaError as exc:
        report.update(status="error", exit_code=EXIT_INPUT, error={"type": "schema", "message": str(exc)})
    except (ResourceLimitExceeded, PrecisionExhausted) as exc:
        info = {"type": "resource", "message": str(exc)}
        if isinstance(exc, ResourceLimitExceeded):
            info["resource"] = exc.resource
        report.update(status="error", exit_code=EXIT_RESOURCE, error=info)
    except InvariantViolation as exc:
        report.update(
            status="error",
            exit_code=EXIT_INVARIANT,
            error={"type": "invariant", "invariant": exc.invariant, "message": str(exc)},
        )
    except AssertionError as exc:
        report.update(
            status="error",
            exit_code=EXIT_INVARIANT,
            error={"type": "invariant", "invariant": str(exc) or "assertion", "message": str(exc)},
        )
    except _INPUT_ERRORS as exc:
        report.update(
            status="error", exit_code=EXIT_INPUT, error={"type": "input", "class": type(exc).__name__, "message": str(exc)}
        )
    except Exception as exc:  # noqa: BLE001 - isolate every job
        report.update(
            status="error",
            exit_code=EXIT_INVARIANT,
            error={"type": "invariant", "invariant": f"unexpected {type(exc).__name__}", "message": str(exc)},
        )
    if timing:
        report["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    return report


def _run_star(args):
    job, kwargs = args
    return run_job(job, **kwargs)


def scan(jobs: list, parallel: int = 1, **kwargs) -> list[dict]:
    """Run ``jobs``; reports come back in input order."""
    if parallel <= 1 or len(jobs) <= 1:
        return [run_job(j, **kwargs) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_run_star, [(j, kwargs) for j in jobs]))


def scan_report(reports: list[dict]) -> dict:
    codes = [r["exit_code"] for r in reports]
    return {
        "reports": reports,
        "summary": {
            "total": len(reports),
            "ok": sum(1 for c in codes if c == EXIT_OK),
            "failed": sum(1 for c in codes if c != EXIT_OK),
            "exit_code": max(codes, default=EXIT_OK),
        },
    }
