import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import mat, rf, to_sympy
from isocurve.algebra import QQ, PolyRing, PrimeField, RationalFunction
from isocurve.connection import FlatConnection
from isocurve.higgs import (
    HiggsChart,
    LambdaConnectionChart,
    NotIntegrableHiggs,
    hitchin_map,
    nilpotence_order,
    quadratic_hitchin,
    rees_specialize,
)
from isocurve.sampling import random_constant_invertible, random_nilpotent, random_trace_zero

QX = PolyRing(QQ, ["x"])


def chart(rows, ring=QX, trace_zero=True):
    return HiggsChart.single(mat(rows, ring), "x", trace_zero)


def test_hitchin_examples():
    assert hitchin_map(chart([["0", "x+1"], ["x^2", "0"]])) == [rf("-(x+1)*x^2", QX)]
    assert hitchin_map(chart([["0", "x", "1"], ["0", "0", "x^3"], ["0", "0", "0"]])) == [rf(0, QX)] * 2
    R = PolyRing(QQ, ["x", "a", "b"])
    h = HiggsChart.single(mat([["a", 0, 0], [0, "b", 0], [0, 0, "-a-b"]], R), "x", True)
    assert hitchin_map(h) == [rf("0 - a^2 - a*b - b^2", R), rf("a^2*b + a*b^2", R)]


def test_hitchin_needs_trace_zero_flag():
    with pytest.raises(ValueError):
        hitchin_map(chart([["x", 0], [0, "-x"]], trace_zero=False))
    with pytest.raises(ValueError):
        chart([["x", 0], [0, "x"]])


@pytest.mark.parametrize("seed", range(10))
def test_hitchin_matches_sympy_charpoly(seed):
    rng = random.Random(seed)
    r = rng.choice([2, 3])
    theta = random_trace_zero(rng, QX, "x", r)
    hs = hitchin_map(HiggsChart.single(theta, "x", True))
    x, t = sympy.symbols("x t")
    M = sympy.Matrix(r, r, lambda i, j: to_sympy(theta[i, j], QX))
    cp = sympy.Poly((t * sympy.eye(r) - M).det(), t).all_coeffs()
    assert cp[1] == 0
    for mine, theirs in zip(hs, cp[2:]):
        assert sympy.expand(to_sympy(mine, QX) - theirs) == 0


@pytest.mark.parametrize("seed", range(50))
def test_hitchin_conjugation_invariant(seed):
    rng = random.Random(1000 + seed)
    ring = PolyRing(rng.choice([QQ, PrimeField(7)]), ["x"])
    r = rng.choice([2, 3])
    theta = random_trace_zero(rng, ring, "x", r)
    g = random_constant_invertible(rng, ring, r)
    conj = g * theta * g.inverse()
    assert hitchin_map(HiggsChart.single(theta, "x", True)) == hitchin_map(HiggsChart.single(conj, "x", True))


@pytest.mark.parametrize("seed", range(10))
def test_hitchin_gm_equivariant_with_formal_t(seed):
    rng = random.Random(seed)
    R = PolyRing(QQ, ["x", "t"])
    r = rng.choice([2, 3])
    theta = random_trace_zero(rng, R, "x", r)
    t = RationalFunction.gen(R, "t")
    hs = hitchin_map(HiggsChart.single(theta, "x", True))
    hts = hitchin_map(HiggsChart.single(theta.scale(t), "x", True))
    for i, (h, ht) in enumerate(zip(hs, hts), start=2):
        assert ht == h * t**i


@pytest.mark.parametrize("seed", range(50))
def test_quadratic_hitchin_is_h2_in_rank_two(seed):
    rng = random.Random(seed)
    ring = PolyRing(rng.choice([QQ, PrimeField(5), PrimeField(101)]), ["x"])
    h = HiggsChart.single(random_trace_zero(rng, ring, "x", 2, max_deg=3), "x", True)
    assert quadratic_hitchin(h) == hitchin_map(h)[0]


def test_quadratic_hitchin_examples():
    assert quadratic_hitchin(chart([["x^2+1", 0], [0, "-1-x^2"]])) == rf("0 - (x^2+1)^2", QX)
    assert quadratic_hitchin(chart([["0", "x"], ["0", "0"]])).is_zero()
    F2 = PolyRing(PrimeField(2), ["x"])
    with pytest.raises(ZeroDivisionError):
        quadratic_hitchin(chart([["0", "x"], ["1", "0"]], F2))


def test_nilpotence_examples():
    assert nilpotence_order(chart([[0, 0], [0, 0]])) == 1
    assert nilpotence_order(chart([[0, "x-3"], [0, 0]])) == 2
    assert nilpotence_order(chart([["x", 0], [0, "-x"]])) is None
    R = PolyRing(QQ, ["x", "y"])
    two = HiggsChart(R, ("x", "y"), {"x": mat([[0, 1, 0], [0, 0, 0], [0, 0, 0]], R), "y": mat([[0, 0, 1], [0, 0, 0], [0, 0, 0]], R)})
    # every single field squares to zero but their joint order is still 2
    assert nilpotence_order(two) == 2


def test_integrability_enforced():
    R = PolyRing(QQ, ["x", "y"])
    with pytest.raises(NotIntegrableHiggs):
        HiggsChart(R, ("x", "y"), {"x": mat([[0, 1], [0, 0]], R), "y": mat([[0, 0], [1, 0]], R)})


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]), st.booleans())
def test_nilpotent_iff_hitchin_vanishes(seed, r, nilpotent):
    rng = random.Random(seed)
    ring = PolyRing(PrimeField(11), ["x"])
    if nilpotent:
        theta = random_nilpotent(rng, ring, "x", r, rng.randint(1, r), max_deg=2)
    else:
        theta = random_trace_zero(rng, ring, "x", r)
    h = HiggsChart.single(theta, "x", True)
    order = nilpotence_order(h)
    assert (order is not None) == all(c.is_zero() for c in hitchin_map(h))
    if order is not None:
        assert order <= r
    if nilpotent:
        assert order is not None


RL = PolyRing(QQ, ["x", "y", "lam"])
LAM = RationalFunction.gen(RL, "lam")


def _diag(a, b):
    return mat([[a, 0], [0, b]], RL)


def test_rees_scaled_flat_connection():
    A = {"x": mat([["1/x", "1"], ["0", "2/x"]], RL)}
    fam = LambdaConnectionChart(RL, ("x",), LAM, {"x": A["x"].scale(LAM)}, "lam")
    at1 = rees_specialize(fam, 1)
    assert isinstance(at1, FlatConnection) and at1["x"] == A["x"]
    at0 = rees_specialize(fam, 0)
    assert isinstance(at0, HiggsChart) and at0.theta["x"].is_zero()
    mid = rees_specialize(fam, QQ.convert(1) / 3)
    assert isinstance(mid, LambdaConnectionChart) and mid.lam == RationalFunction.const(RL, QQ.convert(1) / 3)


def test_rees_lambda_free_gamma():
    G = {"x": _diag("y", "-y"), "y": _diag("x", "-x")}
    fam = LambdaConnectionChart(RL, ("x", "y"), LAM, G, "lam")
    at0 = rees_specialize(fam, 0)
    assert isinstance(at0, HiggsChart) and at0.theta == G


def test_rees_lambda_a_plus_theta():
    # A flat and diagonal, Theta diagonal with d Theta closed: both ends are valid
    A = {"x": _diag("1/x", "2/x"), "y": _diag("3/y", "4/y")}
    theta = {"x": _diag("y", "-y"), "y": _diag("x", "-x")}
    G = {v: A[v].scale(LAM) + theta[v] for v in ("x", "y")}
    fam = LambdaConnectionChart(RL, ("x", "y"), LAM, G, "lam")
    flat = rees_specialize(fam, 1)
    assert isinstance(flat, FlatConnection)
    assert flat["x"] == A["x"] + theta["x"]
    higgs = rees_specialize(fam, 0)
    assert isinstance(higgs, HiggsChart) and higgs.theta == theta


def test_rees_failures():
    with pytest.raises(ValueError):
        # non-commuting lambda-free part breaks lambda-integrability
        LambdaConnectionChart(RL, ("x", "y"), LAM, {"x": mat([[0, 1], [0, 0]], RL), "y": mat([[0, 0], [1, 0]], RL)}, "lam")
    fam = LambdaConnectionChart(RL, ("x",), LAM, {"x": mat([["1/(lam-2)", 0], [0, 0]], RL)}, "lam")
    with pytest.raises(ZeroDivisionError):
        rees_specialize(fam, 2)
    const = LambdaConnectionChart(RL, ("x",), RationalFunction.const(RL, 1), {"x": mat([[0, 0], [0, 0]], RL)})
    with pytest.raises(ValueError):
        rees_specialize(const, 0)


@pytest.mark.parametrize("mu", ["2", "-1/3", "7"])
def test_gm_scaling_gives_mu_lambda_connection(mu):
    A = {"x": _diag("1/x", "2/x"), "y": _diag("3/y", "4/y")}
    theta = {"x": _diag("y", "-y"), "y": _diag("x", "-x")}
    fam = LambdaConnectionChart(RL, ("x", "y"), LAM, {v: A[v].scale(LAM) + theta[v] for v in ("x", "y")}, "lam")
    m = rf(mu, RL)
    scaled = fam.scaled(m)
    assert scaled.lam == LAM * m
    assert all(K.is_zero() for _, K in scaled.curvatures())


def test_higgs_json_round_trip():
    h = chart([["0", "x+1"], ["1/x", "0"]])
    spec = h.to_json()
    assert spec["higgs"] is True
    back = HiggsChart.from_json(spec)
    assert back.theta == h.theta and back.trace_zero
