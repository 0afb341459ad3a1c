import random

import pytest

from helpers import mat, rf
from isocurve.algebra import PolyRing, PrimeField, RationalFunction, RFMatrix
from isocurve.cartier import (
    ConjugatePoint,
    FrobeniusLift,
    NilpotenceBoundError,
    canonical_section,
    change_of_lift_check,
    conj_membership,
    divided_frobenius,
    frobenius_twist,
    gluing_matrix,
    inverse_cartier_chart,
    nonabelian_katz_check,
    ov_check,
)
from isocurve.connection import FlatConnection, p_curvature
from isocurve.sampling import random_nilpotent, random_strict_upper, random_univariate

PRIMES = [3, 5, 7]


def ring(p):
    return PolyRing(PrimeField(p), ["x"])


def lift(p, f="0"):
    R = ring(p)
    return FrobeniusLift("x", rf(f, R), p)


def N(R):
    return mat([[0, 1], [0, 0]], R)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
@pytest.mark.parametrize("f", ["0", "x", "x^2", "3*x^3 + x"])
def test_divided_frobenius_matches_lift_oracle(p, f):
    L = lift(p, f)
    assert L.zeta_dx() == L.zeta_dx_via_lift()


def test_divided_frobenius_examples():
    R = ring(3)
    assert divided_frobenius(lift(3), rf(1, R)) == rf("x^2", R)
    assert divided_frobenius(lift(3), rf(0, R)).is_zero()
    assert divided_frobenius(lift(3, "x"), rf(1, R)) == rf("x^2 + 1", R)
    R7 = ring(7)
    assert divided_frobenius(lift(7, "x^2"), rf("1/x", R7)) == rf("(x^6 + 2*x)/x^7", R7)


def test_lift_validation():
    with pytest.raises(ValueError):
        FrobeniusLift("x", rf("1/x", ring(5)), 5)
    with pytest.raises(ValueError):
        FrobeniusLift("x", rf("x", ring(5)), 7)


@pytest.mark.parametrize("p", PRIMES)
def test_inverse_cartier_examples(p):
    R = ring(p)
    assert inverse_cartier_chart(RFMatrix.zero(R, 2), lift(p), p)["x"].is_zero()
    A = inverse_cartier_chart(N(R), lift(p), p)["x"]
    assert A == N(R).scale(rf(f"0 - x^{p - 1}", R))
    h = "x^2 + 2"
    A = inverse_cartier_chart(N(R).scale(rf(h, R)), lift(p, "x"), p)["x"]
    assert A == N(R).scale(rf(f"-(x^{2 * p} + 2)*(x^{p - 1} + 1)", R))


def test_inverse_cartier_nilpotence_bound():
    R = ring(3)
    J = mat([[0, 1, 0], [0, 0, 1], [0, 0, 0]], R)
    with pytest.raises(NilpotenceBoundError):
        inverse_cartier_chart(J, lift(3), 3)
    with pytest.raises(NilpotenceBoundError):
        inverse_cartier_chart(mat([["x", 0], [0, "-x"]], R), lift(3), 3)
    with pytest.raises(ValueError):
        inverse_cartier_chart(N(R), lift(3), 5)


@pytest.mark.parametrize("p", PRIMES)
def test_ov_wilson_case(p):
    R = ring(p)
    res = ov_check(N(R), lift(p), p)
    assert res.passed
    # psi = (p-1)! * (-N) = N by Wilson
    assert res.details["psi"] == N(R).to_strings()


@pytest.mark.parametrize("seed", range(30))
def test_ov_random_strict_upper(seed):
    rng = random.Random(seed)
    p = PRIMES[seed % 3]
    R = ring(p)
    theta = random_strict_upper(rng, R, "x", 2, 4)
    res = ov_check(theta, lift(p, ["0", "x", "x^2"][rng.randrange(3)]), p)
    assert res.passed, res.to_json()


@pytest.mark.parametrize("seed", range(8))
def test_ov_rank_three(seed):
    rng = random.Random(seed)
    p = [5, 7][seed % 2]
    R = ring(p)
    theta = random_nilpotent(rng, R, "x", 3, 3, max_deg=2)
    L = FrobeniusLift("x", random_univariate(rng, R, "x", 2), p)
    assert ov_check(theta, L, p).passed


def test_ov_detects_sign_flip():
    # the opposite sign convention gives p-curvature -Theta(x^p)
    R = ring(5)
    A = N(R).scale(rf("x^4", R))
    psi = p_curvature(FlatConnection(R, ("x",), {"x": A}), "x", 5)
    assert psi == N(R).scale(rf(-1, R))


@pytest.mark.parametrize("p", PRIMES)
def test_change_of_lift_examples(p):
    R = ring(p)
    Z = RFMatrix.zero(R, 2)
    assert change_of_lift_check(Z, lift(p), lift(p, "x"), p).passed
    assert gluing_matrix(Z, lift(p), lift(p, "x"), p) == RFMatrix.identity(R, 2)
    assert gluing_matrix(N(R), lift(p, "x"), lift(p, "x"), p) == RFMatrix.identity(R, 2)
    if p >= 5:
        assert change_of_lift_check(N(R), lift(p, "x"), lift(p, "x"), p).passed
        res = change_of_lift_check(N(R), lift(p), lift(p, "x"), p)
        assert res.passed
        G = gluing_matrix(N(R), lift(p), lift(p, "x"), p)
        assert G == RFMatrix.identity(R, 2) + N(R).scale(rf("x", R))


def test_change_of_lift_bound():
    R = ring(3)
    with pytest.raises(NilpotenceBoundError):
        change_of_lift_check(N(R), lift(3), lift(3, "x"), 3)


def _random_lift(rng, p):
    R = ring(p)
    return FrobeniusLift("x", random_univariate(rng, R, "x", 3), p)


@pytest.mark.parametrize("seed", range(10))
def test_change_of_lift_random_and_cocycle(seed):
    rng = random.Random(seed)
    p = [5, 7, 11][seed % 3]
    R = ring(p)
    order = 2 if p < 7 else rng.choice([2, 3])
    theta = random_nilpotent(rng, R, "x", 3, order, max_deg=2)
    l1, l2, l3 = (_random_lift(rng, p) for _ in range(3))
    assert change_of_lift_check(theta, l1, l2, p).passed
    G12 = gluing_matrix(theta, l1, l2, p)
    G23 = gluing_matrix(theta, l2, l3, p)
    G13 = gluing_matrix(theta, l1, l3, p)
    assert G12 * G23 == G13


@pytest.mark.parametrize("p", [3, 5, 7])
def test_canonical_section_examples(p):
    R = ring(p)
    fam = canonical_section(RFMatrix.zero(R, 2), lift(p), p)
    assert fam.A.is_zero() and fam.psi.is_zero()
    h = "x + 1"
    fam = canonical_section(N(R).scale(rf(h, R)), lift(p, "x"), p)
    lam = RationalFunction.gen(fam.ring, fam.lam)
    twist = N(fam.ring).scale(rf(f"x^{p} + 1", fam.ring))
    assert fam.psi == twist.scale(lam)
    assert fam.theta_tilde == twist


def test_canonical_section_rank_three_p7_divisible():
    rng = random.Random(7)
    R = ring(7)
    theta = random_nilpotent(rng, R, "x", 3, 3, max_deg=2)
    res = nonabelian_katz_check(theta, lift(7, "x^2"), 7)
    assert res.details["lambda_divisible"] and res.passed


def test_canonical_section_lambda_name_avoids_clash():
    R = PolyRing(PrimeField(5), ["x", "lam"])
    fam = canonical_section(N(R), FrobeniusLift("x", rf(0, R), 5), 5)
    assert fam.lam != "lam" and fam.lam in fam.ring.index


@pytest.mark.parametrize("seed", range(4))
def test_canonical_section_points_are_conjugate(seed):
    rng = random.Random(seed)
    p = [5, 7][seed % 2]
    R = ring(p)
    theta = random_nilpotent(rng, R, "x", 2, 2, max_deg=2)
    fam = canonical_section(theta, _random_lift(rng, p), p)
    values = rng.sample(range(1, p), min(5, p - 1))
    for v in values:
        A, th = fam.at(v)
        assert conj_membership(ConjugatePoint(A, th, RationalFunction.const(fam.ring, v), p)) == []
    assert conj_membership(fam.conjugate_point()) == []


@pytest.mark.parametrize("seed", range(20))
def test_nonabelian_katz_random(seed):
    rng = random.Random(seed)
    p = [5, 7, 11][seed % 3]
    R = ring(p)
    theta = random_nilpotent(rng, R, "x", 3, 2 + seed % 2, max_deg=2)
    L = _random_lift(rng, p)
    res = nonabelian_katz_check(theta, L, p)
    assert res.passed, res.to_json()
    fam_ring = canonical_section(theta, L, p).ring
    expected = frobenius_twist(theta, "x", p).change_ring(fam_ring).to_strings()
    assert res.details["theta_tilde_at_0"] == expected


def test_nonabelian_katz_trivial_and_wilson():
    R = ring(5)
    assert nonabelian_katz_check(RFMatrix.zero(R, 2), lift(5), 5).passed
    res = nonabelian_katz_check(N(R), lift(5), 5)
    assert res.passed and res.details["theta_tilde_at_0"] == N(R).to_strings()


def test_conj_membership_examples():
    R = ring(5)
    # trace-zero A, so tr psi_p(A) vanishes as well
    A = mat([["1/x", "x"], ["3", "-1/x"]], R)
    psi = p_curvature(FlatConnection(R, ("x",), {"x": A}), "x", 5)
    assert not psi.is_zero()
    one = RationalFunction.const(R, 1)
    zero = RationalFunction.const(R, 0)
    assert conj_membership(ConjugatePoint(A, psi, one, 5)) == []
    Z = RFMatrix.zero(R, 2)
    assert conj_membership(ConjugatePoint(Z, Z, zero, 5)) == []
    assert conj_membership(ConjugatePoint(Z, N(R), zero, 5)) == []


def test_conj_membership_reports_each_violation():
    R = ring(5)
    one = RationalFunction.const(R, 1)
    Z = RFMatrix.zero(R, 2)
    bad = conj_membership(ConjugatePoint(Z, mat([["x", 0], [0, "x"]], R), one, 5))
    assert bad == [
        "p-curvature identity psi_p = lambda * theta",
        "horizontality d theta + [A, theta] = 0",
        "trace zero",
    ]
    only_trace = conj_membership(ConjugatePoint(Z, RFMatrix.identity(R, 2), RationalFunction.const(R, 0), 5))
    assert only_trace == ["trace zero"]
