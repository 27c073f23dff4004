import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import eval_map, random_points
from quadmap.classify import case4_form
from quadmap.errors import ShapeMismatch, Singular, WrongCharacteristic
from quadmap.field import make_field
from quadmap.generators import random_invertible, random_quadratic_map, random_scalar
from quadmap.maps import (AffineAuto, ElementaryAuto, PolyMap, TameCertificate, compose, conjugate,
                          hessian, hessian_const, jacobian, jacobian_wrt, verify_certificate)
from quadmap.matpoly import PolyMatrix, rank_kx
from quadmap.matrix import ConstMatrix
from quadmap.poly import Poly, parse_poly

Q = make_field("Q")
GF2 = make_field("GF(2)")
seeds = st.integers(0, 2**32 - 1)


def M(ctx, n, comps):
    return PolyMap.from_strings(ctx, n, comps)


def E(ctx, n, i, a):
    """1-based coordinate, as written in the text."""
    return ElementaryAuto(n, i - 1, parse_poly(a, ctx, n))


def test_jacobian_of_identity():
    assert jacobian(PolyMap.identity(Q, 3)) == PolyMatrix.identity(Q, 3, 3)


@pytest.mark.parametrize("c", [1, 2, -1, 3])
def test_case4_jacobian(c):
    J = jacobian(case4_form(Q, Q.from_int(c), 4))
    want = PolyMatrix.parse(Q, 4, [
        ["x3", f"{c}*x4", "x1", f"{c}*x2"],
        ["-x4", "x3", "x2", "-x1"],
        ["0", "0", "x3", f"{c}*x4"],
        ["x1", f"{c}*x2", "0", "0"]])
    assert J == want


def test_jacobian_wrt_subset():
    H = M(Q, 4, ["x1*x4 + x2*x3", "x3^2"])
    J = jacobian_wrt(H, [0, 2])
    assert J == PolyMatrix.parse(Q, 4, [["x4", "x2"], ["0", "2*x3"]])


def test_hessian_examples():
    assert hessian_const(parse_poly("x1*x2", GF2, 2)) == ConstMatrix(GF2, [[0, 1], [1, 0]])
    assert hessian_const(parse_poly("x1^2", GF2, 2)).is_zero()
    assert hessian_const(parse_poly("1/2*x1^2 + 1/2*x2^2", Q, 2)) == ConstMatrix.identity(Q, 2)
    Hs = hessian(parse_poly("x1^2*x2", Q, 2))
    assert Hs == Hs.transpose()


@pytest.mark.parametrize("spec", ["GF(2)", "GF(2,2)"])
def test_char2_hessian_zero_diagonal(spec):
    ctx = make_field(spec)
    rng = random.Random(5)
    for _ in range(20):
        q = random_quadratic_map(ctx, 4, 1, rng, 0.8).comps[0]
        Hm = hessian_const(q)
        assert all(Hm.rows[i][i] == 0 for i in range(4))
        assert Hm == Hm.transpose()


def test_compose_examples():
    F = M(Q, 3, ["x1*x2 + x3", "x2^2", "x1"])
    assert compose(F, PolyMap.identity(Q, 3)) == F
    cert = TameCertificate(Q, 5, (E(Q, 5, 2, "x1*x4 - x3*x5"), E(Q, 5, 3, "x2*x4"),
                                  E(Q, 5, 1, "x2*x5")))
    want = M(Q, 5, ["x1 + x2*x5", "x2 + x1*x4 - x3*x5", "x3 + x2*x4", "x4", "x5"])
    assert cert.compose() == want
    with pytest.raises(ShapeMismatch):
        compose(F, PolyMap.identity(Q, 2))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_compose_associative(seed):
    rng = random.Random(seed)
    F, G, H = (random_quadratic_map(Q, 2, 2, rng, 0.5) + PolyMap.identity(Q, 2) for _ in range(3))
    assert compose(compose(F, G), H) == compose(F, compose(G, H))


def test_compose_agrees_with_pointwise_evaluation():
    rng = random.Random(8)
    F = random_quadratic_map(Q, 3, 2, rng)
    G = random_quadratic_map(Q, 3, 3, rng)
    FG = compose(F, G)
    for pt in random_points(Q, 3, rng):
        assert eval_map(FG, pt) == eval_map(F, eval_map(G, pt))


def test_conjugate_examples():
    rng = random.Random(1)
    H = random_quadratic_map(Q, 3, 4, rng)
    I3, I4 = ConstMatrix.identity(Q, 3), ConstMatrix.identity(Q, 4)
    assert conjugate(H, I4, I3) == H
    S, T = random_invertible(Q, 4, rng), random_invertible(Q, 3, rng)
    Ht = conjugate(H, S, T)
    Tx = PolyMap.linear(T)
    assert jacobian(Ht) == S @ jacobian(H).substitute(Tx.comps) @ T
    assert rank_kx(jacobian(Ht)) == rank_kx(jacobian(H))
    with pytest.raises(Singular):
        conjugate(H, ConstMatrix.zeros(Q, 4, 4), T)


@pytest.mark.parametrize("spec", ["Q", "GF(2)", "GF(5)"])
@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_chain_rule(spec, seed):
    ctx = make_field(spec)
    rng = random.Random(seed)
    F = random_quadratic_map(ctx, 3, 2, rng) + M(ctx, 3, ["x1", "x2 + x3"])
    G = random_quadratic_map(ctx, 3, 3, rng) + PolyMap.identity(ctx, 3)
    assert jacobian(compose(F, G)) == jacobian(F).substitute(G.comps) @ jacobian(G)


@pytest.mark.parametrize("spec", ["Q", "GF(2)", "GF(3)"])
@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_euler(spec, seed):
    ctx = make_field(spec)
    rng = random.Random(seed)
    H = random_quadratic_map(ctx, 4, 3, rng)
    x = PolyMatrix(ctx, 4, [[Poly.var(ctx, 4, i)] for i in range(4)])
    lhs = [r[0] for r in (jacobian(H) @ x).rows]
    assert lhs == [p.scale(ctx.from_int(2)) for p in H.comps]


def test_elementary_inverse():
    rng = random.Random(3)
    for _ in range(10):
        a = random_quadratic_map(Q, 4, 1, rng).comps[0].partial_evaluate({1: 0})
        e = ElementaryAuto(4, 1, a)
        assert compose(e.as_map(), e.inverse().as_map()) == PolyMap.identity(Q, 4)
    with pytest.raises(ValueError):
        ElementaryAuto(2, 0, parse_poly("x1*x2", Q, 2))


def test_affine_inverse():
    rng = random.Random(4)
    A = AffineAuto(random_invertible(Q, 3, rng), (1, 2, 3))
    assert compose(A.as_map(), A.inverse().as_map()) == PolyMap.identity(Q, 3)
    with pytest.raises(Singular):
        AffineAuto(ConstMatrix.zeros(Q, 2, 2))


def test_verify_examples():
    assert verify_certificate(TameCertificate(Q, 3, ()), PolyMap.identity(Q, 3)).ok
    six = TameCertificate(Q, 5, (E(Q, 5, 1, "0"), E(Q, 5, 2, "0"), E(Q, 5, 3, "0"),
                                 E(Q, 5, 2, "x1*x4 - x3*x5"), E(Q, 5, 3, "x2*x4"),
                                 E(Q, 5, 1, "x2*x5")))
    F = M(Q, 5, ["x1 + x2*x5", "x2 + x1*x4 - x3*x5", "x3 + x2*x4", "x4", "x5"])
    assert verify_certificate(six, F).ok
    four = TameCertificate(GF2, 6, (E(GF2, 6, 4, "x5*x6"), E(GF2, 6, 2, "x1*x5 - x3*x6"),
                                    E(GF2, 6, 1, "x2*x6"), E(GF2, 6, 3, "x2*x5")))
    F2 = M(GF2, 6, ["x1 + x2*x6", "x2 + x1*x5 - x3*x6", "x3 + x2*x5", "x4 + x5*x6", "x5", "x6"])
    assert verify_certificate(four, F2, "exact").ok


def test_verify_reports_discrepancy():
    cert = TameCertificate(Q, 2, (E(Q, 2, 1, "x2^2"),))
    res = verify_certificate(cert, M(Q, 2, ["x1 + 2*x2^2", "x2"]))
    assert not res.ok and res.discrepancy == M(Q, 2, ["x2^2", "0"])


def test_up_to_square_part():
    cert = TameCertificate(GF2, 2, (E(GF2, 2, 1, "x2^2"),))
    F = M(GF2, 2, ["x1 + x1^2", "x2 + x1^2"])
    assert not verify_certificate(cert, F, "exact").ok
    res = verify_certificate(cert, F, "up_to_square_part")
    assert res.ok and res.square_part == M(GF2, 2, ["x1^2 + x2^2", "x1^2"])
    with pytest.raises(WrongCharacteristic):
        verify_certificate(TameCertificate(Q, 1, ()), PolyMap.identity(Q, 1), "up_to_square_part")


def test_certificate_json_roundtrip():
    rng = random.Random(2)
    A = random_invertible(Q, 3, rng)
    cert = TameCertificate(Q, 3, (AffineAuto(A, (0, 1, 0)), E(Q, 3, 2, "1/2*x1*x3"),
                                  AffineAuto(A.inverse())))
    back = TameCertificate.from_json(cert.dumps())
    assert back.compose() == cert.compose()
    assert cert.to_json()["order"] == "right-to-left"
