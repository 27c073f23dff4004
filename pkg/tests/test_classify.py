import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import minor_rank
from quadmap.classify import (CaseReport, RkrReport, case4_form, case4_relation, ccoldep_witness,
                              classify_rk3, classify_rkr, rk3calc_normalize, square_class,
                              verify_case_predicate)
from quadmap.errors import HypothesisViolated, PreconditionViolated, RankMismatch
from quadmap.field import make_field
from quadmap.generators import random_map_of_rank, random_rank3_map, scramble
from quadmap.maps import PolyMap, conjugate, jacobian
from quadmap.matpoly import rank_kx
from quadmap.matrix import ConstMatrix

Q = make_field("Q")
GF2 = make_field("GF(2)")
GF5 = make_field("GF(5)")
seeds = st.integers(0, 2**32 - 1)


def M(ctx, n, comps):
    return PolyMap.from_strings(ctx, n, comps)


def _check(H, rep):
    Ht = conjugate(H, rep.S, rep.T)
    ok, reason = verify_case_predicate(Ht, rep)
    assert ok, reason
    assert rank_kx(jacobian(Ht)) == rank_kx(jacobian(H))
    return Ht


# ---- general rank --------------------------------------------------------------

def test_rkr_examples():
    H = M(Q, 2, ["1/2*x1^2", "x1*x2", "1/2*x2^2", "0"])
    rep = classify_rkr(H)
    assert rep.r == 2
    Ht = _check(H, rep)
    assert max(jacobian(Ht).nonzero_columns()) < 2
    one = classify_rkr(M(Q, 3, ["x1*x2", "0", "0"]))
    assert one.r == 1 and one.form == 1 and one.nonzero_row_count <= 1
    sq = classify_rkr(M(GF2, 3, ["x1^2", "x2^2 + x3^2", "0"]))
    assert sq.r == 0


def test_rkr_form2_for_the_rank2_example():
    H = M(Q, 2, ["1/2*x1^2", "x1*x2", "1/2*x2^2"])
    rep = classify_rkr(H)
    # three nonzero rows exceed the form-1 bound r^2/2 - r/2 + 1 = 2
    assert rep.form == 2 and rep.form_name == "ColsNonzero_r"


@pytest.mark.parametrize("spec", ["Q", "GF(2)", "GF(3)", "GF(5)"])
def test_rkr_random(spec):
    ctx = make_field(spec)
    rng = random.Random(31)
    for _ in range(25):
        r = rng.randint(1, 3)
        H = random_map_of_rank(ctx, r, rng, (2, 5), (2, 5))
        rep = classify_rkr(H)
        assert rep.r == r
        _check(H, rep)


def test_rkr_is_deterministic():
    rng = random.Random(4)
    H = random_map_of_rank(Q, 2, rng)
    a, b = classify_rkr(H), classify_rkr(H)
    assert (a.S, a.T, a.form) == (b.S, b.T, b.form)


def test_predicate_rejects_too_many_rows():
    H = M(Q, 6, ["x1*x4", "x2*x5", "x3*x6", "x1*x2"])
    rep = CaseReport(1, ConstMatrix.identity(Q, 4), ConstMatrix.identity(Q, 6))
    ok, reason = verify_case_predicate(H, rep)
    assert not ok and "row" in reason


# ---- witnesses and the case-4 normalization -----------------------------------------

def test_ccoldep_witness_on_case4():
    for c in (1, 2, -1):
        v = ccoldep_witness(case4_form(Q, Q.from_int(c)), 3)
        assert v[0] == 0 and v[1] == 0 and v[2] != 0


def test_ccoldep_witness_identity():
    rng = random.Random(3)
    H = case4_form(Q, Q.from_int(3))
    v = ccoldep_witness(H, 3)
    x = [p for p in PolyMap.identity(Q, 4).comps]
    assert jacobian(H).apply_const(v) == x[:3] + [x[0] - x[0]]


def test_ccoldep_witness_needs_nonzero_C():
    H = M(Q, 3, ["x1^2", "x2^2", "x3^2"])
    with pytest.raises(PreconditionViolated):
        ccoldep_witness(H, 3)


@pytest.mark.parametrize("c", [1, 2, -1, 3])
def test_rk3calc_fixed_point(c):
    H = case4_form(Q, Q.from_int(c))
    S, T, cc = rk3calc_normalize(H)
    assert cc == c
    assert conjugate(H, S, T) == H


def test_rk3calc_removes_planted_multiples_of_the_last_row():
    c = Q.from_int(2)
    H = case4_form(Q, c)
    S0 = ConstMatrix(Q, [[1, 0, 0, 3], [0, 1, 0, -1], [0, 0, 1, 2], [0, 0, 0, 1]])
    H0 = conjugate(H, S0, ConstMatrix.identity(Q, 4))
    S, T, cc = rk3calc_normalize(H0)
    assert cc == c and conjugate(H0, S, T) == H


def test_rk3calc_rejects_planted_a2():
    H = case4_form(Q, Q.one)
    comps = list(H.comps)
    comps[1] = comps[1] + M(Q, 4, ["x1*x2"]).comps[0]
    with pytest.raises(HypothesisViolated) as exc:
        rk3calc_normalize(PolyMap(Q, 4, comps))
    assert "a2" in str(exc.value)


def test_square_classes():
    assert square_class(Q, Q.from_int(8)) == (2, 2)
    assert square_class(Q, Q.from_fraction(3, 4))[0] == 3
    rep, t = square_class(GF5, 3)
    assert rep == 2 and GF5.mul(rep, GF5.mul(t, t)) == 3


# ---- rank three ------------------------------------------------------------------

@pytest.mark.parametrize("c", [1, 2, -1, 3])
def test_case4_relation(c):
    H = case4_form(Q, Q.from_int(c))
    assert case4_relation(H, Q.from_int(c)).is_zero()
    rep = classify_rk3(H)
    assert rep.case == 4 and rep.c == c


def test_rk3_examples():
    H = M(Q, 4, ["x1*x3 + 2*x2*x4", "x2*x3 - x1*x4", "1/2*x3^2 + x4^2", "1/2*x1^2 + x2^2"])
    rep = classify_rk3(H)
    assert (rep.case, rep.c) == (4, 2) and rep.verified
    one = classify_rk3(M(Q, 6, ["x4^2", "x5^2", "x6^2", "0", "0", "0"]))
    assert one.case == 1
    two = M(Q, 4, ["x3*x4", "1/2*x1^2", "x1*x2", "1/2*x2^2"])
    assert minor_rank(jacobian(two)) == 3
    rep2 = classify_rk3(two)
    assert rep2.case == 2
    _check(two, rep2)


def test_rank_mismatch():
    with pytest.raises(RankMismatch):
        classify_rk3(M(Q, 2, ["x1*x2", "x1^2"]))


def test_case3_predicate_ignores_squares():
    Ht = M(GF2, 4, ["x4^2 + x1*x4", "x1*x2 + x1^2", "x1*x3", "x2*x3 + x3^2"])
    rep = CaseReport(3, ConstMatrix.identity(GF2, 4), ConstMatrix.identity(GF2, 4))
    assert verify_case_predicate(Ht, rep)[0]


@pytest.mark.parametrize("c", [1, 2, 3, 5])
def test_scrambled_case4_recovers_the_square_class(c):
    rng = random.Random(c)
    cq = Q.from_int(c)
    H = scramble(case4_form(Q, cq), rng)
    rep = classify_rk3(H)
    assert rep.case == 4
    assert rep.c == square_class(Q, cq)[0]
    _check(H, rep)


@pytest.mark.parametrize("spec", ["Q", "GF(5)", "GF(7)", "GF(2)", "GF(3)"])
def test_rk3_fuzz(spec):
    ctx = make_field(spec)
    rng = random.Random(77)
    seen = set()
    for _ in range(30):
        H = random_rank3_map(ctx, rng)
        rep = classify_rk3(H)
        assert rep.verified
        _check(H, rep)
        seen.add(rep.case)
    assert len(seen) >= 2


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_rk3_gf2_stays_over_gf2(seed):
    rng = random.Random(seed)
    H = random_rank3_map(GF2, rng)
    rep = classify_rk3(H)
    assert rep.S.ctx == GF2 and rep.T.ctx == GF2
    _check(H, rep)


def test_rk3_is_deterministic():
    rng = random.Random(8)
    H = random_rank3_map(GF5, rng)
    a, b = classify_rk3(H), classify_rk3(H)
    assert a.to_json() == b.to_json()


def test_rk3_gf2_consistent_with_gf4():
    from quadmap.field import extend
    rng = random.Random(5)
    ext = extend(GF2, 2)
    for _ in range(5):
        H = random_rank3_map(GF2, rng)
        rep = classify_rk3(H)
        L = ext.field
        HL = PolyMap(L, H.n, [p.map_coefficients(L, ext.embed) for p in H.comps])
        SL = ConstMatrix(L, [[ext.embed(a) for a in r] for r in rep.S.rows])
        TL = ConstMatrix(L, [[ext.embed(a) for a in r] for r in rep.T.rows])
        ok, reason = verify_case_predicate(conjugate(HL, SL, TL), rep)
        assert ok, reason


def test_report_json():
    rep = classify_rk3(case4_form(GF5, 2))
    data = rep.to_json()
    assert data["case"] == 4 and data["verified"] is True and data["c"] == "2"
    assert isinstance(classify_rkr(case4_form(GF5, 2)), RkrReport)
