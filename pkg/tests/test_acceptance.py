"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run under pytest, or directly with ``python tests/test_acceptance.py`` to get
just the eight lines.
"""
import random
import sys
import time

import pytest

from oracles import gauss_rank
from quadmap.classify import (case4_form, case4_relation, classify_rk3, classify_rkr,
                              verify_case_predicate, verify_rkr_predicate)
from quadmap.errors import DegreeTooHigh
from quadmap.field import make_field
from quadmap.generators import (random_keller_map, random_quadratic_map, random_rank3_map,
                                random_scalar)
from quadmap.keller import lem4_translation, tame_decompose
from quadmap.maps import (ElementaryAuto, PolyMap, TameCertificate, compose, conjugate, jacobian,
                          verify_certificate)
from quadmap.matpoly import PolyMatrix, det, evenrk_reduce, rank_kx
from quadmap.matrix import ConstMatrix
from quadmap.poly import Poly, parse_poly


def _line(k, ok, detail, secs):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'}  ({detail}; {secs:.2f} s)"


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# ---- the criteria ------------------------------------------------------------

def crit1():
    Q, F5 = make_field("Q"), make_field("GF(5)")
    bad = []
    for ctx, cs in ((Q, (1, 2, -1, 3)), (F5, (1, 2))):
        for c in cs:
            cc = ctx.from_int(c)
            H = case4_form(ctx, cc)
            rep = classify_rk3(H)
            Ht = conjugate(H, rep.S, rep.T)
            if rep.case != 4 or rep.c != cc or not case4_relation(Ht, cc).is_zero():
                bad.append(f"{ctx} c={c}")
    return not bad, "6 maps, case 4 with exact relation" if not bad else f"failed: {bad}"


def _E(ctx, n, i, a):
    return ElementaryAuto(n, i - 1, parse_poly(a, ctx, n))


def crit2():
    Q, F2 = make_field("Q"), make_field("GF(2)")
    six = TameCertificate(Q, 5, (_E(Q, 5, 1, "0"), _E(Q, 5, 2, "0"), _E(Q, 5, 3, "0"),
                                 _E(Q, 5, 2, "x1*x4 - x3*x5"), _E(Q, 5, 3, "x2*x4"),
                                 _E(Q, 5, 1, "x2*x5")))
    F = PolyMap.from_strings(Q, 5, ["x1 + x2*x5", "x2 + x1*x4 - x3*x5", "x3 + x2*x4", "x4", "x5"])
    four = TameCertificate(F2, 6, (_E(F2, 6, 4, "x5*x6"), _E(F2, 6, 2, "x1*x5 - x3*x6"),
                                   _E(F2, 6, 1, "x2*x6"), _E(F2, 6, 3, "x2*x5")))
    G = PolyMap.from_strings(F2, 6, ["x1 + x2*x6", "x2 + x1*x5 - x3*x6", "x3 + x2*x5",
                                     "x4 + x5*x6", "x5", "x6"])
    ok = six.compose() == F and four.compose() == G
    return ok, "6-factor over Q and 4-factor over GF(2) compose exactly"


def _zero_diag_symmetric(ctx, n, rng):
    rows = [[ctx.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i):
            rows[i][j] = rows[j][i] = random_scalar(ctx, rng)
    return ConstMatrix(ctx, rows)


def crit3_field(spec, count=500, seed=3):
    ctx = make_field(spec)
    rng = random.Random(seed)
    odd = wrong = 0
    for _ in range(count):
        M = _zero_diag_symmetric(ctx, rng.randint(2, 8), rng)
        red = evenrk_reduce(M)
        if red.T.transpose() @ M @ red.T != red.P @ red.D or red.rank != gauss_rank(ctx, M.rows):
            wrong += 1
        if red.rank % 2:
            odd += 1
    return odd, wrong


def crit3():
    parts, ok = [], True
    for spec in ("GF(2)", "GF(3)", "Q"):
        odd, wrong = crit3_field(spec)
        ok = ok and odd == 0 and wrong == 0
        parts.append(f"{spec}: {odd} odd ranks, {wrong} mismatches")
    return ok, "; ".join(parts)


def crit4():
    bad, forms = [], set()
    for spec in ("GF(5)", "Q"):
        ctx = make_field(spec)
        rng = random.Random(4)
        for k in range(150):
            H = random_quadratic_map(ctx, rng.randint(1, 6), rng.randint(1, 6), rng,
                                     rng.choice((0.2, 0.4, 0.7)))
            rep = classify_rkr(H)
            Ht = conjugate(H, rep.S, rep.T)
            ok, why = verify_rkr_predicate(Ht, rep)
            if rep.r != rank_kx(jacobian(H)):
                ok, why = False, "r differs from the rank"
            if ok and rep.form in (2, 3) and rank_kx(jacobian(Ht)) > rep.r:
                ok, why = False, "rank exceeds r"
            forms.add(rep.form)
            if not ok:
                bad.append(f"{spec}#{k}: {why}")
    return not bad, (f"300 maps, forms seen {sorted(forms)}" if not bad else f"failed: {bad[:3]}")


def crit5():
    bad = 0
    t0 = time.perf_counter()
    for spec in ("Q", "GF(2)"):
        ctx = make_field(spec)
        rng = random.Random(5)
        mode = "up_to_square_part" if ctx.characteristic == 2 else "exact"
        for _ in range(150):
            F, _ = random_keller_map(ctx, rng)
            rep = tame_decompose(F)
            if not verify_certificate(rep.certificate, F, mode).ok:
                bad += 1
    secs = time.perf_counter() - t0
    return bad == 0 and secs < 60, f"300 Keller maps, {bad} failures, budget 60 s"


def crit6():
    bad = 0
    specs = ("Q", "GF(2)", "GF(3)", "GF(5)", "GF(2,2)")
    rng = random.Random(6)
    for k in range(1000):
        ctx = make_field(specs[k % len(specs)])
        n, m = rng.randint(1, 4), rng.randint(1, 3)
        H = random_quadratic_map(ctx, n, rng.randint(1, 4), rng)
        x = PolyMatrix(ctx, n, [[Poly.var(ctx, n, i)] for i in range(n)])
        if [r[0] for r in (jacobian(H) @ x).rows] != [p.scale(ctx.from_int(2)) for p in H.comps]:
            bad += 1
        # G has a linear part so that F(G) mixes degrees
        G = random_quadratic_map(ctx, n, m, rng) + PolyMap(
            ctx, n, [Poly.var(ctx, n, i % n) for i in range(m)])
        F = random_quadratic_map(ctx, m, rng.randint(1, 3), rng)
        if jacobian(compose(F, G)) != jacobian(F).substitute(G.comps) @ jacobian(G):
            bad += 1
    return bad == 0, f"1000 maps, Euler and chain rule, {bad} failures"


def crit7():
    Q = make_field("Q")
    rng = random.Random(7)
    Ht = case4_form(Q, Q.from_int(2))
    J = jacobian(Ht)
    bad = []
    try:
        lem4_translation(Ht, ConstMatrix.zeros(Q, 4, 4))
        if not det(J).is_zero():
            bad.append("M = 0: det nonzero")
    except DegreeTooHigh:
        bad.append("M = 0 rejected")
    for k in range(20):
        # M x = J(x) g for a constant g keeps deg det(J + M) <= 2
        g = [random_scalar(Q, rng) for _ in range(4)]
        M = ConstMatrix.from_columns(Q, [J.coefficient_matrix(j).apply(g) for j in range(4)])
        try:
            G = lem4_translation(Ht, M)
        except DegreeTooHigh:
            bad.append(f"constructed #{k} rejected")
            continue
        resid = compose(Ht, G.as_map()) - Ht - PolyMap.linear(M)
        if any(p.degree() > 0 for p in resid.comps) or not det(J + PolyMatrix.from_const(M, 4)).is_zero():
            bad.append(f"constructed #{k} does not verify")
    raised = 0
    for _ in range(20):
        M = ConstMatrix(Q, [[random_scalar(Q, rng, nonzero=True) for _ in range(4)] for _ in range(4)])
        try:
            lem4_translation(Ht, M)
        except DegreeTooHigh:
            raised += 1
    ok = not bad and raised == 20
    return ok, f"M = 0 and 20 constructed M succeed, DegreeTooHigh on {raised}/20 random M" + (
        f"; {bad}" if bad else "")


def crit8():
    F2 = make_field("GF(2)")
    rng = random.Random(8)
    bad, ms = 0, set()
    for _ in range(100):
        H = random_rank3_map(F2, rng, m_range=(4, 7))
        ms.add(H.m)
        rep = classify_rk3(H)
        over = rep.S.ctx == F2 and rep.T.ctx == F2
        if not (over and verify_case_predicate(conjugate(H, rep.S, rep.T), rep)[0]):
            bad += 1
    return bad == 0, f"100 maps over GF(2), m in {sorted(ms)}, {bad} failures"


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8}
LIMITS = {1: 1.0, 3: 10.0, 5: 60.0}


def check(k):
    ok, detail, secs = _timed(CRITERIA[k])
    if k in LIMITS and secs >= LIMITS[k]:
        ok, detail = False, f"{detail}; over the {LIMITS[k]:.0f} s limit"
    return ok, _line(k, ok, detail, secs)


# ---- pytest ---------------------------------------------------------------------

def _report(k, capsys):
    ok, line = check(k)
    with capsys.disabled():
        print("\n" + line)
    return ok, line


@pytest.mark.parametrize("k", [1, 2, 4, 5, 6, 7, 8])
def test_criterion(k, capsys):
    ok, line = _report(k, capsys)
    assert ok, line


@pytest.mark.xfail(strict=True, reason="a symmetric zero-diagonal matrix has even rank only in "
                                       "characteristic 2; GF(3) and Q produce odd ranks")
def test_criterion_3(capsys):
    ok, line = _report(3, capsys)
    assert ok, line


def test_criterion_3_characteristic_2_part():
    assert crit3_field("GF(2)") == (0, 0)
    # away from characteristic 2 the reduction itself stays correct
    for spec in ("GF(3)", "Q"):
        assert crit3_field(spec, 100)[1] == 0


if __name__ == "__main__":
    results = [check(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
