"""Normal forms of quadratic homogeneous maps under ``H -> S H(T x)``.

``classify_rkr`` bounds the number of nonzero Jacobian rows in terms of the
rank ``r``; ``classify_rk3`` sorts rank-3 maps into six explicit cases.
Every report is re-verified against its structural predicate before it is
returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import matrix as la
from .errors import (ContractViolation, FieldTooSmall, HypothesisViolated,
                     NotQuadraticHomogeneous, PreconditionViolated, RankMismatch)
from .maps import PolyMap, apply_linear, conjugate, jacobian, substitute_linear
from .matpoly import (PolyMatrix, column_compression, columns_pairwise_dependent_over_K,
                      constant_kernel, constant_vectors_in_colspace, irlem_decompose, rank_kx,
                      row_compression, solve_constant_combination)
from .matrix import ConstMatrix, block_diag
from .poly import Poly, SHIFT, pack

FORM_NAMES = {1: "RowBound", 2: "ColsNonzero_r", 3: "ColsNonzero_rp1_char2"}


@dataclass(frozen=True)
class RkrReport:
    r: int
    S: ConstMatrix
    T: ConstMatrix
    form: int
    nonzero_row_count: int
    route: str = ""
    witnesses: dict = field(default_factory=dict, compare=False)

    @property
    def form_name(self):
        return FORM_NAMES[self.form]


@dataclass(frozen=True)
class CaseReport:
    case: int
    S: ConstMatrix
    T: ConstMatrix
    c: object = None
    route: str = ""
    witnesses: dict = field(default_factory=dict, compare=False)
    verified: bool = False

    def to_json(self):
        ctx = self.S.ctx
        wit = {}
        for k, v in self.witnesses.items():
            if isinstance(v, (list, tuple)) and v and not isinstance(v[0], (list, tuple, str)):
                wit[k] = [ctx.fmt(a) for a in v]
            elif isinstance(v, (int, str)):
                wit[k] = v
            else:
                wit[k] = str(v)
        return {"case": self.case, "S": self.S.to_lists(), "T": self.T.to_lists(),
                "c": None if self.c is None else ctx.fmt(self.c),
                "route": self.route, "witnesses": wit, "verified": self.verified}


# ---- small helpers -----------------------------------------------------------

def _require_quadratic(H: PolyMap):
    if not H.is_quadratic_homogeneous():
        raise NotQuadraticHomogeneous("every component must be zero or a quadratic form")


def _identity(ctx, n):
    return ConstMatrix.identity(ctx, n)


def _embed_top_left(M: ConstMatrix, n):
    """``M`` in the top-left corner of an ``n x n`` identity."""
    ctx = M.ctx
    k = M.nrows
    out = [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)]
    for i in range(k):
        for j in range(k):
            out[i][j] = M.rows[i][j]
    return ConstMatrix(ctx, out)


def _embed_at(M: ConstMatrix, n, offset):
    ctx = M.ctx
    k = M.nrows
    out = [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)]
    for i in range(k):
        for j in range(k):
            out[offset + i][offset + j] = M.rows[i][j]
    return ConstMatrix(ctx, out)


def nonzero_rows(H: PolyMap):
    J = jacobian(H)
    return J.nonzero_rows()


def nonzero_columns(H: PolyMap):
    return jacobian(H).nonzero_columns()


def minimal_row_count(J: PolyMatrix):
    """Fewest nonzero rows reachable by constant row operations."""
    return J.nrows - len(constant_kernel(J, "left"))


def row_bound_1(r):
    return Fraction(r * r - r, 2) + 1


def row_bound_all(r):
    return Fraction(r * r + r, 2)


# ---- general rank: row and column normal forms ---------------------------------

def classify_rkr(H: PolyMap) -> RkrReport:
    """Normal form of a quadratic homogeneous map in terms of ``r = rk JH``.

    Form 1: at most ``r^2/2 - r/2 + 1`` nonzero Jacobian rows.
    Form 2: characteristic not 2, only the first ``r`` columns nonzero.
    Form 3: characteristic 2, only the first ``r + 1`` columns nonzero.
    The rows are always compressed to at most ``r^2/2 + r/2``.
    """
    _require_quadratic(H)
    ctx = H.ctx
    m, n = H.m, H.n
    J = jacobian(H)
    r = rank_kx(J)
    S_rows = row_compression(J)
    k = minimal_row_count(J)
    if k <= row_bound_1(r):
        rep = RkrReport(r, S_rows, _identity(ctx, n), 1, k, "row-compression")
        return _verified_rkr(H, rep)
    char2 = ctx.characteristic == 2
    try:
        dec = irlem_decompose(J, r)
    except FieldTooSmall:
        dec = None
    if dec is not None:
        Ht = conjugate(H, dec.S, dec.T)
        Mt = jacobian(Ht)
        B = Mt.blocks(r).B
        if B.is_zero():
            if char2:
                raise ContractViolation("B = 0 in characteristic 2 contradicts the rank",
                                        {"H": H.to_strings()})
            route, form = "generic-point:B=0", 2
        elif constant_vectors_in_colspace(B):
            raise ContractViolation("constant vector in the column space of B but too many rows",
                                    {"H": H.to_strings(), "rows": k})
        elif char2 and rank_kx(B) <= 1:
            ok, _ = columns_pairwise_dependent_over_K(B)
            if not ok:
                raise ContractViolation("rank-one B without pairwise dependent columns",
                                        {"B": B.to_strings()})
            route, form = "generic-point:char2-rank1", 3
        else:
            raise ContractViolation("row bound of form 1 fails after the generic-point split",
                                    {"H": H.to_strings(), "rows": k})
        # columns beyond r (form 2) or r + 1 (form 3) are constant-kernel directions of Mt
        T2 = column_compression(Mt)
        T = dec.T @ T2
        H2 = substitute_linear(H, T)
        S = row_compression(jacobian(H2))
        rep = RkrReport(r, S, T, form, k, route, {"v": list(dec.v)})
        return _verified_rkr(H, rep)
    # no generic point over K: the column forms are read off the constant right kernel
    d = len(constant_kernel(J, "right"))
    if not char2 and d >= n - r:
        form = 2
    elif char2 and d >= n - r - 1:
        form = 3
    else:
        raise ContractViolation("no generic point and no column form over the base field",
                                {"H": H.to_strings(), "kernel_dim": d})
    T = column_compression(J)
    S = row_compression(jacobian(substitute_linear(H, T)))
    rep = RkrReport(r, S, T, form, k, "kernel-descent")
    return _verified_rkr(H, rep)


def _verified_rkr(H, rep):
    Ht = conjugate(H, rep.S, rep.T)
    ok, reason = verify_rkr_predicate(Ht, rep)
    if not ok:
        raise ContractViolation(f"rank-r report fails its predicate: {reason}",
                                {"H": H.to_strings(), "Ht": Ht.to_strings(), "form": rep.form})
    return rep


def verify_rkr_predicate(Ht: PolyMap, rep: RkrReport):
    r = rep.r
    J = jacobian(Ht)
    rows = J.nonzero_rows()
    cols = J.nonzero_columns()
    char = Ht.ctx.characteristic
    if rows and max(rows) + 1 > row_bound_all(r):
        return False, f"nonzero row {max(rows) + 1} beyond r^2/2 + r/2"
    if rep.form == 1:
        if rows and max(rows) + 1 > row_bound_1(r):
            return False, "form 1 row bound violated"
    elif rep.form == 2:
        if char == 2:
            return False, "form 2 needs characteristic other than 2"
        if cols and max(cols) + 1 > r:
            return False, "form 2 column support violated"
    elif rep.form == 3:
        if char != 2:
            return False, "form 3 needs characteristic 2"
        if cols and max(cols) + 1 > r + 1:
            return False, "form 3 column support violated"
    else:
        return False, f"unknown form {rep.form}"
    if (rep.form in (2, 3) or r <= 2) and rank_kx(J) > r:
        return False, "rank exceeds r"
    return True, ""


# ---- case-4 normal form ----------------------------------------------------------

def case4_form(ctx, c, n=4):
    """``(x1 x3 + c x2 x4, x2 x3 - x1 x4, x3^2/2 + c x4^2/2, x1^2/2 + c x2^2/2)``."""
    half = ctx.inv(ctx.from_int(2))
    hc = ctx.mul(half, c)
    def mono(*exps):
        e = list(exps) + [0] * (n - 4)
        return pack(e)
    one = ctx.one
    comps = [
        {mono(1, 0, 1, 0): one, mono(0, 1, 0, 1): c},
        {mono(0, 1, 1, 0): one, mono(1, 0, 0, 1): ctx.neg(one)},
        {mono(0, 0, 2, 0): half, mono(0, 0, 0, 2): hc},
        {mono(2, 0, 0, 0): half, mono(0, 2, 0, 0): hc},
    ]
    return PolyMap(ctx, n, [Poly(ctx, n, t) for t in comps])


def case4_relation(Ht: PolyMap, c):
    """``H1^2 + c H2^2 - 4 H3 H4`` (identically zero on the case-4 form)."""
    ctx = Ht.ctx
    H1, H2, H3, H4 = Ht.comps[:4]
    return H1 * H1 + (H2 * H2).scale(c) - (H3 * H4).scale(ctx.from_int(4))


def _squarefree_int(a):
    """``(s, t)`` with ``a = s t^2`` and ``s`` squarefree (trial division)."""
    sign = -1 if a < 0 else 1
    a = abs(a)
    s, t = 1, 1
    p = 2
    while p * p <= a and p < 1_000_000:
        e = 0
        while a % p == 0:
            a //= p
            e += 1
        if e:
            t *= p ** (e // 2)
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(a)
    if r * r == a:
        t *= r
    else:
        s *= a
    return sign * s, t


def square_class(ctx, c):
    """``(rep, t)`` with ``c = rep * t^2``; ``rep`` is a canonical square-class representative."""
    if ctx.kind == "Q":
        num, den = c.numerator, c.denominator
        s, t = _squarefree_int(num * den)
        return Fraction(s), Fraction(t, den)
    root = ctx.sqrt(c)
    if root is not None:
        return ctx.one, root
    for a in ctx.elements():
        if a != 0 and ctx.sqrt(a) is None:
            root = ctx.sqrt(ctx.div(c, a))
            if root is not None:
                return a, root
    return c, ctx.one


def diagonalize_symmetric(M: ConstMatrix):
    """Invertible ``T`` with ``T^t M T`` diagonal (characteristic not 2), completing squares."""
    ctx = M.ctx
    n = M.nrows
    W = [list(r) for r in M.rows]
    T = [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)]

    def colop(j, l, lam):
        # column j += lam * column l, and the matching row operation
        for a in range(n):
            W[a][j] = ctx.add(W[a][j], ctx.mul(lam, W[a][l]))
        for b in range(n):
            W[j][b] = ctx.add(W[j][b], ctx.mul(lam, W[l][b]))
        for a in range(n):
            T[a][j] = ctx.add(T[a][j], ctx.mul(lam, T[a][l]))

    def swap(i, j):
        for row in W:
            row[i], row[j] = row[j], row[i]
        W[i], W[j] = W[j], W[i]
        for row in T:
            row[i], row[j] = row[j], row[i]

    for k in range(n):
        if W[k][k] == 0:
            j = next((j for j in range(k + 1, n) if W[j][j] != 0), None)
            if j is not None:
                swap(k, j)
            else:
                j = next((j for j in range(k + 1, n) if W[k][j] != 0), None)
                if j is None:
                    continue
                colop(k, j, ctx.one)
        piv = ctx.inv(W[k][k])
        for j in range(k + 1, n):
            if W[k][j] != 0:
                colop(j, k, ctx.neg(ctx.mul(W[k][j], piv)))
    Tm = ConstMatrix(ctx, T)
    D = Tm.transpose() @ M @ Tm
    if any(D.rows[i][j] != 0 for i in range(n) for j in range(n) if i != j):
        raise ContractViolation("symmetric diagonalization failed")
    return Tm, [D.rows[i][i] for i in range(n)]


def ccoldep_witness(Hc: PolyMap, r=None):
    """Constant ``v`` with ``J(Hc) v = diag(I_r, 0) x``; its first ``r`` entries are not all zero."""
    ctx = Hc.ctx
    if ctx.characteristic == 2:
        raise PreconditionViolated("needs characteristic other than 2")
    J = jacobian(Hc)
    if r is None:
        r = rank_kx(J)
    m, n = J.shape
    if J.blocks(r).C.is_zero():
        raise PreconditionViolated("block C is zero")
    target = [Poly.var(ctx, Hc.n, i) if i < r else Poly.zero(ctx, Hc.n) for i in range(m)]
    v = solve_constant_combination(J, target)
    if v is None:
        raise PreconditionViolated("Jacobian is not in generic-point position")
    if all(a == 0 for a in v[:r]):
        raise ContractViolation("witness vanishes on the first r coordinates", {"v": v})
    C = J.blocks(r).C
    vp = [Poly.const(ctx, Hc.n, a) for a in v[:r]]
    for row in C.rows:
        s = Poly.zero(ctx, Hc.n)
        for p, q in zip(row, vp):
            s = s + p * q
        if s:
            raise ContractViolation("C v' is not zero", {"v": v})
    return v


_DET_CHECKS = {
    "a3": "coefficient of x1^4 in det JH",
    "b3": "coefficient of x1^3*x2 in det JH",
    "a1": "coefficient of x1^3*x3 in det JH",
    "a2": "coefficient of x2^3*x3 in det JH",
    "ct": "coefficient of x1^2*x3*x4 in det JH",
    "b2": "coefficient of x1*x2^2*x3 in det JH",
    "b1": "coefficient of x1^2*x2*x3 in det JH",
}


def rk3calc_normalize(H: PolyMap, v=None):
    """``(S, T, c)`` with ``S H(T x)`` equal to the case-4 form.

    Hypotheses: four components in four variables, ``J H_4 = (x1, c x2, 0, 0)``
    with ``c != 0``, some ``v`` with ``J H v = (x1, x2, x3, 0)`` and
    ``(v1, v2, v3) != 0``, and a last Jacobian column spanning no constant vector.
    """
    ctx = H.ctx
    if H.m != 4 or H.n != 4:
        raise HypothesisViolated("needs four components in four variables")
    if ctx.characteristic == 2:
        raise HypothesisViolated("d(H4)/dx1 = x1 is impossible in characteristic 2")
    x = [Poly.var(ctx, 4, i) for i in range(4)]
    zero = Poly.zero(ctx, 4)
    J = jacobian(H)
    row4 = J.rows[3]
    c = row4[1].linear_coefficients()[1]
    if row4[0] != x[0] or row4[1] != x[1].scale(c) or row4[2] or row4[3] or c == 0:
        raise HypothesisViolated("last Jacobian row is not (x1, c x2, 0, 0) with c nonzero")
    if v is None:
        v = solve_constant_combination(J, [x[0], x[1], x[2], zero])
        if v is None:
            raise HypothesisViolated("no v with JH v = (x1, x2, x3, 0)")
    v = list(v)
    if J.apply_const(v) != [x[0], x[1], x[2], zero]:
        raise HypothesisViolated("JH v differs from (x1, x2, x3, 0)")
    if all(a == 0 for a in v[:3]):
        raise HypothesisViolated("first three coordinates of v vanish")
    if v[0] != 0 or v[1] != 0:
        raise HypothesisViolated("v1 = v2 = 0 is forced by the last row")
    v3 = v[2]
    v3i = ctx.inv(v3)
    one, z = ctx.one, ctx.zero
    S1 = ConstMatrix.diagonal(ctx, [v3, v3, v3, one])
    T1 = ConstMatrix.from_columns(ctx, [[one, z, z, z], [z, one, z, z],
                                        [ctx.mul(a, v3i) for a in v], [z, z, z, one]])
    H1 = conjugate(H, S1, T1)
    B = [row[3] for row in jacobian(H1).rows[:3]]
    if B[0]:
        lam = ctx.div(B[0].linear_coefficients()[1], c)
    elif B[1]:
        lam = ctx.neg(B[1].linear_coefficients()[0])
    else:
        raise HypothesisViolated("last column generates a nonzero constant vector")
    if lam == 0:
        raise HypothesisViolated("C B = 0 fails: B is not a multiple of (c x2, -x1, *)")
    k = ctx.inv(lam)
    K4 = ConstMatrix.diagonal(ctx, [one, one, one, k])
    T1 = T1 @ K4
    H1 = conjugate(H, S1, T1)
    J1 = jacobian(H1)
    B = [row[3] for row in J1.rows[:3]]
    if B[0] != x[1].scale(c) or B[1] != -x[0]:
        raise HypothesisViolated("C B = 0 fails: B is not (c x2, -x1, *)")
    p = B[2].linear_coefficients()
    if p[2] != 0:
        raise HypothesisViolated("B31 involves x3")
    alpha = ctx.neg(ctx.div(p[1], c))
    beta = p[0]
    ct = p[3]
    U = ConstMatrix(ctx, [[one, z, z, z], [z, one, z, z], [alpha, beta, one, z], [z, z, z, one]])
    Ui = U.inverse()
    S2 = U @ S1
    T2 = T1 @ Ui
    H2 = conjugate(H, S2, T2)
    J2 = jacobian(H2)
    if [row[3] for row in J2.rows] != [x[1].scale(c), -x[0], x[3].scale(ct), zero]:
        raise ContractViolation("column 4 is not (c x2, -x1, c~ x4, 0)", {"H": H2.to_strings()})
    if [row[2] for row in J2.rows] != [x[0], x[1], x[2], zero]:
        raise ContractViolation("column 3 is not (x1, x2, x3, 0)", {"H": H2.to_strings()})
    # clear the x1-coefficients of A_i1 with the pivot row 4
    E = [[one if i == j else z for j in range(4)] for i in range(4)]
    for i in range(3):
        t = J2.rows[i][0].linear_coefficients()[0]
        E[i][3] = ctx.neg(t)
    S3 = ConstMatrix(ctx, E) @ S2
    H3 = conjugate(H, S3, T2)
    coeff = {}
    for i in range(3):
        coeff[f"a{i + 1}"] = H3.comps[i].coefficient((1, 1, 0, 0))
        coeff[f"b{i + 1}"] = ctx.mul(ctx.from_int(2), H3.comps[i].coefficient((0, 2, 0, 0)))
    for name in ("a3", "b3", "a1", "a2"):
        if coeff[name] != 0:
            raise HypothesisViolated(f"{name} != 0 contradicts the vanishing {_DET_CHECKS[name]}")
    if ct != c:
        raise HypothesisViolated(f"c~ != c contradicts the vanishing {_DET_CHECKS['ct']}")
    for name in ("b2", "b1"):
        if coeff[name] != 0:
            raise HypothesisViolated(f"{name} != 0 contradicts the vanishing {_DET_CHECKS[name]}")
    if H3 != case4_form(ctx, c):
        raise ContractViolation("normalized map differs from the case-4 form",
                                {"H": H3.to_strings()})
    return S3, T2, c


# ---- rank three: the six cases ---------------------------------------------------

def classify_rk3(H: PolyMap) -> CaseReport:
    """Case 1-6 normal form of a quadratic homogeneous map with ``rk JH = 3``.

    Order of attempts: row compression (case 1); a constant vector in the
    column space of ``JH`` (cases 2 and 3); otherwise the generic-point split,
    whose block ``B`` has pairwise dependent columns (cases 4, 5, 6).  When
    the field has no generic point the column cases are read off the constant
    right kernel, which does not depend on the field.
    """
    _require_quadratic(H)
    ctx = H.ctx
    J = jacobian(H)
    r = rank_kx(J)
    if r != 3:
        raise RankMismatch(f"Jacobian rank is {r}, not 3")
    k = minimal_row_count(J)
    if k <= 3:
        rep = CaseReport(1, row_compression(J), _identity(ctx, H.n), None, "row-compression",
                         {"rows": k})
        return _verified_case(H, rep)
    us = constant_vectors_in_colspace(J)
    if us:
        return _verified_case(H, _route_constant(H, us[0], k))
    try:
        dec = irlem_decompose(J, 3)
    except FieldTooSmall:
        dec = None
    if dec is None:
        case = 6 if ctx.characteristic == 2 else 5
        rep = _column_case(H, case, "kernel-descent")
        if rep is None:
            if ctx.characteristic == 2:
                raise ContractViolation("no generic point and no column form in characteristic 2",
                                        {"H": H.to_strings()})
            raise FieldTooSmall(f"{ctx} has no generic point for this map; classify over an extension")
        return _verified_case(H, rep)
    return _verified_case(H, _route_pairs(H, dec))


def _column_case(H, case, route):
    """Case 5 (first 3 columns) or case 6 (first 4 columns) by column compression, or ``None``."""
    J = jacobian(H)
    width = 3 if case == 5 else 4
    if len(constant_kernel(J, "right")) < H.n - width:
        return None
    T = column_compression(J)
    S = row_compression(jacobian(substitute_linear(H, T)))
    return CaseReport(case, S, T, None, route)


def _route_constant(H, u, k):
    ctx = H.ctx
    m, n = H.m, H.n
    p = next(i for i, a in enumerate(u) if a != 0)
    cols = [list(u)] + [[ctx.one if j == i else ctx.zero for j in range(m)]
                        for i in range(m) if i != p]
    U = ConstMatrix.from_columns(ctx, cols).inverse()
    HU = apply_linear(U, H)
    rest = PolyMap(ctx, n, HU.comps[1:])
    sub = classify_rkr(rest)
    if sub.r != 2:
        raise ContractViolation("rows below the constant direction do not have rank 2",
                                {"H": H.to_strings(), "r": sub.r})
    S1 = block_diag(ctx, _identity(ctx, 1), sub.S) @ U
    T = sub.T
    H1 = conjugate(H, S1, T)
    trio = H1.comps[1:4]
    if sub.form == 1:
        raise ContractViolation("rank-2 remainder in form 1 would leave at most 3 rows",
                                {"H": H.to_strings(), "rows": k})
    if sub.form == 2:
        keys = [pack([2] + [0] * (n - 1)), pack([1, 1] + [0] * (n - 2)), pack([0, 2] + [0] * (n - 2))]
        Cf = ConstMatrix(ctx, [[q.terms.get(key, ctx.zero) for key in keys] for q in trio])
        if any(set(q.terms) - set(keys) for q in trio) or not Cf.is_invertible():
            raise ContractViolation("remainder is not spanned by x1^2, x1 x2, x2^2",
                                    {"H": H1.to_strings()})
        half = ctx.inv(ctx.from_int(2))
        Tg = ConstMatrix.diagonal(ctx, [half, ctx.one, half])
        case, Spp = 2, Tg @ Cf.inverse()
    else:
        keys = [pack([1, 1, 0] + [0] * (n - 3)), pack([1, 0, 1] + [0] * (n - 3)),
                pack([0, 1, 1] + [0] * (n - 3))]
        free = [_square_free(q) for q in trio]
        Cf = ConstMatrix(ctx, [[q.terms.get(key, ctx.zero) for key in keys] for q in free])
        if any(set(q.terms) - set(keys) for q in free) or not Cf.is_invertible():
            raise ContractViolation("remainder Jacobian is not spanned by x1 x2, x1 x3, x2 x3",
                                    {"H": H1.to_strings()})
        case, Spp = 3, Cf.inverse()
    S = _embed_at(Spp, m, 1) @ S1
    return CaseReport(case, S, T, None, "constant-in-column-space",
                      {"u": list(u), "subform": sub.form})


def _square_free(q):
    from .poly import drop_squares
    return drop_squares(q)


def _route_pairs(H, dec):
    ctx = H.ctx
    m, n = H.m, H.n
    char2 = ctx.characteristic == 2
    S0, T0 = dec.S, dec.T
    Ht = conjugate(H, S0, T0)
    Mt = jacobian(Ht)
    bl = Mt.blocks(3)
    B, C = bl.B, bl.C
    state = {"H": H.to_strings(), "v": [ctx.fmt(a) for a in dec.v]}
    if constant_vectors_in_colspace(B):
        raise ContractViolation("constant vector in colspace(B) but not in colspace(JH)", state)
    ok, _ = columns_pairwise_dependent_over_K(B)
    if not ok:
        raise ContractViolation("columns of B are not pairwise dependent and C != 0", state)
    if B.is_zero() or char2:
        rep = _column_case(H, 6 if char2 else 5, "generic-point:B=0" if B.is_zero() else
                           "generic-point:char2")
        if rep is None:
            raise ContractViolation("column case expected but kernel too small", state)
        return rep
    if C.is_zero():
        raise ContractViolation("C = 0 would give case 1", state)
    if rank_kx(C) != 1:
        raise ContractViolation("rank C = 2 would give a constant vector in colspace(B)", state)
    # only row 4 of C and only column 4 of B stay nonzero
    low = Mt.submatrix(range(3, m), range(n))
    S1 = _embed_at(row_compression(low), m, 3)
    T1 = _embed_at(column_compression(B), n, 3)
    S, T = S1 @ S0, T0 @ T1
    H2 = conjugate(H, S, T)
    J2 = jacobian(H2)
    if any(i > 3 for i in J2.nonzero_rows()) or any(j > 3 for j in J2.nonzero_columns()):
        raise ContractViolation("support exceeds the leading 4 x 4 block", state)
    h4 = H2.comps[3]
    if any(i > 2 for i in h4.variables()):
        raise ContractViolation("fourth component involves x4 or later", state)
    Hq = ConstMatrix(ctx, [row[:3] for row in _hessian_rows(h4)[:3]])
    T3, d = diagonalize_symmetric(Hq)
    order = [i for i in range(3) if d[i] != 0] + [i for i in range(3) if d[i] == 0]
    nz = sum(1 for a in d if a != 0)
    if nz == 3:
        raise ContractViolation("columns of C are independent over K", state)
    T3 = T3 @ ConstMatrix.permutation(ctx, order).transpose()
    d = [d[i] for i in order]
    T2 = _embed_top_left(T3, n)
    d1i = ctx.inv(d[0])
    S2 = _embed_top_left(block_diag(ctx, T3.inverse(), ConstMatrix.diagonal(ctx, [d1i])), m)
    S, T = S2 @ S, T @ T2
    c = ctx.mul(d[1], d1i)
    if c == 0:
        rep = _column_case(H, 5, "generic-point:c=0")
        if rep is None:
            raise ContractViolation("c = 0 but no column form", state)
        return rep
    H3 = conjugate(H, S, T)
    H3r = PolyMap(ctx, 4, [q.restrict_vars(4) for q in H3.comps[:4]])
    S4, T4, c = rk3calc_normalize(H3r)
    S = _embed_top_left(S4, m) @ S
    T = T @ _embed_top_left(T4, n)
    rep_c, t = square_class(ctx, c)
    if t != ctx.one:
        ti = ctx.inv(t)
        S = _embed_top_left(ConstMatrix.diagonal(ctx, [ctx.one, t, ctx.one, ctx.one]), m) @ S
        T = T @ _embed_top_left(ConstMatrix.diagonal(ctx, [ctx.one, ti, ctx.one, ti]), n)
    return CaseReport(4, S, T, rep_c, "generic-point:rk3calc",
                      {"v": list(dec.v), "c_raw": ctx.fmt(c)})


def _hessian_rows(q):
    from .maps import hessian_const
    return hessian_const(q).rows


def _verified_case(H, rep):
    Ht = conjugate(H, rep.S, rep.T)
    ok, reason = verify_case_predicate(Ht, rep)
    if not ok:
        raise ContractViolation(f"case {rep.case} report fails its predicate: {reason}",
                                {"H": H.to_strings(), "Ht": Ht.to_strings()})
    return CaseReport(rep.case, rep.S, rep.T, rep.c, rep.route, rep.witnesses, True)


def verify_case_predicate(Ht: PolyMap, report):
    """``(ok, reason)`` for the structural predicate of a rank-r or rank-3 report."""
    if isinstance(report, RkrReport):
        return verify_rkr_predicate(Ht, report)
    ctx = Ht.ctx
    n = Ht.n
    char2 = ctx.characteristic == 2
    J = jacobian(Ht)
    rows = J.nonzero_rows()
    cols = J.nonzero_columns()
    case = report.case
    x = [Poly.var(ctx, n, i) for i in range(n)] if n else []
    if case in (1, 2, 3, 4):
        limit = 3 if case == 1 else 4
        if rows and max(rows) >= limit:
            return False, f"nonzero Jacobian row {max(rows) + 1} beyond row {limit}"
    if case in (2, 3, 4) and (Ht.m < 4 or n < (3 if case == 3 else 2 if case == 2 else 4)):
        return False, "map too small for the case form"
    if case == 2:
        if char2:
            return False, "case 2 needs characteristic other than 2"
        half = ctx.inv(ctx.from_int(2))
        want = [(x[0] * x[0]).scale(half), x[0] * x[1], (x[1] * x[1]).scale(half)]
        if list(Ht.comps[1:4]) != want:
            return False, "components 2-4 differ from (x1^2/2, x1 x2, x2^2/2)"
    elif case == 3:
        if not char2:
            return False, "case 3 needs characteristic 2"
        want = PolyMap(ctx, n, [x[0] * x[1], x[0] * x[2], x[1] * x[2]])
        if jacobian(PolyMap(ctx, n, Ht.comps[1:4])) != jacobian(want):
            return False, "Jacobian of components 2-4 differs from J(x1 x2, x1 x3, x2 x3)"
    elif case == 4:
        if char2:
            return False, "case 4 needs characteristic other than 2"
        c = report.c
        if c is None or c == 0:
            return False, "case 4 needs a nonzero c"
        want = case4_form(ctx, c, n)
        if list(Ht.comps[:4]) != list(want.comps):
            return False, "components 1-4 differ from the case-4 form"
        if case4_relation(Ht, c):
            return False, "H1^2 + c H2^2 - 4 H3 H4 is not zero"
    elif case == 5:
        if char2:
            return False, "case 5 needs characteristic other than 2"
        if cols and max(cols) >= 3:
            return False, "nonzero Jacobian column beyond column 3"
    elif case == 6:
        if not char2:
            return False, "case 6 needs characteristic 2"
        if cols and max(cols) >= 4:
            return False, "nonzero Jacobian column beyond column 4"
    elif case != 1:
        return False, f"unknown case {case}"
    if rank_kx(J) > 3:
        return False, "Jacobian rank exceeds 3"
    return True, ""
