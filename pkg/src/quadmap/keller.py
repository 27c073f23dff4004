"""Keller maps ``x + H`` with ``H`` quadratic homogeneous and ``rk JH <= 3``.

The decomposition builds a flag of constant vectors adapted to ``JH``.  A
constant vector ``t`` may join the flag when ``JH t`` lies in the
``K[x]``-span of the vectors already chosen; a flag through all of ``K^n``
makes the map triangular.  When no such vector exists the remaining part
must contain a three-dimensional block similar to

    [[0, f, 0], [b, 0, -f], [0, b, 0]]

with independent linear forms ``f, b`` in later variables.  That block is
split off as a whole and the flag continues past it.  Each block turns
into elementary automorphisms, and the certificate is checked by
composition before it is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import matrix as la
from .errors import (ContractViolation, DegreeTooHigh, NotKeller, NotQuadraticHomogeneous,
                     NotSquareMap, PreconditionViolated, RankTooHigh, ShapeMismatch,
                     TriangularizationStuck, FieldTooSmall)
from .maps import (AffineAuto, ElementaryAuto, PolyMap, TameCertificate, conjugate,
                   hessian_const, jacobian, jacobian_wrt, verify_certificate)
from .matpoly import (PolyMatrix, _complete_basis, constant_kernel, constant_vectors_in_colspace,
                      det, evenrk_reduce, is_nilpotent, rank_kx, row_compression,
                      symmetric_reduce)
from .matrix import ConstMatrix, block_diag
from .poly import Poly, drop_squares, pack


@dataclass(frozen=True)
class TriangularizationResult:
    """Outcome of a constant similarity ``T^{-1} N T``.

    ``kind`` is ``"Triangular"`` (strictly lower triangular after reordering
    rows and columns by ``permutation``) or ``"SpecialFB"``.  For the special
    block ``variant`` names where the minus sign sits: ``"minus-b"`` is
    ``[[0,f,0],[b,0,f],[0,-b,0]]`` and ``"minus-f"`` is ``[[0,f,0],[b,0,-f],[0,b,0]]``.
    """

    kind: str
    T: ConstMatrix
    permutation: tuple = None
    f: Poly = None
    b: Poly = None
    variant: str = None

    def normal_form(self, N: PolyMatrix) -> PolyMatrix:
        return self.T.inverse() @ N @ self.T


@dataclass(frozen=True)
class KellerInput:
    F: PolyMap
    H: PolyMap

    @classmethod
    def from_map(cls, F: PolyMap):
        if F.m != F.n:
            raise NotSquareMap(f"{F.m} components in {F.n} variables")
        H = F - PolyMap.identity(F.ctx, F.n)
        if not H.is_quadratic_homogeneous():
            raise PreconditionViolated("F - x is not quadratic homogeneous")
        return cls(F, H)


@dataclass(frozen=True)
class TameReport:
    keller: bool
    rank: int
    case: int
    certificate: TameCertificate
    square_part: PolyMap
    verified: bool
    T: ConstMatrix = None
    blocks: tuple = ()

    def to_json(self):
        sq = None
        if self.square_part is not None and not self.square_part.is_zero():
            sq = self.square_part.to_strings()
        return {"keller": self.keller, "rank": self.rank, "case": self.case,
                "certificate": self.certificate.to_json(), "square_part": sq,
                "verified": self.verified}


# ---- Keller test -------------------------------------------------------------

def is_keller(F: PolyMap) -> bool:
    """``det JF`` is a nonzero constant."""
    if F.m != F.n:
        raise NotSquareMap(f"{F.m} components in {F.n} variables")
    H = F - PolyMap.identity(F.ctx, F.n)
    if H.is_quadratic_homogeneous():
        # an adapted flag exhibits JH as block triangular with nilpotent
        # diagonal blocks, which already proves det JF = 1
        try:
            adapted_flag(jacobian(H))
            return True
        except (TriangularizationStuck, ContractViolation):
            pass
    d = det(jacobian(F))
    return d.is_constant() and not d.is_zero()


# ---- the adapted flag ----------------------------------------------------------

def _basis_with(ctx, vecs, n):
    """Columns ``vecs`` followed by standard vectors completing them to a basis."""
    comp = _complete_basis(ctx, vecs, n)
    return ConstMatrix.from_columns(ctx, list(vecs) + comp), comp


def _quotient(N: PolyMatrix, flag):
    """Matrix of ``N`` on ``K^n / span(flag)`` and the lifting basis of the quotient."""
    ctx = N.ctx
    n = N.nrows
    B, comp = _basis_with(ctx, flag, n)
    k = len(flag)
    Np = B.inverse() @ N @ B
    return Np.submatrix(range(k, n), range(k, n)), comp


def _lift(ctx, comp, w):
    n = len(comp[0])
    out = [ctx.zero] * n
    for c, e in zip(w, comp):
        if c != 0:
            out = [ctx.add(a, ctx.mul(c, b)) for a, b in zip(out, e)]
    return out


def _independent(ctx, base, cands, n):
    """Members of ``cands`` that extend ``base`` one at a time, in order."""
    cur = [list(v) for v in base]
    r = la.rank(ctx, cur, n) if cur else 0
    out = []
    for v in cands:
        if la.rank(ctx, cur + [list(v)], n) > r:
            cur.append(list(v))
            out.append(list(v))
            r += 1
    return out


def _core_subspace(Q: PolyMatrix):
    """Basis of the common kernel of the largest covector flag of ``Q``.

    Covectors ``z`` are collected while ``z Q`` lies in the span of the ones
    already found; what they cut out is the part no triangular flag reaches.
    """
    ctx = Q.ctx
    q = Q.nrows
    Z = []
    while True:
        P = la.nullspace(ctx, Z, q) if Z else [[ctx.one if i == j else ctx.zero for j in range(q)]
                                               for i in range(q)]
        if not P:
            return []
        QP = Q @ ConstMatrix.from_columns(ctx, P)
        new = _independent(ctx, Z, constant_kernel(QP, "left"), q)
        if not new:
            return P
        Z.extend(new)


def special_block(N: PolyMatrix):
    """``A`` with ``A^{-1} N A = [[0,f,0],[b,0,-f],[0,b,0]]``, plus ``(f, b)``.

    ``N`` is a 3 x 3 nilpotent matrix of linear forms with no triangularizing
    flag.  The middle vector spans the constant part of the column space; the
    outer two span the constant vectors that ``N`` maps onto multiples of it.
    """
    ctx = N.ctx
    nv = N.nvars
    state = {"N": N.to_strings()}
    us = constant_vectors_in_colspace(N)
    if len(us) != 1:
        raise TriangularizationStuck("column space does not contain exactly one constant line",
                                     N.to_strings())
    u = us[0]
    p = next(i for i, a in enumerate(u) if a != 0)
    # covectors killing u
    Pk = la.nullspace(ctx, [u], 3)
    W = constant_kernel(ConstMatrix(ctx, Pk) @ N, "right")
    if len(W) != 2:
        raise TriangularizationStuck("vectors mapped onto the constant line do not form a plane",
                                     N.to_strings())
    a1, a3 = W
    up = ctx.inv(u[p])

    def phi(a):
        col = N.apply_const(a)
        h = col[p].scale(up)
        for i in range(3):
            if col[i] != h.scale(u[i]):
                raise ContractViolation("N a is not a multiple of the constant vector", state)
        return h

    phi1, phi3 = phi(a1), phi(a3)
    # N u = g1 a1 + g3 a3 with linear forms g1, g3
    Nu = N.apply_const(u)
    A2 = ConstMatrix.from_columns(ctx, [a1, a3])
    t1, t3 = {}, {}
    for k in sorted({k for p_ in Nu for k in p_.terms}):
        sol = la.solve(ctx, A2.rows, [p_.terms.get(k, ctx.zero) for p_ in Nu])
        if sol is None:
            raise ContractViolation("N u leaves the plane of a1, a3", state)
        t1[k], t3[k] = sol
    g1, g3 = Poly(ctx, nv, t1), Poly(ctx, nv, t3)
    # phi = R (g1, g3) with R = r [[0, 1], [-1, 0]]
    lin = [g1, g3]
    allk = sorted({k for p_ in lin + [phi1, phi3] for k in p_.terms})
    G = [[g.terms.get(k, ctx.zero) for g in lin] for k in allk]
    if la.rank(ctx, G, 2) != 2:
        raise TriangularizationStuck("f and b are dependent", N.to_strings())
    R = []
    for ph in (phi1, phi3):
        sol = la.solve(ctx, G, [ph.terms.get(k, ctx.zero) for k in allk])
        if sol is None:
            raise ContractViolation("N a1, N a3 not spanned by g1, g3", state)
        R.append(sol)
    r = R[0][1]
    if R[0][0] != 0 or R[1][1] != 0 or R[1][0] != ctx.neg(r) or r == 0:
        raise ContractViolation("pairing of the outer vectors is not alternating", state)
    rinv = ctx.inv(r)
    A = ConstMatrix.from_columns(ctx, [a1, u, [ctx.mul(a, rinv) for a in a3]])
    f, b = g1, g3.scale(r)
    zero = Poly.zero(ctx, nv)
    target = PolyMatrix(ctx, nv, [[zero, f, zero], [b, zero, -f], [zero, b, zero]])
    if A.inverse() @ N @ A != target:
        raise ContractViolation("special block does not verify", state)
    return A, f, b


def adapted_flag(N: PolyMatrix, allow_core=True):
    """Constant basis adapted to ``N`` and its block structure.

    Returns ``(T, blocks)``: the columns of ``T`` in flag order and a list of
    blocks, each ``("single", i)`` or ``("core", i)`` (core occupying
    ``i, i+1, i+2``).  ``N T`` keeps every column inside the span of the
    columns before it, except inside a core block.
    """
    ctx = N.ctx
    n = N.nrows
    flag, blocks = [], []
    while len(flag) < n:
        Q, comp = _quotient(N, flag)
        ker = constant_kernel(Q, "right")
        if ker:
            for w in ker:
                blocks.append(("single", len(flag)))
                flag.append(_lift(ctx, comp, w))
            continue
        if not allow_core:
            raise TriangularizationStuck("no constant vector extends the flag", Q.to_strings())
        U = _core_subspace(Q)
        if len(U) != 3:
            raise TriangularizationStuck(f"untriangularizable part has dimension {len(U)}, not 3",
                                         Q.to_strings())
        q = Q.nrows
        B2, _ = _basis_with(ctx, U, q)
        Q2 = B2.inverse() @ Q @ B2
        if any(Q2.rows[i][j] for i in range(3, q) for j in range(3)):
            raise ContractViolation("core subspace is not invariant", {"Q": Q.to_strings()})
        A, _, _ = special_block(Q2.submatrix(range(3), range(3)))
        core = ConstMatrix.from_columns(ctx, U) @ A
        blocks.append(("core", len(flag)))
        for j in range(3):
            flag.append(_lift(ctx, comp, core.column(j)))
    return ConstMatrix.from_columns(ctx, flag), blocks


def _strictly_lower(M: PolyMatrix):
    return all(not M.rows[i][j] for i in range(M.nrows) for j in range(i, M.ncols))


def _strictly_upper(M: PolyMatrix):
    return all(not M.rows[i][j] for i in range(M.nrows) for j in range(0, i + 1))


def triangularize_nilpotent(N: PolyMatrix) -> TriangularizationResult:
    """Constant ``T`` with ``T^{-1} N T`` strictly lower triangular.

    Already triangular input keeps ``T = I``; a strictly upper triangular one
    records the reversing permutation instead.
    """
    ctx = N.ctx
    n = N.nrows
    if N.ncols != n:
        raise ShapeMismatch("triangularization needs a square matrix")
    I = ConstMatrix.identity(ctx, n)
    if _strictly_lower(N):
        return TriangularizationResult("Triangular", I, tuple(range(n)))
    if _strictly_upper(N):
        return TriangularizationResult("Triangular", I, tuple(reversed(range(n))))
    T, _ = adapted_flag(N, allow_core=False)
    # the flag makes T^{-1} N T strictly upper; reverse it
    T = ConstMatrix.from_columns(ctx, [T.column(j) for j in reversed(range(n))])
    res = TriangularizationResult("Triangular", T, tuple(range(n)))
    if not _strictly_lower(res.normal_form(N)):
        raise ContractViolation("triangularization does not verify", {"N": N.to_strings()})
    return res


# ---- three-row normal form -------------------------------------------------------

def lem3_normal_form(H: PolyMap) -> TriangularizationResult:
    """Normal form of ``N = J_{x1,x2,x3} (H1, H2, H3)`` when only three Jacobian rows live.

    Either a triangularizing ``T`` (3 x 3), or ``T`` with
    ``T^{-1} N T = [[0,f,0],[b,0,f],[0,-b,0]]`` and independent linear
    forms ``f, b`` free of ``x1, x2, x3``.
    """
    if H.n < 3 or H.m < 3:
        raise PreconditionViolated("needs three components in at least three variables")
    J = jacobian(H)
    if any(i > 2 for i in J.nonzero_rows()):
        raise PreconditionViolated("Jacobian rows beyond the third are nonzero")
    N = J.submatrix(range(3), range(3))
    if not is_nilpotent(N):
        raise PreconditionViolated("leading 3 x 3 block is not nilpotent")
    try:
        return triangularize_nilpotent(N)
    except TriangularizationStuck:
        pass
    ctx = H.ctx
    A, f, b = special_block(N)
    if any(i < 3 for i in f.variables() | b.variables()):
        raise ContractViolation("f or b involves x1, x2 or x3", {"f": str(f), "b": str(b)})
    D = ConstMatrix.diagonal(ctx, [ctx.one, ctx.one, ctx.neg(ctx.one)])
    T = A @ D
    zero = Poly.zero(ctx, H.n)
    want = PolyMatrix(ctx, H.n, [[zero, f, zero], [b, zero, f], [zero, -b, zero]])
    res = TriangularizationResult("SpecialFB", T, None, f, b, "minus-b")
    if res.normal_form(N) != want:
        raise ContractViolation("special form does not verify", {"N": N.to_strings()})
    return res


# ---- principal minors in the first-row position ------------------------------------

@dataclass(frozen=True)
class MinorReport:
    """Nonzero principal minors of ``J H~`` and how they pair up.

    ``nonzero`` lists ``(indices, det)`` with 0-based indices; ``pairs`` lists
    index pairs ``(M, M')`` with ``det M' = -det M``.
    """

    variant: str
    nonzero: tuple = ()
    pairs: tuple = ()
    support_ok: bool = True
    hessian_ok: bool = True
    leading_minors_zero: bool = True

    def to_json(self):
        return {"variant": self.variant,
                "nonzero": [{"indices": [i + 1 for i in idx], "det": str(d)}
                            for idx, d in self.nonzero],
                "pairs": [[[i + 1 for i in a], [i + 1 for i in b]] for a, b in self.pairs]}


def _support_width(J: PolyMatrix):
    """Smallest ``w`` with ``J`` nonzero only in row 1 and the first ``w`` columns."""
    w = 0
    for i, row in enumerate(J.rows):
        if i == 0:
            continue
        for j, p in enumerate(row):
            if p:
                w = max(w, j + 1)
    return w


def _principal_minors(J: PolyMatrix, sizes=None):
    from itertools import combinations
    n = J.nrows
    out = []
    zr = set(J.zero_rows())
    zc = {j for j in range(n) if all(not J.rows[i][j] for i in range(n))}
    for k in (sizes or range(1, n + 1)):
        for idx in combinations(range(n), k):
            if zr.intersection(idx) or zc.intersection(idx):
                continue
            d = det(J.submatrix(idx, idx))
            if d:
                out.append((idx, d))
    return out


def _hessian_is_perm_diag(q: Poly, lo):
    H = hessian_const(q)
    n = H.nrows
    for i in range(lo, n):
        nz = [j for j in range(lo, n) if H.rows[i][j] != 0]
        if len(nz) > 1:
            return False
        if nz and H.rows[nz[0]][i] == 0:
            return False
    return True


def _leading_part(h1: Poly):
    return h1.partial_evaluate({0: h1.ctx.zero})


def principal_minor_normalize(H: PolyMap):
    """``(T, report)`` bringing ``H~ = T^{-1} H(T x)`` into the first-row normal position.

    Input: ``JH`` nilpotent and nonzero only in the first row and the first
    2 columns, or the first 3 columns in characteristic 2.  ``T`` keeps that
    support, makes the Hessian of ``H~_1`` restricted to ``x1 = 0`` a
    permutation times a diagonal matrix, and clears the principal minors of
    the leading block.  The report lists the nonzero principal minors of the
    whole ``J H~`` and checks that they cancel in pairs.
    """
    ctx = H.ctx
    n = H.n
    if H.m != n:
        raise NotSquareMap(f"{H.m} components in {n} variables")
    J = jacobian(H)
    w = _support_width(J)
    if w <= 2:
        variant, w = "i", 2
    elif w == 3 and ctx.characteristic == 2:
        variant = "ii"
    else:
        raise PreconditionViolated("Jacobian support is not the first row plus two (three) columns")
    if n < w:
        raise PreconditionViolated("too few variables")
    if not is_nilpotent(J):
        raise PreconditionViolated("Jacobian is not nilpotent")
    T = ConstMatrix.identity(ctx, n)
    for _ in range(2 * n + 2):
        Ht = conjugate(H, T.inverse(), T)
        # Hessian of the leading part of H~_1 with respect to x2..xn
        M = hessian_const(_leading_part(Ht.comps[0])).submatrix(range(1, n), range(1, n))
        red = evenrk_reduce(M) if ctx.characteristic == 2 else symmetric_reduce(M)
        T = T @ block_diag(ctx, ConstMatrix.identity(ctx, 1), red.T)
        Ht = conjugate(H, T.inverse(), T)
        N = jacobian(Ht).submatrix(range(w), range(w))
        if not _principal_minors(N):
            break
        move = _row_move(N)
        if move is None:
            raise ContractViolation("leading principal minors cannot be cleared",
                                    {"N": N.to_strings()})
        i, j, lam = move
        E = [[ctx.one if a == b else ctx.zero for b in range(n)] for a in range(n)]
        E[i][j] = lam
        T = T @ ConstMatrix(ctx, E)
    else:
        raise ContractViolation("principal-minor normalization does not settle", {"H": H.to_strings()})
    Ht = conjugate(H, T.inverse(), T)
    report = _minor_report(Ht, variant, w)
    return T, report


def _row_move(N: PolyMatrix):
    """``(i, j, lam)`` with row ``i`` of ``N`` equal to ``lam`` times row ``j`` (``j >= 1``)."""
    ctx = N.ctx
    w = N.nrows
    for j in range(1, w):
        rj = N.rows[j]
        if not any(rj):
            continue
        piv = next(c for c, p in enumerate(rj) if p)
        key = max(rj[piv].terms)
        for i in range(w):
            if i == j or not any(N.rows[i]):
                continue
            ri = N.rows[i]
            lam = ctx.div(ri[piv].terms.get(key, ctx.zero), rj[piv].terms[key])
            if lam != 0 and all(a == b.scale(lam) for a, b in zip(ri, rj)):
                return i, j, lam
    return None


def _minor_report(Ht: PolyMap, variant, w):
    ctx = Ht.ctx
    n = Ht.n
    Jt = jacobian(Ht)
    support_ok = _support_width(Jt) <= w
    hessian_ok = _hessian_is_perm_diag(_leading_part(Ht.comps[0]), 1)
    nonzero = _principal_minors(Jt)
    lead = _principal_minors(Jt.submatrix(range(w), range(w)))
    pairs = []
    if nonzero:
        if variant != "ii":
            raise ContractViolation("nonzero principal minor outside characteristic-2 position",
                                    {"minors": [(i, str(d)) for i, d in nonzero]})
        x2x3 = pack([0, 1, 1] + [0] * (n - 3))
        used = set()
        for idx, d in nonzero:
            if len(idx) != 2 or 0 not in idx:
                raise ContractViolation("nonzero principal minor is not a 2 x 2 corner minor",
                                        {"indices": idx, "det": str(d)})
            try:
                d.exact_div(Poly(ctx, n, {x2x3: ctx.one}))
            except ArithmeticError:
                raise ContractViolation("x2 x3 does not divide a nonzero principal minor",
                                        {"indices": idx, "det": str(d)})
        for a, (idx, d) in enumerate(nonzero):
            if idx in used:
                continue
            partners = [jdx for jdx, e in nonzero if jdx != idx and e == -d]
            if len(partners) != 1 or partners[0] in used:
                raise ContractViolation("principal minor has no unique canceling partner",
                                        {"indices": idx, "det": str(d)})
            used.update((idx, partners[0]))
            pairs.append((idx, partners[0]))
    return MinorReport(variant, tuple(nonzero), tuple(pairs), support_ok, hessian_ok, not lead)


# ---- translations of the case-4 form ------------------------------------------------

def lem4_translation(Ht: PolyMap, M: ConstMatrix) -> AffineAuto:
    """Translation ``G = x + g`` with ``Ht(G(x)) - (Ht + M x)`` constant.

    Requires ``deg det(J Ht + M) <= 2``; then ``M x = J Ht(x) g`` has a
    constant solution ``g`` and ``det(J Ht + M) = 0``.
    """
    ctx = Ht.ctx
    if Ht.m != 4 or Ht.n != 4 or M.shape != (4, 4):
        raise ShapeMismatch("needs a 4 x 4 system")
    J = jacobian(Ht)
    d = det(J + PolyMatrix.from_const(M, 4))
    if d.degree() > 2:
        raise DegreeTooHigh(f"deg det(J Ht + M) = {d.degree()} > 2")
    # J(x) g = M x, one block of equations per variable
    rows, rhs = [], []
    for k in range(4):
        Ck = J.coefficient_matrix(k)
        rows.extend(Ck.rows)
        rhs.extend(M.column(k))
    g = la.solve(ctx, rows, rhs)
    if g is None:
        raise ContractViolation("no translation despite the degree bound",
                                {"Ht": Ht.to_strings(), "M": M.to_lists()})
    G = AffineAuto(ConstMatrix.identity(ctx, 4), tuple(g))
    from .maps import compose
    resid = compose(Ht, G.as_map()) - Ht - PolyMap.linear(M)
    if any(p.degree() > 0 for p in resid.comps) or d:
        raise ContractViolation("translation does not verify", {"residual": resid.to_strings()})
    return G


# ---- tame decomposition -----------------------------------------------------------

def _later_only(p: Poly, i):
    return all(j > i for j in p.variables())


def block_factors(G: PolyMap, blocks):
    """Elementary factors of ``x + G`` in the order they act.

    ``G`` must respect ``blocks``: a single block ``i`` depends on later
    variables only, a core block ``i, i+1, i+2`` has the shape
    ``(x2 f + u1, x1 b - x3 f + u2, x2 b + u3)`` in its own coordinates with
    ``f, b, u_k`` in later variables.
    """
    ctx = G.ctx
    n = G.n
    x = [Poly.var(ctx, n, i) for i in range(n)]
    acting = []
    state = {"G": G.to_strings(), "blocks": list(blocks)}
    for kind, i in blocks:
        if kind == "single":
            g = G.comps[i]
            if not _later_only(g, i):
                raise ContractViolation(f"component {i + 1} depends on earlier variables", state)
            acting.append(ElementaryAuto(n, i, g))
            continue
        g1, g2, g3 = G.comps[i:i + 3]
        f = g1.differentiate(i + 1)
        b = g2.differentiate(i)
        u1 = g1 - x[i + 1] * f
        u2 = g2 - (x[i] * b - x[i + 2] * f)
        u3 = g3 - x[i + 1] * b
        if not all(_later_only(p, i + 2) for p in (f, b, u1, u2, u3)):
            raise ContractViolation(f"core block at {i + 1} has the wrong shape", state)
        acting += [ElementaryAuto(n, i, x[i + 1] * f), ElementaryAuto(n, i + 2, x[i + 1] * b),
                   ElementaryAuto(n, i + 1, x[i] * b - x[i + 2] * f),
                   ElementaryAuto(n, i + 2, u3), ElementaryAuto(n, i + 1, u2),
                   ElementaryAuto(n, i, u1)]
    return [e for e in acting if e.a]


def _drop_square_map(G: PolyMap):
    return PolyMap(G.ctx, G.n, [drop_squares(p) for p in G.comps])


def _absorb_monomial(T: ConstMatrix, factors):
    """``T o E_{i,a} o T^{-1} = E_{s(i), d_i a(T^{-1} x)}`` when ``T e_i = d_i e_{s(i)}``."""
    from .maps import substitute_linear
    ctx = T.ctx
    n = T.nrows
    sigma, d = [], []
    for i in range(n):
        col = T.column(i)
        nz = [j for j, a in enumerate(col) if a != 0]
        if len(nz) != 1:
            return None
        sigma.append(nz[0])
        d.append(col[nz[0]])
    Ti = T.inverse()
    out = []
    for e in factors:
        a = substitute_linear(PolyMap(ctx, n, [e.a]), Ti).comps[0].scale(d[e.i])
        out.append(ElementaryAuto(n, sigma[e.i], a))
    return out


def tame_decompose(F: PolyMap, classify=True) -> TameReport:
    """Certificate writing the Keller map ``F = x + H`` (``rk JH <= 3``) as
    ``T o E_1 o ... o E_k o T^{-1}`` with elementary ``E_j``.

    In characteristic 2 the certificate matches ``F`` up to terms ``c x_i^2``;
    the difference is returned as ``square_part``.  With ``classify`` the
    rank-3 case label is attached to the report.
    """
    inp = KellerInput.from_map(F)
    H = inp.H
    ctx = H.ctx
    n = H.n
    char2 = ctx.characteristic == 2
    J = jacobian(H)
    # a flag proves the Keller property on its own; the determinant is the fallback
    try:
        flag = adapted_flag(J)
    except (TriangularizationStuck, ContractViolation):
        flag = None
        if not is_keller(F):
            raise NotKeller("det JF is not a nonzero constant")
    r = rank_kx(J)
    if r > 3:
        raise RankTooHigh(f"rank of JH is {r}")
    case = None
    if r == 3 and classify:
        from .classify import classify_rk3
        try:
            case = classify_rk3(H).case
        except FieldTooSmall:
            case = None
        if case == 4:
            raise ContractViolation("a Keller map cannot be in case 4", {"H": H.to_strings()})
    if flag is None:
        raise ContractViolation("Keller map with no adapted flag", {"H": H.to_strings()})
    T, blocks = flag
    G = conjugate(H, T.inverse(), T)
    if char2:
        G = _drop_square_map(G)
    acting = block_factors(G, blocks)
    factors = list(reversed(acting))
    if T != ConstMatrix.identity(ctx, n):
        absorbed = _absorb_monomial(T, factors)
        if absorbed is not None:
            factors = absorbed
        else:
            factors = [AffineAuto(T)] + factors + [AffineAuto(T.inverse())]
    cert = TameCertificate(ctx, n, tuple(factors))
    res = verify_certificate(cert, F, "up_to_square_part" if char2 else "exact")
    if not res.ok:
        raise ContractViolation("certificate does not compose to F",
                                {"F": F.to_strings(), "discrepancy": res.discrepancy.to_strings()})
    square = res.square_part if char2 else PolyMap(ctx, n, [Poly.zero(ctx, n)] * n)
    return TameReport(True, r, case, cert, square, True, T, tuple(blocks))
