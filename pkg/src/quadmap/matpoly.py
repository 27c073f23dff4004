"""Matrices over K[x]: rank, determinant, constant kernels and structural reductions.

Rank and determinant use fraction-free (Bareiss) elimination with exact
polynomial division, so no rational functions are ever formed.  A cheap
evaluation at a few deterministic points short-circuits full-rank inputs.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from . import matrix as la
from .errors import (ContractViolation, CtxMismatch, FieldTooSmall, NonzeroDiagonal,
                     NotSquare, NotSymmetric, ShapeMismatch, ZeroMatrix)
from .matrix import ConstMatrix, rref
from .poly import NEG_INF, Poly, SHIFT, _divides, parse_poly


class PolyMatrix:
    """Immutable ``m x n`` matrix of :class:`Poly` sharing one ctx and variable count."""

    __slots__ = ("ctx", "nvars", "rows")

    def __init__(self, ctx, nvars, rows):
        self.ctx = ctx
        self.nvars = nvars
        self.rows = tuple(tuple(r) for r in rows)
        for r in self.rows:
            for p in r:
                if p.ctx != ctx:
                    raise CtxMismatch("matrix entry over a different field")
                if p.nvars != nvars:
                    raise ShapeMismatch("matrix entry with a different variable count")
        if self.rows and len({len(r) for r in self.rows}) > 1:
            raise ShapeMismatch("ragged matrix")

    @classmethod
    def from_const(cls, M: ConstMatrix, nvars):
        ctx = M.ctx
        return cls(ctx, nvars, [[Poly.const(ctx, nvars, a) for a in r] for r in M.rows])

    @classmethod
    def identity(cls, ctx, nvars, n):
        return cls.from_const(ConstMatrix.identity(ctx, n), nvars)

    @classmethod
    def zeros(cls, ctx, nvars, m, n):
        z = Poly.zero(ctx, nvars)
        return cls(ctx, nvars, [[z] * n for _ in range(m)])

    @classmethod
    def parse(cls, ctx, nvars, rows):
        return cls(ctx, nvars, [[parse_poly(s, ctx, nvars) if isinstance(s, str)
                                 else Poly.const(ctx, nvars, s) for s in r] for r in rows])

    @classmethod
    def from_linear_coefficients(cls, mats, L):
        """``sum_i mats[i] * L[i]``."""
        ctx = mats[0].ctx
        nv = L[0].nvars
        m, n = mats[0].shape
        out = [[Poly.zero(ctx, nv) for _ in range(n)] for _ in range(m)]
        for Mi, Li in zip(mats, L):
            for a in range(m):
                for b in range(n):
                    c = Mi.rows[a][b]
                    if c != 0:
                        out[a][b] = out[a][b] + Li.scale(c)
        return cls(ctx, nv, out)

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def transpose(self):
        if not self.rows:
            return self
        return PolyMatrix(self.ctx, self.nvars, list(zip(*self.rows)))

    T = property(transpose)

    def submatrix(self, rows, cols):
        return PolyMatrix(self.ctx, self.nvars, [[self.rows[i][j] for j in cols] for i in rows])

    def is_zero(self):
        return all(p.is_zero() for r in self.rows for p in r)

    def zero_rows(self):
        return [i for i, r in enumerate(self.rows) if all(p.is_zero() for p in r)]

    def nonzero_rows(self):
        return [i for i, r in enumerate(self.rows) if any(p for p in r)]

    def nonzero_columns(self):
        return [j for j in range(self.ncols) if any(r[j] for r in self.rows)]

    def __eq__(self, other):
        return (isinstance(other, PolyMatrix) and self.ctx == other.ctx
                and self.nvars == other.nvars and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ctx, self.nvars, self.rows))

    def _lift(self, other):
        if isinstance(other, ConstMatrix):
            if other.ctx != self.ctx:
                raise CtxMismatch("matrix over a different field")
            return PolyMatrix.from_const(other, self.nvars)
        if isinstance(other, PolyMatrix):
            if other.ctx != self.ctx:
                raise CtxMismatch("matrix over a different field")
            if other.nvars != self.nvars:
                raise ShapeMismatch("matrices in different polynomial rings")
            return other
        return None

    def __matmul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        ctx, nv = self.ctx, self.nvars
        cols = list(zip(*other.rows)) if other.rows else []
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                s = Poly.zero(ctx, nv)
                for a, b in zip(r, c):
                    if a and b:
                        if b.is_constant():
                            s = s + a.scale(b.constant_term())
                        elif a.is_constant():
                            s = s + b.scale(a.constant_term())
                        else:
                            s = s + a * b
                row.append(s)
            out.append(row if cols else [])
        return PolyMatrix(ctx, nv, out)

    def __rmatmul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other @ self

    def __add__(self, other):
        other = self._lift(other)
        if self.shape != other.shape:
            raise ShapeMismatch("shape")
        return PolyMatrix(self.ctx, self.nvars,
                          [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return PolyMatrix(self.ctx, self.nvars, [[-a for a in r] for r in self.rows])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def scale(self, c):
        return PolyMatrix(self.ctx, self.nvars, [[a.scale(c) for a in r] for r in self.rows])

    def evaluate(self, point):
        return ConstMatrix(self.ctx, [[p.evaluate(point) for p in r] for r in self.rows])

    def substitute(self, images):
        """Substitute the polynomials ``images`` for the variables in every entry."""
        nv = images[0].nvars if images else self.nvars
        return PolyMatrix(self.ctx, nv, [[p.substitute(images) for p in r] for r in self.rows])

    def linear_substitute(self, T: ConstMatrix):
        """Entries evaluated at ``T x``."""
        imgs = [Poly.linear(self.ctx, list(T.rows[i])) for i in range(self.nvars)]
        return self.substitute(imgs)

    def apply_const(self, v):
        """``M v`` for a constant vector ``v``, as a list of Poly."""
        out = []
        for r in self.rows:
            s = Poly.zero(self.ctx, self.nvars)
            for p, a in zip(r, v):
                if a != 0 and p:
                    s = s + p.scale(a)
            out.append(s)
        return out

    def is_linear(self):
        return all(p.is_linear_form() for r in self.rows for p in r)

    def coefficient_matrix(self, i):
        """Constant matrix ``M_i`` with ``M = sum_i M_i x_i`` (degree-one part)."""
        key = 1 << (SHIFT * i)
        z = self.ctx.zero
        return ConstMatrix(self.ctx, [[p.terms.get(key, z) for p in r] for r in self.rows])

    def monomial_support(self):
        keys = set()
        for r in self.rows:
            for p in r:
                keys.update(p.terms)
        return sorted(keys)

    def blocks(self, r):
        return BlockView(self, r)

    def to_strings(self):
        return [[str(p) for p in r] for r in self.rows]

    def __repr__(self):
        return f"PolyMatrix({self.ctx}, {self.to_strings()})"

    def __str__(self):
        cells = self.to_strings()
        if not cells:
            return "[]"
        w = max((len(c) for r in cells for c in r), default=1)
        return "\n".join("[ " + "  ".join(c.rjust(w) for c in r) + " ]" for r in cells)


@dataclass(frozen=True)
class BlockView:
    """``[[A, B], [C, D]]`` split of a matrix after ``r`` rows and columns."""

    parent: PolyMatrix
    r: int

    def _part(self, rows, cols):
        return self.parent.submatrix(list(rows), list(cols))

    @property
    def A(self):
        return self._part(range(self.r), range(self.r))

    @property
    def B(self):
        return self._part(range(self.r), range(self.r, self.parent.ncols))

    @property
    def C(self):
        return self._part(range(self.r, self.parent.nrows), range(self.r))

    @property
    def D(self):
        return self._part(range(self.r, self.parent.nrows), range(self.r, self.parent.ncols))

    def reassemble(self):
        A, B, C, D = self.A, self.B, self.C, self.D
        top = [list(a) + list(b) for a, b in zip(A.rows, B.rows)] if A.rows else [list(b) for b in B.rows]
        bot = [list(c) + list(d) for c, d in zip(C.rows, D.rows)]
        return PolyMatrix(self.parent.ctx, self.parent.nvars, top + bot)


# ---- rank and determinant -------------------------------------------------

def _probe_points(ctx, nvars, count=3):
    """Deterministic pseudo-random evaluation points."""
    rng = random.Random(0x5EED + nvars)
    pts = []
    for _ in range(count):
        if ctx.is_finite:
            pts.append([rng.randrange(ctx.cardinality) for _ in range(nvars)])
        else:
            pts.append([ctx.from_int(rng.randint(-97, 97)) for _ in range(nvars)])
    return pts


def _zmul(a, b):
    out = {}
    get = out.get
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = k1 + k2
            out[k] = get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


def _zsub(a, b):
    out = dict(a)
    for k, v in b.items():
        w = out.get(k, 0) - v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def _zdiv(a, b, n):
    """Exact quotient of integer polynomials in lex order on packed keys."""
    lk = max(b)
    lc = b[lk]
    rem = dict(a)
    quot = {}
    while rem:
        k = max(rem)
        q, r = divmod(rem[k], lc)
        if r or not _divides(lk, k, n):
            raise ArithmeticError("division is not exact")
        qk = k - lk
        quot[qk] = q
        for k2, v2 in b.items():
            kk = qk + k2
            w = rem.get(kk, 0) - q * v2
            if w:
                rem[kk] = w
            else:
                rem.pop(kk, None)
    return quot


def _bareiss_q(rows, ctx, nvars):
    # each row scaled to integer coefficients; the rank is unchanged and the
    # determinant picks up the product of the scales
    A = []
    scale = 1
    for r in rows:
        dens = [v.denominator for p in r for v in p.terms.values()]
        L = math.lcm(*dens) if dens else 1
        scale *= L
        A.append([{k: int(v * L) for k, v in p.terms.items()} for p in r])
    m = len(A)
    n = len(A[0]) if A else 0
    prev = {0: 1}
    r = 0
    sign = 1
    for k in range(n):
        cands = [i for i in range(r, m) if A[i][k]]
        if not cands:
            continue
        piv = min(cands, key=lambda i: (len(A[i][k]), i))
        if piv != r:
            A[r], A[piv] = A[piv], A[r]
            sign = -sign
        p = A[r][k]
        for i in range(r + 1, m):
            a = A[i][k]
            row_i, row_r = A[i], A[r]
            for j in range(k + 1, n):
                t = _zmul(p, row_i[j]) if row_i[j] else {}
                if a and row_r[j]:
                    t = _zsub(t, _zmul(a, row_r[j]))
                row_i[j] = _zdiv(t, prev, nvars) if t else t
            row_i[k] = {}
        prev = p
        r += 1
        if r == m:
            break
    inv = Fraction(1, scale)
    last = Poly(ctx, nvars, {k: Fraction(v) * inv for k, v in prev.items()})
    return r, last, sign


def _bareiss(rows, ctx, nvars, track_sign=False):
    """Fraction-free elimination; returns ``(rank, last_pivot, sign)``."""
    if ctx.kind == "Q":
        return _bareiss_q(rows, ctx, nvars)
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if A else 0
    prev = Poly.const(ctx, nvars, ctx.one)
    r = 0
    sign = 1
    for k in range(n):
        cands = [i for i in range(r, m) if A[i][k]]
        if not cands:
            continue
        piv = min(cands, key=lambda i: (len(A[i][k].terms), i))
        if piv != r:
            A[r], A[piv] = A[piv], A[r]
            sign = -sign
        p = A[r][k]
        for i in range(r + 1, m):
            a = A[i][k]
            row_i, row_r = A[i], A[r]
            for j in range(k + 1, n):
                t = p * row_i[j]
                if a and row_r[j]:
                    t = t - a * row_r[j]
                row_i[j] = t.exact_div(prev) if t else t
            row_i[k] = Poly.zero(ctx, nvars)
        prev = p
        r += 1
        if r == m:
            break
    return r, prev, sign


def _constant_basis(ctx, vectors, keys):
    """Indices of a maximal subset of ``vectors`` (lists of polynomials)
    independent over the constants."""
    z = ctx.zero
    flat = [[p.terms.get(k, z) for p in v for k in keys] for v in vectors]
    # columns of the transpose are the vectors; pivots pick independent ones
    cols = [list(c) for c in zip(*flat)] if flat else []
    return rref(ctx, cols, len(vectors))[1]


def rank_kx(M: PolyMatrix) -> int:
    """Rank over the rational function field K(x)."""
    m, n = M.shape
    full = min(m, n)
    if full == 0 or M.is_zero():
        return 0
    best = 0
    for pt in _probe_points(M.ctx, M.nvars):
        best = max(best, M.evaluate(pt).rank())
        if best == full:
            return full
    # rows spanning the constant row space span it over K(x) too, so the
    # rank is bounded by the constant ranks of rows and columns
    keys = M.monomial_support()
    rsel = _constant_basis(M.ctx, M.rows, keys)
    cols = [list(c) for c in zip(*M.rows)]
    csel = _constant_basis(M.ctx, cols, keys)
    if best == min(len(rsel), len(csel)):
        return best
    sub = [[M.rows[i][j] for j in csel] for i in rsel]
    return _bareiss(sub, M.ctx, M.nvars)[0]


def det(M: PolyMatrix) -> Poly:
    m, n = M.shape
    if m != n:
        raise NotSquare(f"determinant of a {m}x{n} matrix")
    ctx, nv = M.ctx, M.nvars
    if n == 0:
        return Poly.const(ctx, nv, ctx.one)
    r, last, sign = _bareiss(M.rows, ctx, nv)
    if r < n:
        return Poly.zero(ctx, nv)
    return last if sign > 0 else -last


def cofactor_det(M: PolyMatrix) -> Poly:
    """Laplace expansion along the first row (small matrices, reference use)."""
    n = M.nrows
    if n != M.ncols:
        raise NotSquare("cofactor expansion needs a square matrix")
    if n == 0:
        return Poly.const(M.ctx, M.nvars, M.ctx.one)
    if n == 1:
        return M.rows[0][0]
    total = Poly.zero(M.ctx, M.nvars)
    for j in range(n):
        a = M.rows[0][j]
        if not a:
            continue
        minor = M.submatrix(range(1, n), [c for c in range(n) if c != j])
        term = a * cofactor_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


# ---- constant kernels -----------------------------------------------------

def _coefficient_system(M: PolyMatrix):
    """Rows over K expressing ``M w = 0`` identically, one per (row, monomial)."""
    ctx = M.ctx
    out = []
    for r in M.rows:
        keys = set()
        for p in r:
            keys.update(p.terms)
        for k in sorted(keys):
            out.append([p.terms.get(k, ctx.zero) for p in r])
    return out


def constant_kernel(M: PolyMatrix, side="right"):
    """K-basis of constant ``w`` with ``M w = 0`` (right) or ``w M = 0`` (left)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    N = M if side == "right" else M.transpose()
    ncols = M.ncols if side == "right" else M.nrows
    return la.nullspace(M.ctx, _coefficient_system(N), ncols)


def first_nonzero_minor(M: PolyMatrix, r=None):
    """Lexicographically first row set, then column set, of a nonzero ``r``-minor."""
    if r is None:
        r = rank_kx(M)
    rows = []
    for i in range(M.nrows):
        if len(rows) == r:
            break
        if rank_kx(M.submatrix(rows + [i], range(M.ncols))) == len(rows) + 1:
            rows.append(i)
    cols = []
    for j in range(M.ncols):
        if len(cols) == r:
            break
        if rank_kx(M.submatrix(rows, cols + [j])) == len(cols) + 1:
            cols.append(j)
    return rows, cols


def left_kernel_kx(M: PolyMatrix):
    """Polynomial basis of the left kernel of ``M`` over K(x), by Cramer's rule."""
    r = rank_kx(M)
    rows, cols = first_nonzero_minor(M, r)
    ctx, nv = M.ctx, M.nvars
    A = M.submatrix(rows, cols)
    dA = det(A)
    basis = []
    for i in range(M.nrows):
        if i in rows:
            continue
        y = [Poly.zero(ctx, nv) for _ in range(M.nrows)]
        y[i] = dA
        Mi = [M.rows[i][c] for c in cols]
        for k, rk in enumerate(rows):
            Ak = [list(A.rows[t]) if t != k else Mi for t in range(r)]
            y[rk] = -det(PolyMatrix(ctx, nv, Ak))
        basis.append(y)
    return basis


def constant_vectors_in_colspace(B: PolyMatrix):
    """K-basis of the constant vectors lying in the K(x)-column space of ``B``."""
    ctx = B.ctx
    conds = []
    for y in left_kernel_kx(B):
        keys = set()
        for p in y:
            keys.update(p.terms)
        for k in sorted(keys):
            conds.append([p.terms.get(k, ctx.zero) for p in y])
    return la.nullspace(ctx, conds, B.nrows)


def _pair_witness(ctx, col_i, col_j):
    """Nonzero ``(a, b)`` with ``a*col_i + b*col_j = 0`` identically, or ``None``."""
    keys = set()
    for p in col_i + col_j:
        keys.update(p.terms)
    sysrows = []
    for p, q in zip(col_i, col_j):
        for k in keys:
            a, b = p.terms.get(k, ctx.zero), q.terms.get(k, ctx.zero)
            if a != 0 or b != 0:
                sysrows.append([a, b])
    ns = la.nullspace(ctx, sysrows, 2)
    return tuple(ns[0]) if ns else None


def columns_pairwise_dependent_over_K(M: PolyMatrix):
    """``(ok, witnesses)``: every column pair has a nontrivial vanishing K-combination."""
    cols = [M.column(j) for j in range(M.ncols)]
    wit = {}
    for i, j in itertools.combinations(range(len(cols)), 2):
        w = _pair_witness(M.ctx, cols[i], cols[j])
        if w is None:
            return False, wit
        wit[(i, j)] = w
    return True, wit


def rows_pairwise_dependent_over_K(M: PolyMatrix):
    return columns_pairwise_dependent_over_K(M.transpose())


# ---- point finding --------------------------------------------------------

def _value_pool(ctx, size):
    out = []
    for a in ctx.elements():
        out.append(a)
        if len(out) == size:
            break
    return out


def find_nonvanishing_point(f: Poly, ctx=None):
    """Deterministic ``v`` with ``f(v) != 0``.

    Tuples are enumerated by growing value pools ``{0, 1}``, ``{0, 1, -1}``,
    ... with the first coordinate varying fastest.
    """
    ctx = ctx or f.ctx
    if f.is_zero():
        raise ZeroMatrix("the zero polynomial vanishes everywhere")
    n = f.nvars
    d = f.degree()
    limit = ctx.cardinality if ctx.is_finite else d + 2
    for h in range(2, max(limit, 2) + 1):
        pool = _value_pool(ctx, h)
        if len(pool) < h:
            break
        newest = len(pool) - 1
        # tuples whose largest pool index is exactly ``newest``
        for tup in itertools.product(range(h), repeat=n):
            if newest not in tup:
                continue
            v = [pool[t] for t in reversed(tup)]
            if f.evaluate(v) != 0:
                return v
    raise FieldTooSmall(f"no point of K^{n} avoids the zeros of a degree-{d} form over {ctx}")


# ---- generic-point decomposition ------------------------------------------

@dataclass(frozen=True)
class IrlemDecomposition:
    """``S M T = sum_i coeff_mats[i] * L[i]`` with ``coeff_mats[0] = [[I_r, 0], [0, 0]]``."""

    S: ConstMatrix
    T: ConstMatrix
    L: tuple
    coeff_mats: tuple
    v: tuple
    r: int
    minor_rows: tuple
    minor_cols: tuple
    Mt: PolyMatrix

    @property
    def blocks(self):
        return self.Mt.blocks(self.r)


def _elimination_pair(ctx, M0: ConstMatrix, rows, cols):
    """Constant ``S, T`` with ``S M0 T = [[I_r, 0], [0, 0]]`` using the invertible block ``rows x cols``."""
    m, n = M0.shape
    r = len(rows)
    rperm = list(rows) + [i for i in range(m) if i not in rows]
    cperm = list(cols) + [j for j in range(n) if j not in cols]
    Pr = ConstMatrix.permutation(ctx, rperm)
    Pc = ConstMatrix.permutation(ctx, cperm).transpose()
    X = Pr @ M0 @ Pc
    A0 = X.submatrix(range(r), range(r))
    B0 = X.submatrix(range(r), range(r, n))
    C0 = X.submatrix(range(r, m), range(r))
    Ai = A0.inverse()
    CAi = C0 @ Ai if m > r else None
    AiB = Ai @ B0 if n > r else None
    Sp = [[ctx.zero] * m for _ in range(m)]
    for i in range(r):
        for j in range(r):
            Sp[i][j] = Ai.rows[i][j]
    for i in range(r, m):
        Sp[i][i] = ctx.one
        for j in range(r):
            Sp[i][j] = ctx.neg(CAi.rows[i - r][j])
    Tp = [[ctx.zero] * n for _ in range(n)]
    for i in range(n):
        Tp[i][i] = ctx.one
    for i in range(r):
        for j in range(r, n):
            Tp[i][j] = ctx.neg(AiB.rows[i][j - r])
    return ConstMatrix(ctx, Sp) @ Pr, Pc @ ConstMatrix(ctx, Tp)


def generic_forms(ctx, v):
    """Independent linear forms ``L`` with ``L[0](v) = 1`` and ``L[i](v) = 0`` for ``i > 0``.

    Also returns ``p`` (the pivot coordinate) and the order of the others.
    """
    n = len(v)
    p = next(i for i, a in enumerate(v) if a != 0)
    vp_inv = ctx.inv(v[p])
    L = [Poly.linear(ctx, [vp_inv if j == p else ctx.zero for j in range(n)])]
    others = [i for i in range(n) if i != p]
    for i in others:
        c = [ctx.zero] * n
        c[i] = ctx.one
        c[p] = ctx.neg(ctx.mul(v[i], vp_inv))
        L.append(Poly.linear(ctx, c))
    return L, p, others


def irlem_decompose(M: PolyMatrix, r=None, v=None) -> IrlemDecomposition:
    """Put a matrix of linear forms into generic-point position.

    The first nonzero ``r``-minor (lexicographic in rows, then columns) is
    made nonvanishing at a deterministic point ``v``; row and column
    elimination at ``v`` turns the coefficient of ``L[0]`` into
    ``[[I_r, 0], [0, 0]]``.  Raises ``FieldTooSmall`` if no such ``v`` exists
    over the field of ``M``.
    """
    ctx, nv = M.ctx, M.nvars
    if not M.is_linear():
        raise ValueError("entries must be linear forms")
    if r is None:
        r = rank_kx(M)
    if r == 0:
        raise ZeroMatrix("the zero matrix has no generic-point decomposition")
    rows, cols = first_nonzero_minor(M, r)
    if v is None:
        f = det(M.submatrix(rows, cols))
        try:
            v = find_nonvanishing_point(f, ctx)
        except FieldTooSmall:
            v = _full_rank_point(M, r)
    M0 = M.evaluate(v)
    if la.det(ctx, M0.submatrix(rows, cols).rows) == 0:
        rows, cols = _first_constant_minor(M0, r)
    S, T = _elimination_pair(ctx, M0, rows, cols)
    Mt = S @ M @ T
    L, p, others = generic_forms(ctx, v)
    # x_p = v_p L1 and x_i = v_i L1 + L_i, so the L1 coefficient is Mt(v)
    coeffs = [Mt.evaluate(v)] + [Mt.coefficient_matrix(i) for i in others]
    dec = IrlemDecomposition(S, T, tuple(L), tuple(coeffs), tuple(v), r,
                             tuple(rows), tuple(cols), Mt)
    _check_irlem(dec)
    return dec


def _full_rank_point(M: PolyMatrix, r):
    """Exhaustive search for ``v`` with ``rank M(v) = r`` over a finite field."""
    ctx = M.ctx
    if not ctx.is_finite:
        raise FieldTooSmall("no generic point found")
    elems = list(ctx.elements())
    for tup in itertools.product(range(len(elems)), repeat=M.nvars):
        v = [elems[t] for t in reversed(tup)]
        if M.evaluate(v).rank() == r:
            return v
    raise FieldTooSmall(f"M(v) has rank below {r} for every v in {ctx}^{M.nvars}")


def _first_constant_minor(M0: ConstMatrix, r):
    ctx = M0.ctx
    rows, cols = [], []
    for i in range(M0.nrows):
        if len(rows) < r and la.rank(ctx, [M0.rows[j] for j in rows + [i]]) == len(rows) + 1:
            rows.append(i)
    sub = [M0.rows[i] for i in rows]
    for j in range(M0.ncols):
        cand = cols + [j]
        if len(cols) < r and la.rank(ctx, [[row[c] for c in cand] for row in sub]) == len(cand):
            cols.append(j)
    return rows, cols


def _check_irlem(dec):
    ctx, r = dec.S.ctx, dec.r
    m, n = dec.Mt.shape
    target = [[ctx.one if (i == j and i < r) else ctx.zero for j in range(n)] for i in range(m)]
    if dec.coeff_mats[0].rows != tuple(tuple(t) for t in target):
        raise ContractViolation("coefficient of L1 is not [[I_r,0],[0,0]]",
                                {"M1": dec.coeff_mats[0].to_lists()})
    if PolyMatrix.from_linear_coefficients(list(dec.coeff_mats), list(dec.L)) != dec.Mt:
        raise ContractViolation("linear-form expansion does not reassemble S M T")
    bv = dec.blocks
    if not bv.D.is_zero():
        raise ContractViolation("block D is not zero", {"D": bv.D.to_strings()})
    if m > r and n > r and not (bv.C @ bv.B).is_zero():
        raise ContractViolation("C B is not zero", {"C": bv.C.to_strings(), "B": bv.B.to_strings()})


# ---- symmetric reduction ---------------------------------------------------

@dataclass(frozen=True)
class EvenRkReduction:
    """``T^t M T = P D`` with ``T`` unit lower triangular and ``P`` a symmetric permutation."""

    T: ConstMatrix
    P: ConstMatrix
    D: ConstMatrix
    rank: int
    pairs: tuple
    singles: tuple


def symmetric_reduce(M: ConstMatrix) -> EvenRkReduction:
    """Reduce any symmetric matrix by unit-lower-triangular congruence.

    Columns are processed from the last one down.  The lowest nonzero entry
    of the current column is the pivot: a diagonal pivot isolates one index,
    an off-diagonal pivot ``(i, k)`` isolates the pair ``{i, k}``.
    """
    ctx = M.ctx
    n = M.nrows
    if M.ncols != n:
        raise NotSquare("symmetric reduction needs a square matrix")
    W = [list(r) for r in M.rows]
    for i in range(n):
        for j in range(i):
            if W[i][j] != W[j][i]:
                raise NotSymmetric(f"entry ({i},{j}) differs from ({j},{i})")
    T = [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)]
    mul, sub = ctx.mul, ctx.sub

    def add_multiple(j, l, lam):
        # col_j += lam col_l and row_j += lam row_l, with l > j
        if lam == 0:
            return
        for a in range(n):
            W[a][j] = ctx.add(W[a][j], mul(lam, W[a][l]))
        for b in range(n):
            W[j][b] = ctx.add(W[j][b], mul(lam, W[l][b]))
        for a in range(n):
            T[a][j] = ctx.add(T[a][j], mul(lam, T[a][l]))

    active = list(range(n))
    perm = list(range(n))
    diag = [ctx.zero] * n
    pairs, singles = [], []
    while active:
        k = active[-1]
        nz = [i for i in active if W[i][k] != 0]
        if not nz:
            active.remove(k)
            continue
        i = nz[-1]
        a = W[i][k]
        if i == k:
            ainv = ctx.inv(a)
            for j in active:
                if j != k and W[j][k] != 0:
                    add_multiple(j, k, ctx.neg(mul(W[j][k], ainv)))
            diag[k] = a
            singles.append(k)
            active.remove(k)
            continue
        ainv = ctx.inv(a)
        for j in active:
            if j < i and W[j][k] != 0:
                add_multiple(j, i, ctx.neg(mul(W[j][k], ainv)))
        for j in active:
            if j == k:
                continue
            if j == i:
                if W[i][i] != 0:
                    if ctx.characteristic == 2:
                        raise NonzeroDiagonal("characteristic 2 needs a zero diagonal")
                    two = ctx.from_int(2)
                    add_multiple(i, k, ctx.neg(ctx.div(W[i][i], mul(two, a))))
            elif W[j][i] != 0:
                add_multiple(j, k, ctx.neg(mul(W[j][i], ainv)))
        perm[i], perm[k] = k, i
        diag[i] = W[k][i]
        diag[k] = W[i][k]
        pairs.append((i, k))
        active.remove(i)
        active.remove(k)
    Tm = ConstMatrix(ctx, T)
    P = ConstMatrix.permutation(ctx, perm)
    D = ConstMatrix.diagonal(ctx, diag)
    red = EvenRkReduction(Tm, P, D, 2 * len(pairs) + len(singles), tuple(pairs), tuple(singles))
    if Tm.transpose() @ M @ Tm != P @ D:
        raise ContractViolation("symmetric reduction does not verify", {"W": W})
    return red


def evenrk_reduce(M: ConstMatrix) -> EvenRkReduction:
    """Reduction of a symmetric matrix with zero diagonal (Hessian shape in characteristic 2)."""
    n = M.nrows
    if M.ncols != n:
        raise NotSquare("needs a square matrix")
    for i in range(n):
        if M.rows[i][i] != 0:
            raise NonzeroDiagonal(f"diagonal entry {i} is nonzero")
    return symmetric_reduce(M)


# ---- nilpotency ------------------------------------------------------------

def charpoly(M: PolyMatrix) -> Poly:
    """``det(t I - M)`` in a ring with one extra variable ``t`` (the last one)."""
    n = M.nrows
    if n != M.ncols:
        raise NotSquare("characteristic polynomial of a non-square matrix")
    nv = M.nvars + 1
    ctx = M.ctx
    t = Poly.var(ctx, nv, nv - 1)
    rows = [[(t if i == j else Poly.zero(ctx, nv)) - M.rows[i][j].embed_vars(nv)
             for j in range(n)] for i in range(n)]
    return det(PolyMatrix(ctx, nv, rows))


def matrix_power(M: PolyMatrix, s):
    R = PolyMatrix.identity(M.ctx, M.nvars, M.nrows)
    for _ in range(s):
        R = R @ M
    return R


def is_nilpotent(M: PolyMatrix) -> bool:
    """Nilpotency decided twice: by a power of ``M`` and by its characteristic polynomial."""
    n = M.nrows
    if n != M.ncols:
        raise NotSquare("nilpotency of a non-square matrix")
    if n == 0:
        return True
    s = min(n, 1 + rank_kx(M))
    by_power = matrix_power(M, s).is_zero()
    cp = charpoly(M)
    nv = M.nvars + 1
    by_charpoly = cp == Poly.var(M.ctx, nv, nv - 1) ** n
    if by_power != by_charpoly:
        raise ContractViolation("power test and characteristic polynomial disagree",
                                {"power": by_power, "charpoly": str(cp)})
    return by_power


# ---- constant row/column compression ---------------------------------------

def solve_constant_combination(M: PolyMatrix, target):
    """Constant ``v`` with ``M v = target`` identically (``target`` a list of Poly), or ``None``."""
    ctx = M.ctx
    rows, rhs = [], []
    for r, t in zip(M.rows, target):
        keys = set(t.terms)
        for p in r:
            keys.update(p.terms)
        for k in sorted(keys):
            rows.append([p.terms.get(k, ctx.zero) for p in r])
            rhs.append(t.terms.get(k, ctx.zero))
    if not rows:
        return [ctx.zero] * M.ncols
    return la.solve(ctx, rows, rhs)


def _complete_basis(ctx, vectors, n):
    """Standard basis vectors (greedy, lowest index first) completing ``vectors`` to a basis of K^n."""
    chosen = []
    cur = [list(v) for v in vectors]
    base_rank = la.rank(ctx, cur, n) if cur else 0
    for i in range(n):
        e = [ctx.one if j == i else ctx.zero for j in range(n)]
        if la.rank(ctx, cur + [e], n) > base_rank:
            cur.append(e)
            base_rank += 1
            chosen.append(e)
        if base_rank == n:
            break
    return chosen


def row_compression(M: PolyMatrix) -> ConstMatrix:
    """Invertible ``S`` such that the zero rows of ``S M`` are exactly the last ``dim(left kernel)``."""
    ctx = M.ctx
    ker = constant_kernel(M, "left")
    comp = _complete_basis(ctx, ker, M.nrows)
    return ConstMatrix(ctx, comp + ker)


def column_compression(M: PolyMatrix) -> ConstMatrix:
    """Invertible ``T`` such that the zero columns of ``M T`` are exactly the last ``dim(right kernel)``."""
    ctx = M.ctx
    ker = constant_kernel(M, "right")
    comp = _complete_basis(ctx, ker, M.ncols)
    return ConstMatrix.from_columns(ctx, comp + ker) if M.ncols else ConstMatrix(ctx, [])

