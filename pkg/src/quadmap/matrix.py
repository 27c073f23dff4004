"""Dense matrices over a field context, plus the Gaussian-elimination kernel."""
from __future__ import annotations

from .errors import CtxMismatch, NotSquare, ShapeMismatch, Singular


def rref(ctx, rows, ncols=None):
    """Reduced row echelon form of a list of raw-value rows.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows.
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    A = [list(r) for r in rows if any(r)]
    pivots = []
    r = 0
    mul, sub, inv = ctx.mul, ctx.sub, ctx.inv
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pr = A[r]
        s = inv(pr[c])
        if s != ctx.one:
            pr = A[r] = [mul(a, s) for a in pr]
        for i in range(len(A)):
            if i != r:
                f = A[i][c]
                if f != 0:
                    row = A[i]
                    A[i] = [sub(a, mul(f, b)) if b != 0 else a for a, b in zip(row, pr)]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(ctx, rows, ncols=None):
    return len(rref(ctx, rows, ncols)[1])


def nullspace(ctx, rows, ncols):
    """Basis of ``{w : rows . w = 0}`` as a list of raw vectors."""
    R, piv = rref(ctx, rows, ncols)
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        w = [ctx.zero] * ncols
        w[f] = ctx.one
        for i, p in enumerate(piv):
            w[p] = ctx.neg(R[i][f])
        basis.append(w)
    return basis


def solve(ctx, rows, rhs):
    """One solution ``x`` of ``rows . x = rhs`` or ``None`` when inconsistent."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    R, piv = rref(ctx, aug, ncols + 1)
    if piv and piv[-1] == ncols:
        return None
    x = [ctx.zero] * ncols
    for i, p in enumerate(piv):
        x[p] = R[i][ncols]
    return x


def det(ctx, rows):
    n = len(rows)
    A = [list(r) for r in rows]
    d = ctx.one
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return ctx.zero
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = ctx.neg(d)
        d = ctx.mul(d, A[c][c])
        s = ctx.inv(A[c][c])
        for i in range(c + 1, n):
            f = ctx.mul(A[i][c], s)
            if f != 0:
                A[i] = [ctx.sub(a, ctx.mul(f, b)) for a, b in zip(A[i], A[c])]
    return d


class ConstMatrix:
    """Immutable matrix of raw field values."""

    __slots__ = ("ctx", "rows")

    def __init__(self, ctx, rows):
        self.ctx = ctx
        self.rows = tuple(tuple(r) for r in rows)
        if self.rows and len({len(r) for r in self.rows}) > 1:
            raise ShapeMismatch("ragged matrix")

    @classmethod
    def from_values(cls, ctx, rows):
        return cls(ctx, [[ctx.convert(a) for a in r] for r in rows])

    @classmethod
    def identity(cls, ctx, n):
        return cls(ctx, [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, ctx, m, n):
        return cls(ctx, [[ctx.zero] * n for _ in range(m)])

    @classmethod
    def permutation(cls, ctx, perm):
        """Matrix ``P`` with ``P[i][perm[i]] = 1``, so ``(P A)`` row i is row ``perm[i]`` of A."""
        n = len(perm)
        return cls(ctx, [[ctx.one if j == perm[i] else ctx.zero for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, ctx, diag):
        n = len(diag)
        return cls(ctx, [[diag[i] if i == j else ctx.zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, ctx, cols):
        return cls(ctx, [list(r) for r in zip(*cols)]) if cols else cls(ctx, [])

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
        return ConstMatrix(self.ctx, list(zip(*self.rows))) if self.rows else self

    T = property(transpose)

    def _check(self, other):
        if self.ctx != other.ctx:
            raise CtxMismatch(f"matrices over {self.ctx} and {other.ctx}")

    def __matmul__(self, other):
        if isinstance(other, ConstMatrix):
            self._check(other)
            if self.ncols != other.nrows:
                raise ShapeMismatch(f"{self.shape} @ {other.shape}")
            ctx = self.ctx
            cols = list(zip(*other.rows)) if other.rows else []
            out = []
            for r in self.rows:
                row = []
                for c in cols:
                    s = ctx.zero
                    for a, b in zip(r, c):
                        if a != 0 and b != 0:
                            s = ctx.add(s, ctx.mul(a, b))
                    row.append(s)
                if not cols:
                    row = [ctx.zero] * other.ncols
                out.append(row)
            return ConstMatrix(ctx, out)
        return NotImplemented

    def apply(self, vec):
        """Matrix times a raw column vector."""
        ctx = self.ctx
        if len(vec) != self.ncols:
            raise ShapeMismatch("vector length")
        out = []
        for r in self.rows:
            s = ctx.zero
            for a, b in zip(r, vec):
                if a != 0 and b != 0:
                    s = ctx.add(s, ctx.mul(a, b))
            out.append(s)
        return out

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeMismatch("shape")
        add = self.ctx.add
        return ConstMatrix(self.ctx, [[add(a, b) for a, b in zip(r, s)]
                                      for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        neg = self.ctx.neg
        return ConstMatrix(self.ctx, [[neg(a) for a in r] for r in self.rows])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        mul = self.ctx.mul
        return ConstMatrix(self.ctx, [[mul(a, c) for a in r] for r in self.rows])

    def __eq__(self, other):
        return isinstance(other, ConstMatrix) and self.ctx == other.ctx and self.rows == other.rows

    def __hash__(self):
        return hash((self.ctx, self.rows))

    def rank(self):
        return rank(self.ctx, self.rows, self.ncols)

    def det(self):
        if self.nrows != self.ncols:
            raise NotSquare(f"determinant of a {self.shape} matrix")
        return det(self.ctx, self.rows)

    def inverse(self):
        n = self.nrows
        if n != self.ncols:
            raise NotSquare(f"inverse of a {self.shape} matrix")
        ctx = self.ctx
        aug = [list(r) + [ctx.one if i == j else ctx.zero for j in range(n)]
               for i, r in enumerate(self.rows)]
        R, piv = rref(ctx, aug, 2 * n)
        if piv[:n] != list(range(n)):
            raise Singular("matrix is not invertible")
        return ConstMatrix(ctx, [r[n:] for r in R])

    def is_invertible(self):
        return self.nrows == self.ncols and self.rank() == self.nrows

    def nullspace(self):
        return nullspace(self.ctx, self.rows, self.ncols)

    def submatrix(self, rows, cols):
        return ConstMatrix(self.ctx, [[self.rows[i][j] for j in cols] for i in rows])

    def is_zero(self):
        return all(a == 0 for r in self.rows for a in r)

    def to_lists(self):
        return [[self.ctx.fmt(a) for a in r] for r in self.rows]

    def __repr__(self):
        return f"ConstMatrix({self.ctx}, {self.to_lists()})"


def block_diag(ctx, *blocks):
    n = sum(b.nrows for b in blocks)
    out = [[ctx.zero] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, r in enumerate(b.rows):
            for j, a in enumerate(r):
                out[off + i][off + j] = a
        off += b.nrows
    return ConstMatrix(ctx, out)
