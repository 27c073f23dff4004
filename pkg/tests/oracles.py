"""Slow, obviously-correct reference computations used to cross-check the library."""
from __future__ import annotations

import itertools
from fractions import Fraction

from quadmap.poly import Poly


def perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_det(rows, ctx, nvars):
    """Determinant of a square grid of Poly by the permutation expansion."""
    n = len(rows)
    total = Poly.zero(ctx, nvars)
    for perm in itertools.permutations(range(n)):
        term = Poly.const(ctx, nvars, ctx.one)
        for i, j in enumerate(perm):
            term = term * rows[i][j]
            if term.is_zero():
                break
        if perm_sign(perm) < 0:
            term = -term
        total = total + term
    return total


def minor_rank(M):
    """Largest k with a nonzero k x k minor (small matrices only)."""
    m, n = M.nrows, M.ncols
    for k in range(min(m, n), 0, -1):
        for rs in itertools.combinations(range(m), k):
            for cs in itertools.combinations(range(n), k):
                sub = [[M.rows[i][j] for j in cs] for i in rs]
                if not leibniz_det(sub, M.ctx, M.nvars).is_zero():
                    return k
    return 0


def gauss_rank(ctx, rows):
    """Rank over a prime field or Q by textbook elimination on Python numbers.

    Only prime fields and Q; the entries are the raw field values.
    """
    if ctx.kind == "Q":
        A = [[Fraction(a) for a in r] for r in rows]
        inv = lambda a: 1 / a
        red = lambda a: a
    else:
        p = ctx.p
        A = [[int(a) % p for a in r] for r in rows]
        inv = lambda a: pow(a, p - 2, p)
        red = lambda a: a % p
    rank = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        f = inv(A[rank][c])
        for i in range(len(A)):
            if i != rank and A[i][c] != 0:
                g = A[i][c] * f
                A[i] = [red(x - g * y) for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank


def eval_map(F, point):
    return [p.evaluate(point) for p in F.comps]


def random_points(ctx, n, rng, count=4):
    from quadmap.generators import random_scalar
    return [[random_scalar(ctx, rng, spread=5) for _ in range(n)] for _ in range(count)]
