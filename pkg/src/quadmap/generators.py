"""Seeded random instances for tests and the fuzz driver.

Every generator takes a ``random.Random`` so that a seed fixes the whole
stream of instances.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .maps import PolyMap, conjugate, jacobian
from .matpoly import rank_kx
from .matrix import ConstMatrix
from .poly import Poly, pack


def random_scalar(ctx, rng: random.Random, nonzero=False, spread=3):
    """Raw field value; over Q a small integer or a half-integer."""
    while True:
        if ctx.kind == "Q":
            a = Fraction(rng.randint(-spread, spread), rng.choice((1, 1, 1, 2)))
        else:
            a = rng.randrange(ctx.cardinality)
        if a != 0 or not nonzero:
            return a


def random_quadratic_form(ctx, n, rng, density=0.5):
    terms = {}
    for i in range(n):
        for j in range(i, n):
            if rng.random() < density:
                a = random_scalar(ctx, rng)
                if a != 0:
                    e = [0] * n
                    e[i] += 1
                    e[j] += 1
                    terms[pack(e)] = a
    return Poly(ctx, n, terms)


def random_quadratic_map(ctx, n, m, rng, density=0.5):
    return PolyMap(ctx, n, [random_quadratic_form(ctx, n, rng, density) for _ in range(m)])


def random_invertible(ctx, n, rng):
    while True:
        M = ConstMatrix(ctx, [[random_scalar(ctx, rng) for _ in range(n)] for _ in range(n)])
        if M.is_invertible():
            return M


def random_unit_lower(ctx, n, rng):
    return ConstMatrix(ctx, [[ctx.one if i == j else random_scalar(ctx, rng) if j < i else ctx.zero
                              for j in range(n)] for i in range(n)])


def scramble(H: PolyMap, rng, m=None, n=None):
    """``S H(T x)`` for random invertible ``S`` and ``T``."""
    S = random_invertible(H.ctx, H.m, rng)
    T = random_invertible(H.ctx, H.n, rng)
    return conjugate(H, S, T)


def random_map_of_rank(ctx, r, rng, n_range=(3, 6), m_range=(3, 6), density=0.5, tries=500):
    """Rejection sampling on ``rk JH = r``.

    Few components or few variables keep rank ``r`` frequent; a scramble by
    random invertible ``S, T`` hides the structure.
    """
    for _ in range(tries):
        n = rng.randint(*n_range)
        m = rng.randint(*m_range)
        k = rng.randint(max(1, r - 1), r + 1)
        nv = rng.randint(min(r, n), n)
        base = random_quadratic_map(ctx, nv, k, rng, density)
        comps = [q.embed_vars(n) for q in base.comps]
        comps = comps + [Poly.zero(ctx, n)] * max(0, m - k)
        H = PolyMap(ctx, n, comps[:max(m, k)])
        if rng.random() < 0.7:
            H = scramble(H, rng)
        if rank_kx(jacobian(H)) == r:
            return H
    raise RuntimeError(f"no rank-{r} map found in {tries} tries")



def _template(ctx, kind, n, rng):
    x = [Poly.var(ctx, n, i) for i in range(n)]
    half = ctx.inv(ctx.from_int(2)) if ctx.characteristic != 2 else None
    if kind == 2:
        extra = random_quadratic_form(ctx, n, rng)
        return [extra, (x[0] * x[0]).scale(half), x[0] * x[1], (x[1] * x[1]).scale(half)]
    if kind == 3:
        extra = random_quadratic_form(ctx, n, rng)
        return [extra, x[0] * x[1], x[0] * x[2], x[1] * x[2]]
    if kind == 4:
        from .classify import case4_form
        c = random_scalar(ctx, rng, nonzero=True)
        return list(case4_form(ctx, c, n).comps)
    width = 3 if kind == 5 else 4
    sub = random_quadratic_map(ctx, width, rng.randint(3, 5), rng, 0.7)
    return [q.embed_vars(n) for q in sub.comps]


def random_rank3_map(ctx, rng, n_range=(4, 6), m_range=(4, 7), tries=500):
    """Random map with ``rk JH = 3`` drawn from a mix of unstructured maps and
    scrambled case templates; extra rows are constant combinations of the others."""
    char2 = ctx.characteristic == 2
    kinds = ["free", 3, 6] if char2 else ["free", 2, 4, 5]
    for _ in range(tries):
        kind = rng.choice(kinds)
        if kind == "free":
            H = random_map_of_rank(ctx, 3, rng, n_range, m_range)
        else:
            n = rng.randint(max(4, n_range[0]), max(4, n_range[1]))
            comps = _template(ctx, kind, n, rng)
            m = rng.randint(max(m_range[0], len(comps)), max(m_range[1], len(comps)))
            while len(comps) < m:
                p = Poly.zero(ctx, n)
                for q in comps:
                    p = p + q.scale(random_scalar(ctx, rng))
                comps.append(p)
            H = scramble(PolyMap(ctx, n, comps), rng)
        if rank_kx(jacobian(H)) == 3:
            return H
    raise RuntimeError(f"no rank-3 map found in {tries} tries")


def _random_linear_form(ctx, n, vars_, rng):
    return Poly.linear(ctx, [random_scalar(ctx, rng) if i in vars_ else ctx.zero for i in range(n)])


def _random_form_in(ctx, n, vars_, rng, density=0.6):
    sub = random_quadratic_form(ctx, len(vars_), rng, density)
    return sub.embed_vars(n, list(vars_))


def keller_family(ctx, kind, n, rng):
    """Quadratic part ``G`` of a Keller map ``x + G`` in a normal form.

    ``"triangular"``: at most three nonzero components, each in later variables.
    ``"core"``: ``(x2 f + u1, x1 b - x3 f + u2, x2 b + u3, 0, ...)``.
    ``"core4"`` (characteristic 2): the six-variable form with an extra
    coordinate ``x4 + x5 x6`` feeding back into the second component.
    """
    x = [Poly.var(ctx, n, i) for i in range(n)]
    zero = Poly.zero(ctx, n)
    if kind == "triangular":
        rows = rng.sample(range(n - 1), min(3, n - 1))
        return [(_random_form_in(ctx, n, range(i + 1, n), rng) if i in rows else zero)
                for i in range(n)]
    if kind == "core":
        if n < 5:
            raise ValueError("the core family needs at least five variables")
        rest = list(range(3, n))
        while True:
            f = _random_linear_form(ctx, n, rest, rng)
            b = _random_linear_form(ctx, n, rest, rng)
            coeffs = [[p.terms.get(1 << (16 * i), ctx.zero) for i in rest] for p in (f, b)]
            from .matrix import rank as _rank
            if _rank(ctx, coeffs, len(rest)) == 2:
                break
        u = [_random_form_in(ctx, n, rest, rng, 0.4) for _ in range(3)]
        return [x[1] * f + u[0], x[0] * b - x[2] * f + u[1], x[1] * b + u[2]] + [zero] * (n - 3)
    if kind == "core4":
        if n < 6:
            raise ValueError("the core4 family needs at least six variables")
        a = random_scalar(ctx, rng)
        bb = random_scalar(ctx, rng)
        u2 = _random_form_in(ctx, n, [3] + list(range(6, n)), rng, 0.5)
        g2 = (x[0] * x[4] - x[2] * x[5] + (x[3] * x[4]).scale(a) - (x[3] * x[5]).scale(bb) + u2)
        return [x[1] * x[5], g2, x[1] * x[4], x[4] * x[5]] + [zero] * (n - 4)
    raise ValueError(f"unknown family {kind!r}")


def random_keller_map(ctx, rng, n_range=(5, 7), kinds=None):
    """``S^{-1} o (x + G) o S`` for a random family member ``G`` and invertible ``S``.

    In characteristic 2 random square terms are added as well; they leave the
    Jacobian unchanged.  Families that need more variables than ``n_range``
    allows are left out.
    """
    char2 = ctx.characteristic == 2
    if kinds is None:
        kinds = ["triangular"]
        if n_range[1] >= 5:
            kinds.append("core")
        if char2 and n_range[1] >= 6:
            kinds.append("core4")
    kind = rng.choice(kinds)
    lo = {"core4": 6, "core": max(5, n_range[0])}.get(kind, n_range[0])
    n = rng.randint(lo, max(lo, n_range[1]))
    G = keller_family(ctx, kind, n, rng)
    if char2:
        G = [g + Poly(ctx, n, {pack([2 if j == i else 0 for j in range(n)]): ctx.one})
             if rng.random() < 0.3 else g for g, i in zip(G, [rng.randrange(n) for _ in G])]
    S = random_invertible(ctx, n, rng)
    H = conjugate(PolyMap(ctx, n, G), S.inverse(), S)
    return PolyMap.identity(ctx, n) + H, kind
