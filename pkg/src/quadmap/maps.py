"""Polynomial maps, Jacobians, composition, and tame certificates.

Composition is written ``F o G = F(G(x))``.  A certificate lists factors
``f1, ..., fk`` meaning ``f1 o f2 o ... o fk``: the rightmost factor acts first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (CtxMismatch, IndexOutOfRange, NotSquare, ShapeMismatch, Singular,
                     WrongCharacteristic)
from .field import FieldCtx, make_field
from .matpoly import PolyMatrix
from .matrix import ConstMatrix
from .poly import Poly, drop_squares, parse_poly


class PolyMap:
    """``m`` polynomials in ``n`` variables over one field."""

    __slots__ = ("ctx", "n", "comps")

    def __init__(self, ctx: FieldCtx, n: int, comps):
        self.ctx = ctx
        self.n = n
        self.comps = tuple(comps)
        for p in self.comps:
            if p.ctx != ctx:
                raise CtxMismatch("component over a different field")
            if p.nvars != n:
                raise ShapeMismatch(f"component in {p.nvars} variables, expected {n}")

    @classmethod
    def identity(cls, ctx, n):
        return cls(ctx, n, [Poly.var(ctx, n, i) for i in range(n)])

    @classmethod
    def from_strings(cls, ctx, n, comps):
        return cls(ctx, n, [parse_poly(s, ctx, n) if isinstance(s, str) else s for s in comps])

    @classmethod
    def linear(cls, A: ConstMatrix, b=None):
        """``x -> A x + b``."""
        ctx = A.ctx
        n = A.ncols
        comps = []
        for i, row in enumerate(A.rows):
            p = Poly.linear(ctx, list(row))
            if b is not None and b[i] != 0:
                p = p + Poly.const(ctx, n, b[i])
            comps.append(p)
        return cls(ctx, n, comps)

    @property
    def m(self):
        return len(self.comps)

    def __len__(self):
        return len(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __iter__(self):
        return iter(self.comps)

    def __eq__(self, other):
        return (isinstance(other, PolyMap) and self.ctx == other.ctx
                and self.n == other.n and self.comps == other.comps)

    def __hash__(self):
        return hash((self.ctx, self.n, self.comps))

    def _same(self, other):
        if self.ctx != other.ctx:
            raise CtxMismatch("maps over different fields")
        if self.n != other.n or self.m != other.m:
            raise ShapeMismatch("maps of different shapes")

    def __add__(self, other):
        self._same(other)
        return PolyMap(self.ctx, self.n, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        self._same(other)
        return PolyMap(self.ctx, self.n, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return PolyMap(self.ctx, self.n, [-a for a in self.comps])

    def is_zero(self):
        return all(p.is_zero() for p in self.comps)

    def is_quadratic_homogeneous(self):
        return all(p.is_zero() or p.is_homogeneous(2) for p in self.comps)

    def homogeneous_component(self, d):
        return PolyMap(self.ctx, self.n, [p.homogeneous_component(d) for p in self.comps])

    def degree(self):
        return max((p.degree() for p in self.comps), default=Poly.zero(self.ctx, self.n).degree())

    def evaluate(self, point):
        return [p.evaluate(point) for p in self.comps]

    def padded(self, m):
        """Append zero components up to ``m``."""
        z = Poly.zero(self.ctx, self.n)
        return PolyMap(self.ctx, self.n, list(self.comps) + [z] * (m - self.m))

    def to_strings(self):
        return [str(p) for p in self.comps]

    def __repr__(self):
        return f"PolyMap({self.ctx}, {self.n}, {self.to_strings()})"

    def __str__(self):
        return "(" + ", ".join(self.to_strings()) + ")"


# ---- differential operators ------------------------------------------------

def jacobian(F: PolyMap) -> PolyMatrix:
    return jacobian_wrt(F, range(F.n))


def jacobian_wrt(F: PolyMap, variables) -> PolyMatrix:
    """Columns are the partial derivatives with respect to ``variables`` (0-based)."""
    variables = list(variables)
    for j in variables:
        if not 0 <= j < F.n:
            raise IndexOutOfRange(f"variable index {j}")
    return PolyMatrix(F.ctx, F.n, [[p.differentiate(j) for j in variables] for p in F.comps])


def hessian(f: Poly) -> PolyMatrix:
    n = f.nvars
    first = [f.differentiate(i) for i in range(n)]
    return PolyMatrix(f.ctx, n, [[first[i].differentiate(j) for j in range(n)] for i in range(n)])


def hessian_const(f: Poly) -> ConstMatrix:
    """Hessian of a polynomial of degree at most two, as a constant matrix."""
    H = hessian(f)
    if any(not p.is_constant() for r in H.rows for p in r):
        raise ValueError("Hessian is not constant")
    return ConstMatrix(f.ctx, [[p.constant_term() for p in r] for r in H.rows])


# ---- composition and conjugation ------------------------------------------

def compose(F: PolyMap, G: PolyMap) -> PolyMap:
    """``F(G(x))``."""
    if F.ctx != G.ctx:
        raise CtxMismatch("maps over different fields")
    if G.m != F.n:
        raise ShapeMismatch(f"cannot feed {G.m} components into {F.n} variables")
    return PolyMap(F.ctx, G.n, [p.substitute(list(G.comps)) for p in F.comps])


def linear_images(T: ConstMatrix):
    return [Poly.linear(T.ctx, list(row)) for row in T.rows]


def apply_linear(S: ConstMatrix, H: PolyMap) -> PolyMap:
    """``S . H`` for a constant matrix ``S``."""
    if S.ncols != H.m:
        raise ShapeMismatch(f"{S.shape} matrix against {H.m} components")
    ctx = H.ctx
    out = []
    for row in S.rows:
        acc = Poly.zero(ctx, H.n)
        for a, p in zip(row, H.comps):
            if a != 0 and p:
                acc = acc + p.scale(a)
        out.append(acc)
    return PolyMap(ctx, H.n, out)


def substitute_linear(H: PolyMap, T: ConstMatrix) -> PolyMap:
    """``H(T x)``."""
    if T.nrows != H.n:
        raise ShapeMismatch(f"{T.shape} substitution for {H.n} variables")
    imgs = linear_images(T)
    return PolyMap(H.ctx, T.ncols, [p.substitute(imgs) for p in H.comps])


def conjugate(H: PolyMap, S: ConstMatrix, T: ConstMatrix) -> PolyMap:
    """``S H(T x)`` for invertible constant ``S`` and ``T``."""
    if S.ctx != H.ctx or T.ctx != H.ctx:
        raise CtxMismatch("matrices over a different field")
    if S.shape != (H.m, H.m) or T.shape != (H.n, H.n):
        raise ShapeMismatch("conjugating matrices have the wrong shape")
    if not S.is_invertible() or not T.is_invertible():
        raise Singular("conjugating matrices must be invertible")
    return apply_linear(S, substitute_linear(H, T))


def conjugate_similar(H: PolyMap, T: ConstMatrix) -> PolyMap:
    """``T^{-1} H(T x)``, the linear conjugate of a square map."""
    return conjugate(H, T.inverse(), T)


# ---- automorphisms ----------------------------------------------------------

@dataclass(frozen=True)
class ElementaryAuto:
    """``x_i -> x_i + a`` with ``a`` free of ``x_i``; ``i`` is 0-based."""

    n: int
    i: int
    a: Poly

    def __post_init__(self):
        if not 0 <= self.i < self.n:
            raise IndexOutOfRange(f"coordinate {self.i} not in [0, {self.n})")
        if self.a.nvars != self.n:
            raise ShapeMismatch("polynomial in the wrong number of variables")
        if self.i in self.a.variables():
            raise ValueError(f"elementary polynomial involves x{self.i + 1}")

    @property
    def ctx(self):
        return self.a.ctx

    def as_map(self):
        ctx = self.a.ctx
        comps = [Poly.var(ctx, self.n, j) for j in range(self.n)]
        comps[self.i] = comps[self.i] + self.a
        return PolyMap(ctx, self.n, comps)

    def inverse(self):
        return ElementaryAuto(self.n, self.i, -self.a)

    def to_json(self):
        return {"kind": "elem", "i": self.i + 1, "a": str(self.a)}

    def __str__(self):
        return f"E[{self.i + 1}, {self.a}]"


@dataclass(frozen=True)
class AffineAuto:
    """``x -> A x + b`` with ``A`` invertible."""

    A: ConstMatrix
    b: tuple = None

    def __post_init__(self):
        if self.A.nrows != self.A.ncols:
            raise NotSquare("affine part must be square")
        if not self.A.is_invertible():
            raise Singular("affine automorphism needs an invertible matrix")
        if self.b is None:
            object.__setattr__(self, "b", tuple([self.A.ctx.zero] * self.A.nrows))
        else:
            object.__setattr__(self, "b", tuple(self.b))

    @property
    def n(self):
        return self.A.nrows

    @property
    def ctx(self):
        return self.A.ctx

    def as_map(self):
        return PolyMap.linear(self.A, self.b)

    def inverse(self):
        Ai = self.A.inverse()
        ctx = self.A.ctx
        return AffineAuto(Ai, tuple(ctx.neg(c) for c in Ai.apply(list(self.b))))

    def is_identity(self):
        return self.A == ConstMatrix.identity(self.ctx, self.n) and all(c == 0 for c in self.b)

    def to_json(self):
        ctx = self.A.ctx
        return {"kind": "affine", "A": self.A.to_lists(), "b": [ctx.fmt(c) for c in self.b]}

    def __str__(self):
        return f"Affine({self.A.to_lists()}, {[self.ctx.fmt(c) for c in self.b]})"


@dataclass(frozen=True)
class TameCertificate:
    """Factors ``f1, ..., fk`` standing for ``f1 o ... o fk`` (rightmost acts first)."""

    ctx: FieldCtx
    n: int
    factors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.n != self.n:
                raise ShapeMismatch("factor acts on a different number of variables")
            if f.ctx != self.ctx:
                raise CtxMismatch("factor over a different field")

    def compose(self) -> PolyMap:
        G = PolyMap.identity(self.ctx, self.n)
        for f in self.factors:
            G = compose(G, f.as_map())
        return G

    def inverse_factors(self):
        return tuple(f.inverse() for f in reversed(self.factors))

    def to_json(self):
        return {"n": self.n, "field": str(self.ctx),
                "factors": [f.to_json() for f in self.factors], "order": "right-to-left"}

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data, ctx=None):
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("order", "right-to-left") != "right-to-left":
            raise ValueError("only right-to-left certificates are understood")
        ctx = ctx or make_field(data["field"])
        n = data["n"]
        factors = []
        for f in data["factors"]:
            if f["kind"] == "elem":
                factors.append(ElementaryAuto(n, f["i"] - 1, parse_poly(f["a"], ctx, n)))
            elif f["kind"] == "affine":
                A = ConstMatrix(ctx, [[ctx.parse(s) for s in r] for r in f["A"]])
                b = [ctx.parse(s) for s in f.get("b", ["0"] * n)]
                factors.append(AffineAuto(A, tuple(b)))
            else:
                raise ValueError(f"unknown factor kind {f['kind']!r}")
        return cls(ctx, n, tuple(factors))

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return " o ".join(str(f) for f in self.factors) or "id"


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    discrepancy: PolyMap
    square_part: PolyMap = None

    def __bool__(self):
        return self.ok


def verify_certificate(cert: TameCertificate, F: PolyMap, mode="exact") -> VerifyResult:
    """Compare the composed certificate with ``F``.

    ``up_to_square_part`` (characteristic 2) ignores terms ``c x_i^2`` of the
    degree-two parts; the ignored difference is returned as ``square_part``.
    """
    if F.m != F.n:
        raise ShapeMismatch("certificates describe maps with as many components as variables")
    if mode not in ("exact", "up_to_square_part"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "up_to_square_part" and F.ctx.characteristic != 2:
        raise WrongCharacteristic("square parts are only ignored in characteristic 2")
    G = cert.compose()
    diff = F - G
    if mode == "exact":
        return VerifyResult(diff.is_zero(), diff)
    reduced = []
    squares = []
    for p in diff.comps:
        q = p.homogeneous_component(2)
        free = drop_squares(q)
        reduced.append(p - q + free)
        squares.append(q - free)
    red = PolyMap(F.ctx, F.n, reduced)
    return VerifyResult(red.is_zero(), red, PolyMap(F.ctx, F.n, squares))
