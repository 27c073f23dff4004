"""Sparse multivariate polynomials over a :class:`~quadmap.field.FieldCtx`.

Monomials are packed into a single int, 16 bits per variable, so that
multiplying monomials is integer addition and comparing packed keys is a
lexicographic monomial order (last variable most significant).  Variable
indices are 0-based in the Python API; the text form uses ``x1 .. xn``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache, total_ordering

from .errors import (CtxMismatch, IndexOutOfRange, NotQuadraticHomogeneous,
                     ParseError, ShapeMismatch, WrongCharacteristic)
from .field import FieldCtx, FieldElem

SHIFT = 16
MASK = (1 << SHIFT) - 1
MAX_EXP = (1 << (SHIFT - 1)) - 1


@total_ordering
class _MinusInfinity:
    """Degree of the zero polynomial: below every integer, equal only to itself."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("-inf-degree")

    def __repr__(self):
        return "NEG_INF"


NEG_INF = _MinusInfinity()


def pack(exps):
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e > MAX_EXP:
            raise ValueError(f"exponent {e} out of range")
        key |= e << (SHIFT * i)
    return key


def unpack(key, n):
    return tuple((key >> (SHIFT * i)) & MASK for i in range(n))


@lru_cache(maxsize=1 << 16)
def key_degree(key):
    d = 0
    while key:
        d += key & MASK
        key >>= SHIFT
    return d


@lru_cache(maxsize=64)
def _guard(n):
    g = 0
    for i in range(n):
        g |= 1 << (SHIFT * i + SHIFT - 1)
    return g


def _divides(a, b, n):
    """True iff monomial ``a`` divides monomial ``b``."""
    g = _guard(n)
    return ((b | g) - a) & g == g


class Poly:
    """Immutable polynomial; ``terms`` maps packed monomial -> nonzero raw coefficient."""

    __slots__ = ("ctx", "nvars", "terms", "_hash")

    def __init__(self, ctx: FieldCtx, nvars: int, terms=None):
        self.ctx = ctx
        self.nvars = nvars
        self.terms = {k: v for k, v in terms.items() if v != 0} if terms else {}
        self._hash = None

    @classmethod
    def _raw(cls, ctx, nvars, terms):
        # terms already free of zeros
        p = object.__new__(cls)
        p.ctx, p.nvars, p.terms, p._hash = ctx, nvars, terms, None
        return p

    # ---- constructors
    @classmethod
    def zero(cls, ctx, nvars):
        return cls._raw(ctx, nvars, {})

    @classmethod
    def const(cls, ctx, nvars, c):
        c = ctx.convert(c) if not _is_raw(ctx, c) else c
        return cls._raw(ctx, nvars, {0: c} if c != 0 else {})

    @classmethod
    def var(cls, ctx, nvars, i):
        if not 0 <= i < nvars:
            raise IndexOutOfRange(f"variable index {i} not in [0, {nvars})")
        return cls._raw(ctx, nvars, {1 << (SHIFT * i): ctx.one})

    @classmethod
    def monomial(cls, ctx, nvars, exps, c=1):
        c = ctx.convert(c)
        return cls._raw(ctx, nvars, {pack(exps): c} if c != 0 else {})

    @classmethod
    def linear(cls, ctx, coeffs):
        """Linear form ``sum coeffs[i] * x_i`` (raw coefficients)."""
        n = len(coeffs)
        return cls._raw(ctx, n, {1 << (SHIFT * i): c for i, c in enumerate(coeffs) if c != 0})

    # ---- basic predicates
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(key_degree(k) for k in self.terms)

    def is_homogeneous(self, d=None):
        degs = {key_degree(k) for k in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return d is None or degs == {d}

    def is_constant(self):
        return all(k == 0 for k in self.terms)

    def constant_term(self):
        return self.terms.get(0, self.ctx.zero)

    def coefficient(self, exps):
        return self.terms.get(pack(exps), self.ctx.zero)

    def variables(self):
        """Indices of variables occurring in some term."""
        occ = set()
        for k in self.terms:
            for i in range(self.nvars):
                if (k >> (SHIFT * i)) & MASK:
                    occ.add(i)
        return occ

    def linear_coefficients(self):
        """Coefficients of ``x_0 .. x_{n-1}`` (the degree-one part)."""
        out = [self.ctx.zero] * self.nvars
        for i in range(self.nvars):
            c = self.terms.get(1 << (SHIFT * i))
            if c is not None:
                out[i] = c
        return out

    def is_linear_form(self):
        return all(key_degree(k) == 1 for k in self.terms)

    # ---- arithmetic
    def _check(self, other):
        if self.ctx != other.ctx:
            raise CtxMismatch(f"polynomials over {self.ctx} and {other.ctx}")
        if self.nvars != other.nvars:
            raise ShapeMismatch(f"{self.nvars} vs {other.nvars} variables")

    def _coerce(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.ctx, self.nvars, self.ctx.convert(other))

    def __add__(self, other):
        other = self._coerce(other)
        ctx = self.ctx
        if len(self.terms) < len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        add = ctx.add
        for k, v in b.items():
            w = out.get(k)
            if w is None:
                out[k] = v
            else:
                s = add(w, v)
                if s == 0:
                    del out[k]
                else:
                    out[k] = s
        return Poly._raw(ctx, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        neg = self.ctx.neg
        return Poly._raw(self.ctx, self.nvars, {k: neg(v) for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        """Multiply by a raw scalar of this ctx."""
        if c == 0:
            return Poly.zero(self.ctx, self.nvars)
        mul = self.ctx.mul
        return Poly._raw(self.ctx, self.nvars, {k: mul(v, c) for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(self.ctx.convert(other))
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.ctx, self.nvars)
        ctx = self.ctx
        mul, add = ctx.mul, ctx.add
        out = {}
        get = out.get
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = k1 + k2
                w = get(k)
                out[k] = mul(v1, v2) if w is None else add(w, mul(v1, v2))
        return Poly._raw(ctx, self.nvars, {k: v for k, v in out.items() if v != 0})

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative power")
        result = Poly.const(self.ctx, self.nvars, self.ctx.one)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ctx == other.ctx and self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, FieldElem)):
            try:
                return self.terms == Poly.const(self.ctx, self.nvars, other).terms
            except CtxMismatch:
                return False
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx, self.nvars, frozenset(self.terms.items())))
        return self._hash

    # ---- exact division (lex order on packed keys)
    def exact_div(self, other):
        """Quotient of an exact division; ``ArithmeticError`` if it is not exact."""
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        ctx = self.ctx
        n = self.nvars
        lk = max(other.terms)
        lc_inv = ctx.inv(other.terms[lk])
        if len(other.terms) == 1:
            out = {}
            for k, v in self.terms.items():
                if not _divides(lk, k, n):
                    raise ArithmeticError("division is not exact")
                out[k - lk] = ctx.mul(v, lc_inv)
            return Poly._raw(ctx, n, out)
        rem = dict(self.terms)
        quot = {}
        mul, sub = ctx.mul, ctx.sub
        others = [(k, v) for k, v in other.terms.items() if k != lk]
        while rem:
            k = max(rem)
            if not _divides(lk, k, n):
                raise ArithmeticError("division is not exact")
            q = mul(rem.pop(k), lc_inv)
            dk = k - lk
            quot[dk] = q
            for k2, v2 in others:
                kk = dk + k2
                w = rem.get(kk)
                s = sub(ctx.zero if w is None else w, mul(q, v2))
                if s == 0:
                    rem.pop(kk, None)
                else:
                    rem[kk] = s
        return Poly._raw(ctx, n, quot)

    # ---- calculus and substitution
    def differentiate(self, i):
        if not 0 <= i < self.nvars:
            raise IndexOutOfRange(f"variable index {i} not in [0, {self.nvars})")
        ctx = self.ctx
        sh = SHIFT * i
        unit = 1 << sh
        out = {}
        for k, v in self.terms.items():
            e = (k >> sh) & MASK
            if e:
                c = ctx.mul(v, ctx.from_int(e))
                if c != 0:
                    out[k - unit] = c
        return Poly._raw(ctx, self.nvars, out)

    def evaluate(self, point):
        """Value at ``point`` (raw values or FieldElems of this ctx)."""
        if len(point) != self.nvars:
            raise ShapeMismatch(f"point of length {len(point)} for {self.nvars} variables")
        ctx = self.ctx
        pt = [ctx.convert(a) if not _is_raw(ctx, a) else a for a in point]
        total = ctx.zero
        cache = {}
        for k, v in self.terms.items():
            t = v
            for i in range(self.nvars):
                e = (k >> (SHIFT * i)) & MASK
                if e:
                    key = (i, e)
                    pw = cache.get(key)
                    if pw is None:
                        pw = cache[key] = ctx.pow(pt[i], e)
                    t = ctx.mul(t, pw)
                    if t == 0:
                        break
            total = ctx.add(total, t)
        return total

    def partial_evaluate(self, bindings):
        """Substitute constants for some variables; the ambient variable count is kept."""
        ctx = self.ctx
        for i in bindings:
            if not 0 <= i < self.nvars:
                raise IndexOutOfRange(f"variable index {i}")
        vals = {i: (ctx.convert(a) if not _is_raw(ctx, a) else a) for i, a in bindings.items()}
        out = {}
        for k, v in self.terms.items():
            c = v
            nk = k
            for i, a in vals.items():
                e = (k >> (SHIFT * i)) & MASK
                if e:
                    c = ctx.mul(c, ctx.pow(a, e))
                    nk -= e << (SHIFT * i)
            if c != 0:
                w = out.get(nk)
                out[nk] = c if w is None else ctx.add(w, c)
        return Poly(ctx, self.nvars, out)

    def substitute(self, images):
        """``self(images[0], ..., images[n-1])`` for Polys sharing a variable count."""
        if len(images) != self.nvars:
            raise ShapeMismatch(f"{len(images)} images for {self.nvars} variables")
        if not images:
            return self
        m = images[0].nvars
        ctx = self.ctx
        for q in images:
            if q.ctx != ctx:
                raise CtxMismatch("substitution across field contexts")
            if q.nvars != m:
                raise ShapeMismatch("images with different variable counts")
        result = Poly.zero(ctx, m)
        powers = {}
        for k, v in self.terms.items():
            t = Poly.const(ctx, m, v)
            for i in range(self.nvars):
                e = (k >> (SHIFT * i)) & MASK
                if e:
                    pw = powers.get((i, e))
                    if pw is None:
                        pw = powers[(i, e)] = images[i] ** e
                    t = t * pw
            result = result + t
        return result

    def linear_substitute(self, T):
        """``self(T x)`` for a square matrix ``T`` given as rows of raw values."""
        n = self.nvars
        ctx = self.ctx
        images = [Poly.linear(ctx, list(T[i])) if len(T[i]) == n else None for i in range(n)]
        if any(q is None for q in images):
            raise ShapeMismatch("substitution matrix has the wrong shape")
        return self.substitute(images)

    def homogeneous_component(self, d):
        return Poly._raw(self.ctx, self.nvars,
                         {k: v for k, v in self.terms.items() if key_degree(k) == d})

    def embed_vars(self, nvars, positions=None):
        """Same polynomial in a ring with ``nvars`` variables; ``positions[i]`` is the new index of x_i."""
        positions = list(range(self.nvars)) if positions is None else positions
        out = {}
        for k, v in self.terms.items():
            nk = 0
            for i in range(self.nvars):
                e = (k >> (SHIFT * i)) & MASK
                if e:
                    nk |= e << (SHIFT * positions[i])
            out[nk] = v
        return Poly._raw(self.ctx, nvars, out)

    def restrict_vars(self, k):
        """Same polynomial viewed in ``x_0 .. x_{k-1}``; it must not involve later variables."""
        if any(i >= k for i in self.variables()):
            raise ShapeMismatch(f"{self} involves variables beyond x{k}")
        return Poly._raw(self.ctx, k, dict(self.terms))

    def map_coefficients(self, ctx, fn):
        """Polynomial over ``ctx`` with every coefficient replaced by ``fn(c)``."""
        return Poly(ctx, self.nvars, {k: fn(v) for k, v in self.terms.items()})

    # ---- ordering and text
    def sorted_terms(self):
        """Terms in graded-lex order: higher degree first, then x1 before x2."""
        n = self.nvars
        return sorted(self.terms.items(),
                      key=lambda kv: (-key_degree(kv[0]), tuple(-e for e in unpack(kv[0], n))))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({self.ctx}, {self.nvars}, {format_poly(self)!r})"


def _is_raw(ctx, a):
    if ctx.kind == "Q":
        return isinstance(a, Fraction)
    return isinstance(a, int) and not isinstance(a, bool) and 0 <= a < ctx.cardinality


def format_monomial(key, n):
    parts = []
    for i, e in enumerate(unpack(key, n)):
        if e == 1:
            parts.append(f"x{i + 1}")
        elif e > 1:
            parts.append(f"x{i + 1}^{e}")
    return "*".join(parts)


def format_poly(p):
    if not p.terms:
        return "0"
    ctx = p.ctx
    out = []
    for k, v in p.sorted_terms():
        neg = False
        if ctx.kind == "Q" and v < 0:
            neg, v = True, -v
        elif ctx.kind == "GF" and ctx.p > 2 and v > ctx.p // 2:
            neg, v = True, ctx.p - v
        cs = ctx.fmt(v)
        if ctx.kind == "EXT" and ("+" in cs):
            cs = f"({cs})"
        mono = format_monomial(k, p.nvars)
        if not mono:
            body = cs
        elif v == ctx.one:
            body = mono
        else:
            body = f"{cs}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)


# ---- parser ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|(t)|(\*\*)|([-+*/^()]))")


def _position(text, pos, base_line=1, base_col=1):
    before = text[:pos]
    line = before.count("\n")
    if line:
        return base_line + line, pos - before.rfind("\n")
    return base_line, base_col + pos


class _PolyParser:
    def __init__(self, text, ctx, nvars, line=1, col=1):
        self.text, self.ctx, self.n = text, ctx, nvars
        self.line, self.col = line, col
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                self.fail("unexpected character", pos + len(text[pos:]) - len(text[pos:].lstrip()))
            start = m.start(m.lastindex)
            if m.group(4):
                self.fail("'**' is not valid; use '^' for powers", start)
            kind = ("int", "var", "t", None, "op")[m.lastindex - 1]
            self.toks.append((kind, m.group(m.lastindex), start))
            pos = m.end()
        self.i = 0

    def fail(self, msg, pos=None):
        if pos is None:
            pos = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)
        line, col = _position(self.text, pos, self.line, self.col)
        raise ParseError(msg, line, col)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            self.fail("empty polynomial")
        p = self.expr()
        if self.i != len(self.toks):
            self.fail("unexpected token")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            pos = self.peek()[2]
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    self.fail("can only divide by a nonzero constant", pos)
                p = p.scale(self.ctx.inv(q.constant_term()))
        return p

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            p = self.unary()
            return -p if op == "-" else p
        return self.power()

    def power(self):
        p = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                self.fail("exponent must be a nonnegative integer", pos)
            p = p ** int(val)
        return p

    def atom(self):
        kind, val, pos = self.take()
        ctx, n = self.ctx, self.n
        if kind == "int":
            return Poly.const(ctx, n, ctx.from_int(int(val)))
        if kind == "var":
            idx = int(val)
            if not 1 <= idx <= n:
                self.fail(f"variable x{idx} outside x1..x{n}", pos)
            return Poly.var(ctx, n, idx - 1)
        if kind == "t":
            if ctx.kind != "EXT":
                self.fail(f"'t' is only meaningful over an extension field, not {ctx}", pos)
            return Poly.const(ctx, n, ctx.generator)
        if val == "(":
            p = self.expr()
            if self.take()[1] != ")":
                self.fail("missing ')'")
            return p
        self.fail("expected a number, variable or '('", pos)


def parse_poly(text, ctx, nvars, line=1, col=1):
    """Parse ``3/2*x1^2 + x2*x3 - x4``-style text into a :class:`Poly`."""
    try:
        return _PolyParser(text, ctx, nvars, line, col).parse()
    except ZeroDivisionError as exc:
        raise ParseError(str(exc), line, col) from exc


# ---- char-2 square split ---------------------------------------------------

def square_split(p):
    """``(square_free, square_part)`` of a quadratic form in characteristic 2."""
    if p.ctx.characteristic != 2:
        raise WrongCharacteristic("square_split needs characteristic 2")
    if not p.is_homogeneous(2):
        raise NotQuadraticHomogeneous(f"{p} is not a quadratic form")
    squares = {2 << (SHIFT * i) for i in range(p.nvars)}
    sq = {k: v for k, v in p.terms.items() if k in squares}
    free = {k: v for k, v in p.terms.items() if k not in squares}
    return Poly._raw(p.ctx, p.nvars, free), Poly._raw(p.ctx, p.nvars, sq)


def drop_squares(p):
    """Remove every ``c*x_i^2`` term (any characteristic, any degree mix)."""
    squares = {2 << (SHIFT * i) for i in range(p.nvars)}
    return Poly._raw(p.ctx, p.nvars, {k: v for k, v in p.terms.items() if k not in squares})
