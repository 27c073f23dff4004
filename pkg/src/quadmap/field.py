"""Exact scalar arithmetic over Q, GF(p) and GF(p^k).

Polynomials and matrices store *raw* values and delegate arithmetic to the
owning :class:`FieldCtx`:

* Q       -- :class:`fractions.Fraction`
* GF(p)   -- ``int`` in ``[0, p)``
* GF(p^k) -- ``int`` code ``sum(c_i * p**i)`` of the residue vector
  ``(c_0, ..., c_{k-1})`` modulo the context's irreducible modulus.

:class:`FieldElem` wraps a raw value together with its context for callers
that want operator syntax and ctx checking on scalars.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from .errors import (CtxMismatch, NoIrreducible, NonPrimeModulus, ParseError,
                     UnsupportedExtension)

INF = float("inf")


def _is_prime(p):
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    i = 3
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


# -- dense polynomials over GF(p), coefficient lists low -> high -------------

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = list(a)
    inv_lead = pow(m[-1], p - 2, p)
    dm = len(m) - 1
    while len(_trim(a)) - 1 >= dm:
        shift = len(a) - 1 - dm
        f = a[-1] * inv_lead % p
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - f * c) % p
    return a


def _monic_polys(p, d):
    for code in range(p ** d):
        coeffs = []
        for _ in range(d):
            coeffs.append(code % p)
            code //= p
        yield coeffs + [1]


def _is_irreducible(m, p):
    k = len(m) - 1
    for d in range(1, k // 2 + 1):
        for f in _monic_polys(p, d):
            if not _pmod(m, f, p):
                return False
    return True


@lru_cache(maxsize=None)
def smallest_irreducible(p, k):
    """Monic irreducible of degree ``k`` over GF(p) with the smallest code."""
    for m in _monic_polys(p, k):
        if _is_irreducible(m, p):
            return tuple(m)
    raise NoIrreducible(f"no irreducible polynomial of degree {k} over GF({p})")


# -- contexts -----------------------------------------------------------------

@dataclass(frozen=True)
class FieldCtx:
    """Immutable description of a field; compare contexts with ``==``."""

    kind: str                     # "Q", "GF" (prime) or "EXT"
    p: int = 0
    k: int = 1
    modulus: tuple = ()
    _tables: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # ---- descriptive properties
    @property
    def characteristic(self):
        return 0 if self.kind == "Q" else self.p

    @property
    def cardinality(self):
        return INF if self.kind == "Q" else self.p ** self.k

    @property
    def is_finite(self):
        return self.kind != "Q"

    def __str__(self):
        if self.kind == "Q":
            return "Q"
        if self.kind == "GF":
            return f"GF({self.p})"
        return f"GF({self.p},{self.k})"

    def __repr__(self):
        return f"FieldCtx({self})"

    # ---- constants and conversion
    @property
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def from_int(self, n):
        if self.kind == "Q":
            return Fraction(n)
        n %= self.p
        return n

    def from_fraction(self, num, den=1):
        if self.kind == "Q":
            return Fraction(num, den)
        d = self.from_int(den)
        if d == 0:
            raise ZeroDivisionError(f"{den} is not invertible in {self}")
        return self.div(self.from_int(num), d)

    def convert(self, value):
        """Coerce ints, Fractions and FieldElems of this ctx into raw form."""
        if isinstance(value, FieldElem):
            if value.ctx != self:
                raise CtxMismatch(f"element of {value.ctx} used in {self}")
            return value.value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return self.from_int(value)
        if isinstance(value, Fraction):
            return self.from_fraction(value.numerator, value.denominator)
        raise TypeError(f"cannot convert {value!r} into {self}")

    def elem(self, value):
        return FieldElem(self, self.convert(value))

    # ---- arithmetic on raw values
    def add(self, a, b):
        if self.kind == "Q":
            return a + b
        if self.kind == "GF":
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self._tbl()["add"](a, b)

    def neg(self, a):
        if self.kind == "Q":
            return -a
        if self.kind == "GF":
            return -a % self.p
        if self.p == 2:
            return a
        return self._tbl()["neg"][a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.kind == "Q":
            return a * b
        if self.kind == "GF":
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        t = self._tbl()
        return t["exp"][(t["log"][a] + t["log"][b]) % (self.cardinality - 1)]

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError(f"zero has no inverse in {self}")
        if self.kind == "Q":
            return 1 / a
        if self.kind == "GF":
            return pow(a, self.p - 2, self.p)
        t = self._tbl()
        return t["exp"][(-t["log"][a]) % (self.cardinality - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        r = self.one
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def is_zero(self, a):
        return a == 0

    # ---- enumeration, squares
    def elements(self):
        """Deterministic element order: all of K for finite K, else 0, 1, -1, 2, -2, ..."""
        if self.kind == "Q":
            yield Fraction(0)
            n = 1
            while True:
                yield Fraction(n)
                yield Fraction(-n)
                n += 1
        else:
            yield from range(self.cardinality)

    def sqrt(self, a):
        """A square root of ``a`` in K, or ``None``."""
        if self.kind == "Q":
            if a < 0:
                return None
            n, d = isqrt(a.numerator), isqrt(a.denominator)
            if n * n == a.numerator and d * d == a.denominator:
                return Fraction(n, d)
            return None
        for x in self.elements():
            if self.mul(x, x) == a:
                return x
        return None

    # ---- text
    def fmt(self, a):
        if self.kind == "Q":
            return str(a)
        if self.kind == "GF":
            return str(a)
        return _fmt_ext(self._digits(a))

    def parse(self, text):
        text = text.strip()
        if self.kind == "EXT" and "t" in text:
            return self._parse_ext(text)
        m = re.fullmatch(r"([+-]?\d+)(?:\s*/\s*(\d+))?", text)
        if not m:
            raise ParseError(f"bad field element {text!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ParseError("zero denominator")
        try:
            return self.from_fraction(num, den)
        except ZeroDivisionError as exc:
            raise ParseError(str(exc)) from exc

    # ---- extension-field helpers
    @property
    def generator(self):
        """The class of ``t`` (only for extension fields)."""
        if self.kind != "EXT":
            raise UnsupportedExtension(f"{self} has no generator t")
        return self.p

    def _digits(self, a):
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def _undigits(self, ds):
        code = 0
        for c in reversed(ds):
            code = code * self.p + c
        return code

    def _mul_slow(self, a, b):
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        r = _pmod(prod, list(self.modulus), self.p)
        return self._undigits(r + [0] * (self.k - len(r)))

    def _tbl(self):
        t = self._tables
        if not t:
            q = self.cardinality
            p = self.p
            for g in range(2, q):
                exp = [1]
                x = g
                while x != 1:
                    exp.append(x)
                    x = self._mul_slow(x, g)
                if len(exp) == q - 1:
                    break
            log = {v: i for i, v in enumerate(exp)}
            neg = [self._undigits([(-c) % p for c in self._digits(a)]) for a in range(q)]

            def add(a, b, _p=p, _k=self.k):
                code, mult = 0, 1
                for _ in range(_k):
                    code += ((a % _p + b % _p) % _p) * mult
                    a //= _p
                    b //= _p
                    mult *= _p
                return code

            t.update(exp=exp, log=log, neg=neg, add=add)
        return t

    def _parse_ext(self, text):
        s = text.replace(" ", "")
        if not s:
            raise ParseError("empty element")
        if s[0] not in "+-":
            s = "+" + s
        total = 0
        for sign, body in re.findall(r"([+-])([^+-]+)", s):
            m = re.fullmatch(r"(?:(\d+)\*?)?t(?:\^(\d+))?|(\d+)", body)
            if not m:
                raise ParseError(f"bad extension element {text!r}")
            if m.group(3) is not None:
                term = self.from_int(int(m.group(3)))
            else:
                coef = int(m.group(1)) if m.group(1) else 1
                e = int(m.group(2)) if m.group(2) else 1
                term = self.mul(self.from_int(coef), self.pow(self.generator, e))
            total = self.add(total, term if sign == "+" else self.neg(term))
        return total


def _fmt_ext(ds):
    parts = []
    for i in range(len(ds) - 1, -1, -1):
        c = ds[i]
        if not c:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            mono = "t" if i == 1 else f"t^{i}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(parts) if parts else "0"


_CTX_CACHE = {}


def make_field(spec):
    """Build a field context from ``"Q"``, ``"GF(p)"``, ``"GF(p,k)"``, ``p`` or ``(p, k)``."""
    if isinstance(spec, FieldCtx):
        return spec
    if isinstance(spec, str):
        s = spec.replace(" ", "").upper()
        if s in ("Q", "QQ"):
            key = ("Q",)
        else:
            m = re.fullmatch(r"GF\((\d+)(?:,(\d+))?\)", s) or re.fullmatch(r"GF(\d+)", s)
            if not m:
                raise ParseError(f"unknown field descriptor {spec!r}")
            p = int(m.group(1))
            k = int(m.group(2)) if m.lastindex and m.lastindex >= 2 and m.group(2) else 1
            key = (p, k)
    elif isinstance(spec, int):
        key = (spec, 1)
    else:
        p, k = spec
        key = (int(p), int(k))
    if key in _CTX_CACHE:
        return _CTX_CACHE[key]
    if key == ("Q",):
        ctx = FieldCtx("Q")
    else:
        p, k = key
        if not _is_prime(p):
            raise NonPrimeModulus(f"{p} is not prime")
        if k < 1:
            raise ValueError("extension degree must be positive")
        if k == 1:
            ctx = FieldCtx("GF", p, 1)
        else:
            ctx = FieldCtx("EXT", p, k, smallest_irreducible(p, k))
    _CTX_CACHE[key] = ctx
    return ctx


@dataclass(frozen=True)
class Extension:
    """``field`` contains ``base``; ``root`` is the image of the base generator."""

    base: FieldCtx
    field: FieldCtx
    root: int

    @property
    def cardinality(self):
        return self.field.cardinality

    def embed(self, a):
        b, L = self.base, self.field
        if b.kind == "GF":
            return L.from_int(a)
        acc = L.zero
        for c in reversed(b._digits(a)):
            acc = L.add(L.mul(acc, self.root), L.from_int(c))
        return acc

    def project(self, a):
        """Inverse of :meth:`embed`; ``ValueError`` if ``a`` is not in the base field."""
        table = self.field._tables.setdefault(("project", self.base, self.root), {})
        if not table:
            for x in self.base.elements():
                table[self.embed(x)] = x
        try:
            return table[a]
        except KeyError:
            raise ValueError(f"{self.field.fmt(a)} does not lie in {self.base}") from None


def extend(ctx, k):
    """Degree-``k`` extension of a finite field, with its embedding."""
    if not ctx.is_finite:
        raise UnsupportedExtension("Q is infinite; no extension is ever needed")
    if k < 2:
        raise ValueError("extension degree must be at least 2")
    L = make_field((ctx.p, ctx.k * k))
    if ctx.kind == "GF":
        return Extension(ctx, L, 1)
    m = ctx.modulus
    for z in L.elements():
        acc = L.zero
        for c in reversed(m):
            acc = L.add(L.mul(acc, z), L.from_int(c))
        if acc == 0:
            return Extension(ctx, L, z)
    raise NoIrreducible(f"modulus of {ctx} has no root in {L}")


@dataclass(frozen=True)
class FieldElem:
    ctx: FieldCtx
    value: object

    def _other(self, other):
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise CtxMismatch(f"cannot combine {self.ctx} and {other.ctx}")
            return other.value
        return self.ctx.convert(other)

    def __add__(self, other):
        return FieldElem(self.ctx, self.ctx.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self._other(other), self.value))

    def __mul__(self, other):
        return FieldElem(self.ctx, self.ctx.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElem(self.ctx, self.ctx.div(self.value, self._other(other)))

    def __rtruediv__(self, other):
        return FieldElem(self.ctx, self.ctx.div(self._other(other), self.value))

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.value))

    def __pow__(self, e):
        return FieldElem(self.ctx, self.ctx.pow(self.value, e))

    def inverse(self):
        return FieldElem(self.ctx, self.ctx.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.ctx == other.ctx and self.value == other.value
        try:
            return self.value == self.ctx.convert(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __bool__(self):
        return not self.ctx.is_zero(self.value)

    def __str__(self):
        return self.ctx.fmt(self.value)

    def __repr__(self):
        return f"FieldElem({self.ctx}, {self})"
