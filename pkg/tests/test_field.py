import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quadmap.errors import CtxMismatch, NonPrimeModulus, ParseError, UnsupportedExtension
from quadmap.field import FieldElem, extend, make_field, smallest_irreducible

FIELDS = ["Q", "GF(2)", "GF(3)", "GF(5)", "GF(2,2)", "GF(2,3)", "GF(3,2)"]


def test_rationals():
    Q = make_field("Q")
    assert Q.characteristic == 0
    assert not Q.is_finite
    assert Q.cardinality == float("inf") or Q.cardinality > 10**100


def test_gf2():
    F = make_field("GF(2)")
    assert (F.characteristic, F.cardinality) == (2, 2)


def test_gf4_modulus():
    F = make_field("GF(2,2)")
    assert F.cardinality == 4
    assert tuple(F.modulus) == (1, 1, 1)  # t^2 + t + 1


def _irreducible_brute(m, p):
    """No root and no monic factor of degree <= deg/2, by trial multiplication."""
    k = len(m) - 1
    for d in range(1, k // 2 + 1):
        for a in itertools.product(range(p), repeat=d):
            for b in itertools.product(range(p), repeat=k - d):
                f = list(a) + [1]
                g = list(b) + [1]
                prod = [0] * (k + 1)
                for i, x in enumerate(f):
                    for j, y in enumerate(g):
                        prod[i + j] = (prod[i + j] + x * y) % p
                if prod == list(m):
                    return False
    return True


@pytest.mark.parametrize("p,k", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)])
def test_moduli_are_irreducible(p, k):
    m = smallest_irreducible(p, k)
    assert len(m) == k + 1 and m[-1] == 1
    assert _irreducible_brute(m, p)


def test_descriptor_errors():
    with pytest.raises(NonPrimeModulus):
        make_field("GF(4)")
    with pytest.raises(ParseError):
        make_field("R")


def test_contexts_are_cached():
    assert make_field("GF(5)") is make_field("gf(5)")
    assert make_field((2, 2)) == make_field("GF(2,2)")


@pytest.mark.parametrize("spec", FIELDS)
def test_axioms_random(spec):
    F = make_field(spec)
    rng = random.Random(11)
    pool = list(F.elements()) if F.is_finite else [Fraction(rng.randint(-9, 9), rng.randint(1, 5))
                                                   for _ in range(30)]
    for _ in range(300):
        a, b, c = (rng.choice(pool) for _ in range(3))
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.add(a, F.neg(a)) == F.zero
        if a != F.zero:
            assert F.mul(a, F.inv(a)) == F.one


@pytest.mark.parametrize("spec", ["GF(2)", "GF(3)", "GF(2,2)", "GF(3,2)", "GF(2,3)"])
def test_frobenius(spec):
    F = make_field(spec)
    for a in F.elements():
        for b in F.elements():
            assert F.pow(F.add(a, b), F.p) == F.add(F.pow(a, F.p), F.pow(b, F.p))


@pytest.mark.parametrize("spec", ["GF(2,2)", "GF(3,2)"])
def test_multiplicative_group_is_complete(spec):
    F = make_field(spec)
    nz = [a for a in F.elements() if a != F.zero]
    assert len(nz) == F.cardinality - 1
    for a in nz:
        assert sorted(F.mul(a, b) for b in nz) == sorted(nz)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_rational_canonical_form(num, den):
    Q = make_field("Q")
    a = Q.from_fraction(num, den)
    b = Q.from_fraction(num * 7, den * 7)
    assert a == b and a.denominator > 0


@settings(max_examples=60)
@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_prime_field_residues(x, y):
    F = make_field("GF(7)")
    assert F.from_int(x) == x % 7
    assert F.mul(F.from_int(x), F.from_int(y)) == (x * y) % 7


def test_element_wrapper_mixing_is_an_error():
    a = make_field("GF(5)").elem(2)
    b = make_field("GF(7)").elem(2)
    with pytest.raises(CtxMismatch):
        a + b
    assert (a * a).value == 4
    assert isinstance(a.inverse(), FieldElem) and (a * a.inverse()).value == 1


@pytest.mark.parametrize("spec", ["Q", "GF(5)", "GF(2,3)", "GF(3,2)"])
def test_text_roundtrip(spec):
    F = make_field(spec)
    pool = list(F.elements()) if F.is_finite else [Fraction(-3, 2), Fraction(5), Fraction(0)]
    for a in pool:
        assert F.parse(F.fmt(a)) == a


def test_extension_text():
    F = make_field("GF(2,2)")
    t = F.generator
    assert F.parse("t^2") == F.add(t, F.one)  # reduced by t^2 + t + 1


def test_extend():
    ext = extend(make_field("GF(2)"), 2)
    assert ext.cardinality == 4
    assert ext.embed(1) == ext.field.one
    for a in (0, 1):
        assert ext.project(ext.embed(a)) == a
    assert extend(make_field("GF(3)"), 2).cardinality == 9
    with pytest.raises(UnsupportedExtension):
        extend(make_field("Q"), 2)


def test_extend_extension_is_a_homomorphism():
    base = make_field("GF(2,2)")
    ext = extend(base, 2)
    L = ext.field
    assert L.cardinality == 16
    for a in base.elements():
        for b in base.elements():
            assert ext.embed(base.mul(a, b)) == L.mul(ext.embed(a), ext.embed(b))
            assert ext.embed(base.add(a, b)) == L.add(ext.embed(a), ext.embed(b))
