"""Witt-vector arithmetic, Teichmüller lifts, Z_n and Galois descent."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlab.base import (
    TwistedGalModule,
    WittCtx,
    ZnElt,
    conway_polynomial,
    galois_descent_check,
    is_prime,
    load_moduli,
    random_invertible_matrix,
    teich_digits,
    teichmuller,
    zn_canonical,
    zn_reduce,
)
from ltlab.errors import ContextMismatch, NotAUnit, NotSemilinear, ParseError, PrecisionExceeded
from ltlab.parse import parse_stab_text

CTXS = [(3, 1, 4), (3, 2, 4), (5, 2, 3), (3, 3, 3), (7, 2, 2)]


def elt(ctx, rng):
    return ctx.random(rng)


def test_moduli_table_are_conway():
    table = load_moduli()
    for (p, n), f in table.items():
        if n <= 3 and p <= 7:
            assert tuple(f) == tuple(conway_polynomial(p, n))


def test_galois_ring_relation():
    # t^2 = 1 + t in F_9 from the Conway polynomial x^2 + 2x + 2 = 0  →  t^2 = t + 1
    ctx = WittCtx(3, 2, 4)
    t = ctx([0, 1])
    sq = t * t
    assert sq.reduce() == ctx.field([1, 1])


@pytest.mark.parametrize("p,n,k", CTXS)
def test_ring_axioms_random(p, n, k):
    ctx = WittCtx(p, n, k)
    rng = random.Random(1)
    for _ in range(30):
        a, b, c = (elt(ctx, rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert a - a == ctx.zero()


@pytest.mark.parametrize("p,n,k", CTXS)
def test_inverse_and_units(p, n, k):
    ctx = WittCtx(p, n, k)
    rng = random.Random(2)
    for _ in range(30):
        a = elt(ctx, rng)
        if a.is_unit():
            assert a * a.inverse() == ctx.one()
        else:
            with pytest.raises(NotAUnit):
                a.inverse()


@pytest.mark.parametrize("p,n,k", CTXS)
def test_frobenius_is_ring_automorphism_of_order_n(p, n, k):
    ctx = WittCtx(p, n, k)
    rng = random.Random(3)
    for _ in range(20):
        a, b = elt(ctx, rng), elt(ctx, rng)
        assert (a * b).frobenius() == a.frobenius() * b.frobenius()
        assert (a + b).frobenius() == a.frobenius() + b.frobenius()
        assert a.frobenius(n) == a
        # Frobenius lifts x -> x^p on the residue field
        assert a.frobenius().reduce() == a.reduce() ** p


@pytest.mark.parametrize("p,n,k", CTXS)
def test_teichmuller(p, n, k):
    ctx = WittCtx(p, n, k)
    F = ctx.field
    for x in list(F.elements())[:40]:
        T = teichmuller(ctx, x)
        assert T.reduce() == x
        assert T ** (p**n) == T
        assert T.frobenius() == T**p


@pytest.mark.parametrize("p,n,k", CTXS)
def test_teich_digits_reconstruct(p, n, k):
    ctx = WittCtx(p, n, k)
    rng = random.Random(4)
    for _ in range(20):
        a = elt(ctx, rng)
        digits = teich_digits(ctx, a)
        total = ctx.zero()
        for i, d in enumerate(digits):
            total = total + teichmuller(ctx, d) * ctx(p**i)
        assert total == a


def test_context_mismatch():
    a = WittCtx(3, 2, 4)(1)
    b = WittCtx(3, 2, 3)(1)
    with pytest.raises(ContextMismatch):
        a + b


def test_parse_errors():
    with pytest.raises(ParseError) as e:
        parse_stab_text("1;; 1")
    assert e.value.position == 2
    with pytest.raises(ParseError):
        parse_stab_text("1 + + t")


def test_is_prime():
    assert [q for q in range(30) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


# ---------------------------------------------------------------------------
# Z_n


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_zn_canonical(p, n):
    zc = zn_canonical(p, n, 4)
    a, lam, r = zc["alpha"], zc["lambda"], zc["r"]
    assert a * a == a
    assert a.additive_order() == p**n - 1
    assert lam == a * r
    assert lam.additive_order() == p - 1


@given(st.integers(0, 10**9), st.integers(0, 10**6), st.integers(1, 4))
def test_zn_reduce_coherent(zp, res, k):
    a = ZnElt(3, 2, 5, zp, res)
    hi = zn_reduce(a, k + 1)
    lo = zn_reduce(a, k)
    assert hi % (3**k * 8) == lo
    assert lo % 3**k == zp % 3**k and lo % 8 == res % 8


def test_zn_precision():
    with pytest.raises(PrecisionExceeded):
        zn_reduce(ZnElt(3, 2, 3, 1, 1), 4)
    with pytest.raises(PrecisionExceeded):
        ZnElt(3, 2, 3, 1, 1) + ZnElt(3, 2, 4, 1, 1)


def test_zn_integer_image():
    a = ZnElt.from_int(5, 2, 4, 123456)
    assert zn_reduce(a, 4) == 123456 % (625 * 24)


# ---------------------------------------------------------------------------
# twisted Galois modules


@pytest.mark.parametrize("p,n,k,r", [(3, 2, 3, 2), (5, 2, 2, 3), (3, 3, 2, 1)])
def test_descent_standard_and_twisted(p, n, k, r):
    ctx = WittCtx(p, n, k)
    rng = random.Random(5)
    std = TwistedGalModule.standard(ctx, r)
    rep = galois_descent_check(std)
    assert rep.iso_verified and rep.invariants_rank == r
    for _ in range(3):
        M = std.basis_change(random_invertible_matrix(ctx, r, rng))
        assert galois_descent_check(M).iso_verified


def test_not_semilinear():
    ctx = WittCtx(3, 2, 2)
    bad = TwistedGalModule(ctx, ((ctx(2),),))
    with pytest.raises(NotSemilinear):
        galois_descent_check(bad)
