"""Coefficient rings and truncated power series."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlab.base import WittCtx
from ltlab.errors import ConstantTermNonzero, ContextMismatch, IntegralityFailure, LinearNotUnit
from ltlab.rings import DefRing, GaloisRing, IntModRing, RationalPolyRing, RationalRing, ring_from_key
from ltlab.series import (
    BSeries,
    USeries,
    bsubstitute,
    compose,
    compose_outer,
    revert,
    substitute_separate,
)


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# rings


def test_defring_shape_and_moduli():
    E = DefRing(3, 2, 3)
    assert E.dim == 6
    assert list(E.moduli) == [27, 27, 9, 9, 3, 3]


@pytest.mark.parametrize("args", [(3, 2, 3), (5, 2, 3), (3, 1, 4), (3, 3, 2)])
def test_defring_axioms_and_inverse(args):
    E = DefRing(*args)
    g = rng(1)
    for _ in range(20):
        a, b, c = E.random(g), E.random(g), E.random(g)
        assert E.eq(E.mul(E.mul(a, b), c), E.mul(a, E.mul(b, c)))
        assert E.eq(E.mul(a, E.add(b, c)), E.add(E.mul(a, b), E.mul(a, c)))
        if E.is_unit(a):
            assert E.eq(E.mul(a, E.inv(a)), E.one())


def test_defring_truncation():
    E = DefRing(3, 2, 3)
    u = E.u(1)
    assert E.is_zero(E.pow(u, 3))
    # 3*u^2 lies in m^3
    assert E.is_zero(E.mul(E.from_int(3), E.pow(u, 2)))
    assert not E.is_zero(E.mul(E.from_int(3), u))
    assert E.is_zero(E.from_int(27))


def test_defring_substitute_is_ring_map():
    E = DefRing(3, 2, 3)
    g = rng(2)
    img = E.add(E.mul(E.from_int(4), E.u(1)), E.pow(E.u(1), 2))
    for _ in range(10):
        a, b = E.random(g), E.random(g)
        lhs = E.substitute(E.mul(a, b), [img])
        rhs = E.mul(E.substitute(a, [img]), E.substitute(b, [img]))
        assert E.eq(lhs, rhs)


def test_galois_ring_against_witt_ctx():
    ctx = WittCtx(3, 2, 4)
    R = GaloisRing(ctx)
    t = R.elt([0, 1])
    assert R.to_ctx(R.mul(t, t)) == ctx([0, 1]) * ctx([0, 1])


def test_frobenius_matrix_matches_ctx():
    ctx = WittCtx(5, 2, 3)
    R = GaloisRing(ctx)
    F = R.frobenius_matrix()
    a = ctx([7, 11])
    img = np.array([7, 11]) @ F % 125
    assert ctx([int(v) for v in img]) == a.frobenius()


def test_rational_poly_to_defring():
    Q = RationalPolyRing(1, 3)
    E = DefRing(3, 2, 3)
    a = Q.zeros()
    a[0] = Fraction(1, 2)
    a[1] = Fraction(3, 1)
    out = Q.to_defring(a, E)
    assert E.eq(E.mul(out, E.from_int(2)), E.add(E.from_int(1), E.mul(E.from_int(6), E.u(1))))
    a[0] = Fraction(1, 3)
    with pytest.raises(IntegralityFailure):
        Q.to_defring(a, E)


def test_ring_keys_roundtrip():
    for R in [IntModRing(9), RationalRing(), DefRing(3, 2, 3), GaloisRing(WittCtx(3, 2, 2))]:
        assert ring_from_key(R.key) == R


# ---------------------------------------------------------------------------
# series oracles


def test_compose_oracle():
    R = IntModRing(9)
    f = USeries.from_dict(R, 3, {1: 1, 2: 1})
    assert compose(f, f) == USeries.from_dict(R, 3, {1: 1, 2: 2, 3: 2})


def test_revert_oracle():
    R = IntModRing(9)
    f = USeries.from_dict(R, 3, {1: 1, 2: 1})
    assert revert(f) == USeries.from_dict(R, 3, {1: 1, 2: 8, 3: 2})


def test_bsubstitute_oracle():
    R = IntModRing(9)
    F = BSeries.from_dict(R, 2, {(1, 0): 1, (0, 1): 1, (1, 1): 1})
    x = USeries.x(R, 2)
    assert bsubstitute(F, x, x) == USeries.from_dict(R, 2, {1: 2, 2: 1})


def test_compose_errors():
    R = IntModRing(9)
    f = USeries.from_dict(R, 3, {0: 1, 1: 1})
    with pytest.raises(ConstantTermNonzero):
        compose(f, f)
    with pytest.raises(LinearNotUnit):
        revert(USeries.from_dict(R, 3, {1: 3, 2: 1}))
    with pytest.raises(ContextMismatch):
        USeries.x(R, 3) + USeries.x(IntModRing(27), 3)


coeff_lists = st.lists(st.integers(0, 26), min_size=5, max_size=5)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_compose_associative_and_revert(a, b, c):
    R = IntModRing(27)
    N = 5

    def ser(cs, unit=True):
        d = {i + 1: v for i, v in enumerate(cs[:N])}
        if unit and d[1] % 3 == 0:
            d[1] += 1
        return USeries.from_dict(R, N, d)

    f, g, h = ser(a), ser(b), ser(c)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    x = USeries.x(R, N)
    assert compose(revert(f), f) == x
    assert compose(f, revert(f)) == x


@settings(max_examples=30, deadline=None)
@given(coeff_lists, coeff_lists)
def test_series_ring_laws(a, b):
    R = IntModRing(27)
    f = USeries.from_dict(R, 4, dict(enumerate(a)))
    g = USeries.from_dict(R, 4, dict(enumerate(b)))
    assert f * g == g * f
    assert (f + g) * f == f * f + g * f
    if a[0] % 3:
        assert f * f.inverse() == USeries.from_dict(R, 4, {0: 1})


def test_substitute_separate_and_compose_outer():
    E = DefRing(3, 2, 3)
    N = 6
    F = BSeries.from_dict(E, N, {(1, 0): E.one(), (0, 1): E.one(), (1, 1): E.u(1)})
    a = USeries.from_dict(E, N, {1: E.one(), 2: E.u(1)})
    b = USeries.from_dict(E, N, {1: E.from_int(2), 3: E.one()})
    S = substitute_separate(F, a, b)
    # diagonal specialization agrees with bsubstitute
    from ltlab.series import diagonal

    assert diagonal(S) == bsubstitute(F, a, b)
    u = USeries.from_dict(E, N, {1: E.one(), 2: E.one()})
    C = compose_outer(u, F)
    assert diagonal(C) == compose(u, bsubstitute(F, USeries.x(E, N), USeries.x(E, N)))
