"""The deformation ring, its unit-group maps and the Lubin-Tate action."""

import random

import numpy as np
import pytest

import ltlab.lubin_tate as lt
from ltlab.base import WittCtx, ZnElt, teichmuller, zn_canonical
from ltlab.errors import (
    ConfigError,
    NotAUnit,
    NotPrincipalUnit,
    PrecisionExceeded,
    PrimeTwoUnsupported,
    ResidueNotExpressible,
)
from ltlab.fgl import formal_sum, universal_deformation_fgl
from ltlab.lubin_tate import (
    DefRingElt,
    act_on,
    crossed_check,
    exp_p,
    extract_t,
    log_unit,
    lt_action,
    zn_pow,
)
from ltlab.rings import DefRing
from ltlab.series import USeries
from ltlab.stabilizer import StabElt, stab_mul, stab_random, teich_stab


def rand_elt(E, g, in_m=False, unit=False):
    c = E.random(g)
    x = DefRingElt(E, c)
    if in_m:
        x = x - DefRingElt.const(E, x.constant_term()) + DefRingElt.from_int(E, E.p) * DefRingElt.const(
            E, x.constant_term()
        )
    if unit and not x.is_unit():
        x = x + 1
    return x


# ---------------------------------------------------------------------------
# exp / log / zn_pow


def test_exp_log_oracles():
    E3 = DefRing(3, 1, 3)
    assert exp_p(DefRingElt.from_int(E3, 0)) == 1
    assert exp_p(DefRingElt.from_int(E3, 1)) == 13
    assert log_unit(DefRingElt.from_int(E3, -2), "ell") == DefRingElt.from_int(DefRing(3, 1, 2), -1)
    assert log_unit(DefRingElt.from_int(E3, 1), "ell").is_zero()
    assert log_unit(DefRingElt.from_int(E3, 1), "principal").is_zero()


@pytest.mark.parametrize("p,n,j", [(3, 2, 3), (5, 2, 3), (3, 1, 4), (3, 2, 4)])
def test_exp_log_roundtrip(p, n, j):
    E = DefRing(p, n, j)
    g = np.random.default_rng(11)
    for _ in range(15):
        x = rand_elt(E, g)
        y = exp_p(x)
        assert y.residue() == E.wctx.field.one()
        assert log_unit(y, "ell") == x.reduce_order(j - 1)
        # exp_p ∘ log on principal units y ≡ 1 mod p
        z = DefRingElt.from_int(E, 1) + DefRingElt.from_int(E, p) * rand_elt(E, g)
        assert exp_p(log_unit(z, "ell")) == z.reduce_order(j - 1)


@pytest.mark.parametrize("p,n,j,general", [(3, 2, 3, False), (5, 2, 3, True), (3, 2, 4, False), (7, 2, 4, True)])
def test_principal_log_homomorphism(p, n, j, general):
    """log(ab) = log a + log b on y ≡ 1 mod m when p > j, and on y ≡ 1 mod p always."""
    E = DefRing(p, n, j)
    g = np.random.default_rng(12)
    P = DefRingElt.from_int(E, p)
    for _ in range(10):
        a = DefRingElt.from_int(E, 1) + (rand_elt(E, g, in_m=True) if general else P * rand_elt(E, g))
        b = DefRingElt.from_int(E, 1) + (rand_elt(E, g, in_m=True) if general else P * rand_elt(E, g))
        assert log_unit(a * b, "principal") == log_unit(a, "principal") + log_unit(b, "principal")
        if not general:
            # principal log = p·(ell log) to the precision of the latter
            lhs = log_unit(a, "principal").reduce_order(j - 1)
            assert lhs == DefRingElt.from_int(lhs.ring, p) * log_unit(a, "ell")


def test_principal_log_not_integral():
    E = DefRing(3, 2, 4)
    with pytest.raises(NotPrincipalUnit):
        log_unit(DefRingElt.from_int(E, 1) + DefRingElt.u(E), "principal")


def test_log_errors():
    E = DefRing(3, 2, 3)
    with pytest.raises(NotPrincipalUnit):
        log_unit(DefRingElt.from_int(E, 1) + DefRingElt.u(E), "ell")
    with pytest.raises(NotPrincipalUnit):
        log_unit(DefRingElt.from_int(E, 2), "principal")
    with pytest.raises(PrimeTwoUnsupported):
        exp_p(DefRingElt.from_int(DefRing(2, 1, 3), 1))


@pytest.mark.parametrize("p,n,j", [(3, 2, 3), (5, 2, 3), (3, 1, 4), (3, 3, 2)])
def test_zn_pow_laws(p, n, j):
    E = DefRing(p, n, j)
    K = 5
    g = np.random.default_rng(13)
    r = random.Random(13)
    zc = zn_canonical(p, n, K)
    for _ in range(10):
        x = rand_elt(E, g, unit=True)
        a = ZnElt(p, n, K, r.randrange(p**K), r.randrange(p**n))
        b = ZnElt(p, n, K, r.randrange(p**K), r.randrange(p**n))
        assert zn_pow(x, a) * zn_pow(x, b) == zn_pow(x, a + b)
        assert zn_pow(x, ZnElt.from_int(p, n, K, 0)) == 1
        assert zn_pow(x, ZnElt.from_int(p, n, K, 7)) == x**7
        # the p^k(p^n−1) power is exactly 1 modulo m^{k+1} (k = j−1)
        assert x ** (p ** (j - 1) * (p**n - 1)) == 1
        # α gives the Teichmüller lift of the residue
        assert zn_pow(x, zc["alpha"]) == DefRingElt.const(E, teichmuller(E.wctx, x.residue()))
    with pytest.raises(NotAUnit):
        zn_pow(DefRingElt.u(E) if n > 1 else DefRingElt.from_int(E, p), zc["alpha"])


# ---------------------------------------------------------------------------
# extract_t / act_on


@pytest.mark.parametrize("p,n,N", [(3, 2, 10), (5, 2, 26), (3, 1, 10)])
def test_extract_t_roundtrip(p, n, N):
    G = universal_deformation_fgl(p, n, 3, N)
    E = G.ring
    g = np.random.default_rng(14)
    x = USeries.x(E, N)
    assert [str(t) for t in extract_t(x, G)][:2] == ["1", "0"]
    for _ in range(5):
        ts = [rand_elt(E, g, unit=True)] + [rand_elt(E, g) for _ in range(3)]
        terms = [USeries.monomial(E, N, p**i, t.c) for i, t in enumerate(ts) if p**i <= N]
        psi = formal_sum(G, terms)
        got = extract_t(psi, G)
        assert got == ts[: len(got)]


def test_extract_t_rejects_non_p_typical():
    G = universal_deformation_fgl(3, 2, 3, 10)
    E = G.ring
    psi = USeries.from_dict(E, 10, {1: E.one(), 2: E.one()})
    with pytest.raises(ResidueNotExpressible):
        extract_t(psi, G)


def test_act_on_ring_map():
    ctx = WittCtx(3, 2, 5)
    res = lt_action(stab_random(ctx, random.Random(15)))
    E = res.t0.ring
    g = np.random.default_rng(15)
    w = DefRingElt.const(E, ctx(7))
    assert act_on(res, w) == w
    for _ in range(10):
        a, b = rand_elt(E, g), rand_elt(E, g)
        assert act_on(res, a * b) == act_on(res, a) * act_on(res, b)


# ---------------------------------------------------------------------------
# lt_action oracles


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 1), (5, 1)])
def test_lt_identity(p, n):
    ctx = WittCtx(p, n, 5)
    res = lt_action(StabElt.one(ctx))
    E = res.t0.ring
    assert res.t0 == 1
    assert all(t.is_zero() for t in res.t[1:])
    assert res.f == USeries.x(E, res.f.N)
    for i in range(1, n):
        assert res.phi[f"u{i}"] == DefRingElt.u(E, i)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2)])
def test_lt_teichmuller(p, n):
    ctx = WittCtx(p, n, 5)
    w = ctx.field.multiplicative_generator()
    res = lt_action(teich_stab(ctx, w))
    E = res.t0.ring
    T = DefRingElt.const(E, teichmuller(E.wctx, w))
    assert res.t0 == T
    assert res.phi["u1"] == T ** (p - 1) * DefRingElt.u(E)
    assert res.psi == USeries.monomial(E, res.psi.N, 1, T.c)
    assert act_on(res, DefRingElt.u(E)) == T ** (p - 1) * DefRingElt.u(E)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 1), (5, 1)])
def test_lt_central(p, n):
    ctx = WittCtx(p, n, 5)
    for a in (1 + p, 2, p - 1):
        res = lt_action(StabElt.scalar(ctx, a))
        assert res.t0 == a
        for k, v in res.phi.items():
            assert v == DefRingElt.u(v.ring, int(k[1:]))


def test_lt_random_post_checks_and_json():
    ctx = WittCtx(3, 2, 5)
    g = stab_random(ctx, random.Random(16))
    res = lt_action(g)
    assert res.residual["verified"]
    assert res.residual == {"m_order": 3, "x_degree": 10, "verified": True}
    assert lt.t0_residue_matches(res)
    doc = res.to_json()
    assert set(doc) >= {"g", "phi", "t0", "t_list", "residual"}
    assert doc["t0"] == doc["t_list"][0]


def test_lift_independence_small():
    ctx = WittCtx(3, 2, 5)
    rng = random.Random(17)
    for _ in range(3):
        g = stab_random(ctx, rng)
        a = lt_action(g, lift_seed=1)
        b = lt_action(g, lift_seed=2)
        assert a.phi == b.phi and a.psi == b.psi


def test_working_order_is_sufficient(monkeypatch):
    """Raising the solver's working order by one does not change the results."""
    ctx = WittCtx(3, 2, 6)
    orig = lt.working_order
    rng = random.Random(18)
    gs = [stab_random(ctx, rng) for _ in range(3)]
    base = [lt._lt_compute(g, 3, 10, None, True) for g in gs]
    monkeypatch.setattr(lt, "working_order", lambda p, n, j, N: (orig(p, n, j, N)[0], orig(p, n, j, N)[1] + 1))
    for g, r in zip(gs, base):
        r2 = lt._lt_compute(g, 3, 10, None, True)
        assert r2.working_order == r.working_order + 1
        assert r2.t == r.t and r2.phi == r.phi


def test_crossed_examples():
    ctx = WittCtx(3, 2, 5)
    one = StabElt.one(ctx)
    assert crossed_check(one, one)["holds"]
    w = ctx.field.multiplicative_generator()
    assert crossed_check(teich_stab(ctx, w), teich_stab(ctx, w**3))["holds"]
    rng = random.Random(19)
    rep = crossed_check(stab_random(ctx, rng), stab_random(ctx, rng))
    assert rep["holds"] and rep["functorial"]


def test_lt_errors():
    ctx = WittCtx(3, 2, 5)
    with pytest.raises(NotAUnit):
        lt_action(StabElt.S(ctx))
    with pytest.raises(ConfigError):
        lt_action(StabElt.one(WittCtx(3, 3, 4)))
    with pytest.raises(ConfigError):
        lt_action(StabElt.one(ctx), j=1)
    with pytest.raises(PrecisionExceeded):
        lt_action(StabElt.one(WittCtx(3, 2, 2)))
