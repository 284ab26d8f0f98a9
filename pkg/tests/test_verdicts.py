"""Unit-group verifiers, shift arithmetic and constraint rules."""

import json
import random
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ltlab.base import WittCtx
from ltlab.errors import ConfigError, OddInput, PrecisionExceeded, SelfMapUnavailable
from ltlab.stabilizer import StabElt, stab_random, teich_stab
from ltlab.verdicts import (
    duality_shifts,
    hyp_check,
    moore_duality_report,
    sparse_zero,
    torsion_exponent,
    vanishing_line,
    verify_crossed,
    verify_detred,
    verify_fund_alpha,
    verify_modp_class,
    verify_suite,
)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 1), (5, 1)])
def test_unit_identities_examples(p, n):
    ctx = WittCtx(p, n, 5)
    w = ctx.field.multiplicative_generator()
    for g in (StabElt.one(ctx), StabElt.scalar(ctx, 1 + p), teich_stab(ctx, w)):
        assert verify_fund_alpha(g).outcome == "pass"
        assert verify_detred(g).outcome == "pass"
        assert verify_modp_class(g).outcome == "pass"


def test_detred_teichmuller_zeta_zero():
    ctx = WittCtx(3, 2, 5)
    v = verify_detred(teich_stab(ctx, ctx.field.multiplicative_generator()))
    assert v.details["zeta"] == 0 and v.details["exp_p_zeta"] == "1"


def test_detred_central_example():
    ctx = WittCtx(3, 2, 5)
    v = verify_detred(StabElt.scalar(ctx, 4))
    assert v.details["t0_lambda"] == "1"
    assert v.details["det"] == "16"


def test_detred_precision_guard():
    with pytest.raises(PrecisionExceeded):
        verify_detred(StabElt.one(WittCtx(3, 2, 3)), j=3)


def test_suite_and_crossed_small():
    vs = verify_suite(3, 2, 3, seed=5)
    assert len(vs) == 9 and all(v.passed for v in vs)
    assert [v.inputs["trial"] for v in vs] == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    ctx = WittCtx(3, 2, 5)
    rng = random.Random(3)
    assert verify_crossed(stab_random(ctx, rng), stab_random(ctx, rng)).passed
    line = vs[0].to_line()
    assert json.loads(line)["rule"] == "fund_alpha"
    with pytest.raises(ConfigError):
        verify_suite(3, 2, 1, 0, rules=("nope",))


def test_suite_deterministic():
    a = [v.to_line() for v in verify_suite(5, 1, 4, seed=9)]
    b = [v.to_line() for v in verify_suite(5, 1, 4, seed=9)]
    assert a == b


# ---------------------------------------------------------------------------
# arithmetic


def test_shift_fixtures():
    r = duality_shifts(3, 2, 2)
    assert (r.bc_shift, r.alg_shift) == (650, 644)
    assert duality_shifts(5, 2, 1).bc_shift == 302


@given(st.integers(2, 13), st.integers(1, 4), st.integers(0, 4))
def test_shift_invariants(p, n, k):
    r = duality_shifts(p, n, k)
    assert r.bc_shift - r.alg_shift == n * n + n
    assert r.bc_shift % 2 == 0 and r.alg_shift % 2 == 0


def test_moore_fixture():
    r = moore_duality_report(3, 2, 1)
    assert (r.bc_shift, r.alg_shift, r.net) == (650, 644, 644)
    assert r.fixture == {"period": 144, "net_mod_period": 68, "known": 116, "discrepancy": 48}
    # formula value for (5, 1, 1): 2·25·6 + 2 − 2·4 − 2
    assert moore_duality_report(5, 1, 1).net == 292


def test_moore_boundary_and_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert moore_duality_report(3, 2, 9).warning is None
    with pytest.warns(SelfMapUnavailable):
        r = moore_duality_report(3, 2, 10)
    assert r.warning


def test_hyp_table():
    table = {(5, 2): True, (3, 2): False, (3, 1): True, (7, 3): True}
    for (p, n), want in table.items():
        v = hyp_check(p, n)
        assert v.details["holds"] is want
    assert hyp_check(3, 2).details["max"] == 6


def test_sparse_zero():
    assert sparse_zero(5, 3).outcome == "forced-zero"
    assert sparse_zero(5, 8).outcome == "not-forced"
    assert sparse_zero(2, 3).outcome == "not-forced"
    assert sparse_zero(2, 1).outcome == "not-forced"


def test_torsion_exponent():
    assert torsion_exponent(3, 12).details["bound"] == 9
    assert torsion_exponent(3, 4).details["bound"] == 3
    assert torsion_exponent(2, 4).details["bound"] == 8
    assert torsion_exponent(2, 2).details["bound"] == 2
    assert torsion_exponent(2, 24).details["bound"] == 16
    assert torsion_exponent(5, 6).outcome == "forced-zero"
    assert torsion_exponent(5, 40).details == {"k": 1, "m": 1, "bound": 25}
    with pytest.raises(OddInput):
        torsion_exponent(3, 5)
    with pytest.raises(ConfigError):
        torsion_exponent(3, 0)


def test_vanishing_line():
    assert vanishing_line(5, 2).details["zero_for_s_greater_than"] == 4
    assert vanishing_line(3, 2).outcome == "no-line"
    assert vanishing_line(7, 3).details["zero_for_s_greater_than"] == 9
