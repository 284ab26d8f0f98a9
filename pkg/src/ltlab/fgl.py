"""Formal group laws: the Honda law H_n, the universal deformation G_n and
operations on them (formal sums, a-series, p-series, conjugation).

Laws are built from a logarithm l(x) over an exact rational ring: with
``L[i, d] = [x^d] l(x)^i`` and ``e = l^{-1}`` the law is
``F = Σ_{i,m} C(i+m, i) e_{i+m} l(x)^i l(y)^m = Lᵀ M L``.  Coefficients are
then checked to be p-integral and reduced into the target ring.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .base import FieldCtx, WittCtx
from .errors import ContextMismatch, LinearNotUnit, PostCheckFailure
from .rings import (
    CoeffRing,
    DefRing,
    GaloisRing,
    RationalPolyRing,
    RationalRing,
    rational_to_ring,
    ring_from_key,
)
from .series import (
    BSeries,
    USeries,
    bsubstitute,
    compose,
    compose_outer,
    revert,
    ring_matmul,
    substitute_separate,
)

FULL_CUBE_MAX_N = 12
PROBE_SEED = 20240601


class FormalGroupLaw:
    """A truncated formal group law F(x, y) over a coefficient ring."""

    __slots__ = ("ring", "F", "name", "p", "n")

    def __init__(self, F: BSeries, name: str = "F", p: int | None = None, n: int | None = None,
                 check: bool = True):
        self.ring = F.ring
        self.F = F
        self.name = name
        self.p = p
        self.n = n
        if check:
            check_axioms(self)

    @property
    def N(self) -> int:
        return self.F.N

    def coeff(self, i: int, j: int) -> np.ndarray:
        return self.F.coeff(i, j)

    def add(self, a: USeries, b: USeries) -> USeries:
        """a +_F b."""
        return bsubstitute(self.F, a, b)

    def truncate(self, M: int) -> "FormalGroupLaw":
        return FormalGroupLaw(self.F.truncate(M), self.name, self.p, self.n, check=False)

    def map_coeffs(self, func, ring: CoeffRing, name: str | None = None, check: bool = True) -> "FormalGroupLaw":
        return FormalGroupLaw(self.F.map_coeffs(func, ring), name or self.name, self.p, self.n, check=check)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalGroupLaw):
            return NotImplemented
        return self.F == other.F

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return str(self.F)

    def __repr__(self) -> str:
        return f"FormalGroupLaw<{self.name}, {self.ring.name}, N={self.N}>"

    # -- serialisation ----------------------------------------------------------
    def to_json(self) -> dict:
        coeffs = []
        for i, j in sorted(self.F.support()):
            c = self.F.c[i, j]
            coeffs.append({"i": i, "j": j, "c": [_json_scalar(v) for v in c], "text": self.ring.fmt(c)})
        return {
            "p": self.p,
            "n": self.n,
            "N": self.N,
            "name": self.name,
            "ring": {"key": [list(v) if isinstance(v, tuple) else v for v in self.ring.key], "name": self.ring.name},
            "coeffs": coeffs,
        }

    @classmethod
    def from_json(cls, doc: dict, check: bool = True) -> "FormalGroupLaw":
        key = tuple(tuple(v) if isinstance(v, list) else v for v in doc["ring"]["key"])
        ring = ring_from_key(key)
        N = doc["N"]
        c = ring.zeros(N + 1, N + 1)
        for ent in doc["coeffs"]:
            vals = [Fraction(v) if isinstance(v, str) else v for v in ent["c"]]
            c[ent["i"], ent["j"]] = np.array(vals, dtype=c.dtype)
        return cls(BSeries(ring, N, c), doc.get("name", "F"), doc.get("p"), doc.get("n"), check=check)


def _json_scalar(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return int(v)


# ---------------------------------------------------------------------------
# axioms


def check_axioms(law: FormalGroupLaw, probes: int = 3, seed: int = PROBE_SEED) -> None:
    """Verify unit, commutativity and associativity to truncation (raise on failure)."""
    F, ring, N = law.F, law.ring, law.N
    one, zero = ring.one(), ring.zeros()
    for i in range(N + 1):
        want = one if i == 1 else zero
        if np.any(F.c[i, 0] != want) or np.any(F.c[0, i] != want):
            raise PostCheckFailure(f"{law.name}: unit axiom F(x,0) = x fails at degree {i}")
    if F != F.swap():
        raise PostCheckFailure(f"{law.name}: not commutative")
    if not associativity_holds(law, probes, seed):
        raise PostCheckFailure(f"{law.name}: not associative to truncation {N}")


def associativity_holds(law: FormalGroupLaw, probes: int = 3, seed: int = PROBE_SEED) -> bool:
    """Full trivariate check for N ≤ 12, seeded random univariate probes above."""
    F, ring, N = law.F, law.ring, law.N
    if N <= FULL_CUBE_MAX_N:
        # LHS[i,j,k] = Σ_a F[a,k] (F^a)[i,j];  RHS[i,j,k] = Σ_b F[i,b] (F^b)[j,k]
        powers = []
        cur = BSeries(ring, N, _bconst(ring, N))
        for _ in range(N + 1):
            powers.append(cur.c)
            cur = cur * F
        P = np.stack(powers)  # (a, i, j, dim)
        lhs = ring.zeros(N + 1, N + 1, N + 1)
        rhs = ring.zeros(N + 1, N + 1, N + 1)
        for a in range(N + 1):
            lhs = lhs + ring.mul(F.c[a][None, None, :, :], P[a][:, :, None, :])
            rhs = rhs + ring.mul(F.c[:, a][:, None, None, :], P[a][None, :, :, :])
            lhs, rhs = ring.reduce(lhs), ring.reduce(rhs)
        idx = np.arange(N + 1)
        mask = (idx[:, None, None] + idx[None, :, None] + idx[None, None, :]) <= N
        return not np.any((lhs != rhs)[mask])
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        a, b, c = (_random_series(ring, N, rng) for _ in range(3))
        if law.add(law.add(a, b), c) != law.add(a, law.add(b, c)):
            return False
    return True


def _bconst(ring: CoeffRing, N: int) -> np.ndarray:
    c = ring.zeros(N + 1, N + 1)
    c[0, 0] = ring.one()
    return c


def _random_series(ring: CoeffRing, N: int, rng: np.random.Generator) -> USeries:
    c = ring.random(rng, N + 1)
    c[0] = 0
    return USeries(ring, N, c)


# ---------------------------------------------------------------------------
# construction from logarithms


def law_from_log(log: USeries) -> BSeries:
    """F(x,y) = exp(log x + log y) over the (exact) ring of ``log``."""
    ring, N = log.ring, log.N
    e = revert(log)
    L = log.powers_matrix()  # L[i, d]
    M = ring.zeros(N + 1, N + 1)
    for i in range(N + 1):
        for m in range(N + 1 - i):
            if i + m >= 1 and np.any(e.c[i + m] != 0):
                M[i, m] = e.c[i + m] * comb(i + m, i)
    tmp = ring_matmul(ring, M, L)  # (i, d2)
    F = ring_matmul(ring, np.swapaxes(L, 0, 1).copy(), tmp)  # (d1, d2)
    return BSeries(ring, N, F)


def honda_log(p: int, n: int, N: int) -> USeries:
    """l(x) = Σ x^{p^{ni}} / p^i over Q."""
    Q = RationalRing()
    terms = {}
    i = 0
    while p ** (n * i) <= N:
        terms[p ** (n * i)] = np.array([Fraction(1, p**i)], dtype=object)
        i += 1
    return USeries.from_dict(Q, N, terms)


@lru_cache(maxsize=64)
def _honda_rational(p: int, n: int, N: int) -> BSeries:
    return law_from_log(honda_log(p, n, N))


@lru_cache(maxsize=64)
def honda_fgl(p: int, n: int, N: int, target: str = "field", k: int = 4) -> FormalGroupLaw:
    """The Honda law H_n (p-series x^{p^n}) truncated at total degree N.

    ``target``: ``"field"`` (over F_{p^n}), ``"witt"`` (over W/p^k) or
    ``"rational"`` (over Q, exact).
    """
    if N < 2:
        raise ValueError("truncation degree must be at least 2")
    FQ = _honda_rational(p, n, N)
    name = f"H_{n}"
    if target == "rational":
        return FormalGroupLaw(FQ, name, p, n)
    if target == "field":
        ring = GaloisRing(FieldCtx(p, n))
    elif target == "witt":
        ring = GaloisRing(WittCtx(p, n, k))
    else:
        raise ValueError(f"unknown target {target!r}")
    law = FormalGroupLaw(BSeries(ring, N, rational_to_ring(FQ.c, ring, p)), name, p, n)
    # post-check: p-series is x^{p^n} modulo p
    ps = p_series(law)
    expect = USeries.monomial(ring, N, p**n, ring.one())
    if np.any((ps.c - expect.c) % p != 0):
        raise PostCheckFailure("Honda law: p-series is not x^{p^n} modulo p")
    return law


def araki_log_coeffs(p: int, n: int, ring: RationalPolyRing, kmax: int) -> list[np.ndarray]:
    """Coefficients l_0..l_kmax of the p-typical logarithm Σ l_k x^{p^k} with
    v_0 = p, v_i = u_i (0<i<n), v_n = 1, v_i = 0 (i>n), from the recursion
    (p − p^{p^k}) l_k = Σ_{0≤i<k} l_i v_{k−i}^{p^i}."""

    def v(i: int) -> np.ndarray:
        if i == 0:
            return ring.from_int(p)
        if i < n:
            return ring.u(i)
        if i == n:
            return ring.one()
        return ring.zeros()

    ls = [ring.one()]
    for k in range(1, kmax + 1):
        acc = ring.zeros()
        for i in range(k):
            acc = ring.add(acc, ring.mul(ls[i], ring.pow(v(k - i), p**i)))
        denom = Fraction(p - p ** (p**k))
        ls.append(np.array([Fraction(c) / denom for c in acc], dtype=object))
    return ls


@lru_cache(maxsize=64)
def _deformation_rational(p: int, n: int, j: int, N: int) -> tuple[RationalPolyRing, BSeries]:
    Qu = RationalPolyRing(n - 1, j)
    kmax = 0
    while p ** (kmax + 1) <= N:
        kmax += 1
    ls = araki_log_coeffs(p, n, Qu, kmax)
    log = USeries.from_dict(Qu, N, {p**k: ls[k] for k in range(kmax + 1)})
    return Qu, law_from_log(log)


@lru_cache(maxsize=64)
def universal_deformation_fgl(p: int, n: int, j: int = 3, N: int | None = None) -> FormalGroupLaw:
    """G_n over E_0/m^j, truncated at total degree N (default p^2 + 1).

    Post-checks: the p-series is px +_G u_1 x^p +_G ... +_G x^{p^n}, and the
    reduction modulo m is the Honda law H_n over F_{p^n}.
    """
    if N is None:
        N = p * p + 1
    Qu, FQ = _deformation_rational(p, n, j, N)
    E = DefRing(p, n, j)
    law = FormalGroupLaw(BSeries(E, N, Qu.to_defring(FQ.c, E)), f"G_{n}", p, n)
    ps = p_series(law)
    if ps != deformation_p_series_rhs(law):
        raise PostCheckFailure("G_n: p-series differs from px +_G u_1 x^p +_G ... +_G x^{p^n}")
    red = reduce_mod_m(law)
    if red.F != honda_fgl(p, n, N, "field").F:
        raise PostCheckFailure("G_n: reduction modulo m is not the Honda law")
    return law


def deformation_p_series_rhs(law: FormalGroupLaw) -> USeries:
    """px +_G u_1 x^p +_G ... +_G u_{n-1} x^{p^{n-1}} +_G x^{p^n} over E_0/m^j."""
    E: DefRing = law.ring  # type: ignore[assignment]
    p, n, N = E.p, E.n, law.N
    terms = [USeries.monomial(E, N, 1, E.from_int(p))]
    for i in range(1, n):
        terms.append(USeries.monomial(E, N, p**i, E.u(i)))
    terms.append(USeries.monomial(E, N, p**n, E.one()))
    return formal_sum(law, terms)


def reduce_mod_m(law: FormalGroupLaw) -> FormalGroupLaw:
    """Image of a law over E_0/m^j in F_{p^n}."""
    E: DefRing = law.ring  # type: ignore[assignment]
    K = E.residue_field
    return law.map_coeffs(E.residue, K, name=law.name + " mod m", check=False)


# ---------------------------------------------------------------------------
# operations


def formal_sum(law: FormalGroupLaw, terms: Sequence[USeries]) -> USeries:
    """Left-associated iterated F-sum of the given series."""
    if not terms:
        return USeries.zero(law.ring, law.N)
    acc = terms[0]
    for t in terms[1:]:
        acc = law.add(acc, t)
    return acc


def _int_series(law: FormalGroupLaw, m: int) -> USeries:
    """[m](x) for an integer m ≥ 0 by double-and-add."""
    ring, N = law.ring, law.N
    x = USeries.x(ring, N)
    res = USeries.zero(ring, N)
    for bit in bin(m)[2:] if m > 0 else "":
        res = law.add(res, res) if not res.is_zero() else res
        if bit == "1":
            res = law.add(res, x)
    return res


def p_series(law: FormalGroupLaw) -> USeries:
    """[p](x) = x +_F x +_F ... +_F x (p copies)."""
    if law.p is None:
        raise ValueError("law has no prime attached")
    return _int_series(law, law.p)


def a_series(law: FormalGroupLaw, a: int, k: int | None = None) -> USeries:
    """[a](x) for a p-adic integer a given modulo p^k (a ≥ 0 taken literally if k is None).

    Built from the p-adic digits a = Σ c_i p^i as Σ^F [c_i]([p]^{∘i}).
    """
    p = law.p
    if p is None:
        raise ValueError("law has no prime attached")
    if k is not None:
        a %= p**k
    elif a < 0:
        raise ValueError("negative a requires a precision k")
    ring, N = law.ring, law.N
    x = USeries.x(ring, N)
    ps = p_series(law)
    digit_series = {c: _int_series(law, c) for c in range(p)}
    acc = USeries.zero(ring, N)
    inner = x
    while a:
        a, c = divmod(a, p)
        if c:
            acc = law.add(acc, compose(digit_series[c], inner))
        inner = compose(ps, inner)
        if inner.is_zero():
            break
    return acc


def conjugate_fgl(h: USeries, law: FormalGroupLaw, check: bool = True) -> FormalGroupLaw:
    """G_h(x, y) = h^{-1}(F(h(x), h(y))), so that h: G_h → F is an isomorphism."""
    if h.ring != law.ring or h.N != law.N:
        raise ContextMismatch("series and law must share ring and truncation")
    if not h.ring.is_unit(h.c[1]):
        raise LinearNotUnit("linear coefficient of h is not a unit")
    hinv = revert(h)
    Fhh = substitute_separate(law.F, h, h)
    G = compose_outer(hinv, Fhh)
    out = FormalGroupLaw(G, f"{law.name}^h", law.p, law.n, check=check)
    if check and compose_outer(h, G) != Fhh:
        raise PostCheckFailure("conjugate law: h is not a homomorphism G_h → F")
    return out


def is_homomorphism(f: USeries, source: FormalGroupLaw, target: FormalGroupLaw) -> bool:
    """f(source(x,y)) == target(f(x), f(y)) to truncation."""
    return compose_outer(f, source.F) == substitute_separate(target.F, f, f)


__all__ = [
    "FormalGroupLaw",
    "a_series",
    "araki_log_coeffs",
    "check_axioms",
    "conjugate_fgl",
    "deformation_p_series_rhs",
    "formal_sum",
    "honda_fgl",
    "honda_log",
    "is_homomorphism",
    "law_from_log",
    "p_series",
    "reduce_mod_m",
    "universal_deformation_fgl",
]
