"""The endomorphism ring W<S>/(S^n − p, Sa = a^φ S) of H_n and its unit group S_n.

Elements are kept in the normal form a_0 + a_1 S + ... + a_{n-1} S^{n-1}
(S-powers on the right).  The ring acts on H_n by power series:
T(α) ↦ αx, S ↦ x^p, p ↦ [p](x) = x^{p^n}; with this dictionary the ring
product corresponds to composition, ``series(g·h) = series(g) ∘ series(h)``.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import WittCtx, WittElt, teich_digits, teichmuller, witt_det
from .errors import (
    ConfigError,
    ContextMismatch,
    NotAUnit,
    PostCheckFailure,
    PrecisionExceeded,
    PrimeTwoUnsupported,
    ThetaNotPrincipal,
)
from .fgl import formal_sum, honda_fgl, is_homomorphism
from .parse import parse_stab_text
from .rings import GaloisRing
from .series import USeries

#: documented composition convention, verified by the intertwining tests
COMPOSITION_CONVENTION = "stab_mul(g, h) acts as the series g(h(x)) (apply h first)"
#: identity satisfied by the matrix representation (right multiplication on {S^i})
MATRIX_CONVENTION = "A(gh) = A(h) A(g)"


def r_of(p: int, n: int) -> int:
    """r(n) = (p^n − 1)/(p − 1)."""
    return (p**n - 1) // (p - 1)


@dataclass(frozen=True)
class StabElt:
    ctx: WittCtx
    coeffs: tuple[WittElt, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.ctx.n:
            raise ConfigError(f"expected {self.ctx.n} coefficients, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(self.ctx(a) for a in self.coeffs))

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_coeffs(cls, ctx: WittCtx, coeffs: Sequence) -> "StabElt":
        cs = [ctx(a) for a in coeffs]
        if len(cs) > ctx.n:
            raise ConfigError(f"too many coefficients for n = {ctx.n}")
        return cls(ctx, tuple(cs + [ctx.zero()] * (ctx.n - len(cs))))

    @classmethod
    def parse(cls, ctx: WittCtx, text: str) -> "StabElt":
        """Parse "a_0; a_1; ..." (missing trailing coefficients are zero)."""
        return cls.from_coeffs(ctx, [ctx(d) for d in parse_stab_text(text)])

    @classmethod
    def one(cls, ctx: WittCtx) -> "StabElt":
        return cls.from_coeffs(ctx, [1])

    @classmethod
    def S(cls, ctx: WittCtx) -> "StabElt":
        if ctx.n == 1:
            return cls.from_coeffs(ctx, [ctx.p])
        return cls.from_coeffs(ctx, [0, 1])

    @classmethod
    def scalar(cls, ctx: WittCtx, a) -> "StabElt":
        return cls.from_coeffs(ctx, [ctx(a)])

    # -- predicates ---------------------------------------------------------
    def is_unit(self) -> bool:
        return self.coeffs[0].is_unit()

    def is_central(self) -> bool:
        return all(a.is_zero() for a in self.coeffs[1:]) and self.coeffs[0].in_zp()

    # -- arithmetic -----------------------------------------------------------
    def __mul__(self, other: "StabElt") -> "StabElt":
        return stab_mul(self, other)

    def __add__(self, other: "StabElt") -> "StabElt":
        _same(self, other)
        return StabElt(self.ctx, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "StabElt") -> "StabElt":
        _same(self, other)
        return StabElt(self.ctx, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __pow__(self, e: int) -> "StabElt":
        if e < 0:
            return stab_inv(self) ** (-e)
        r, b = StabElt.one(self.ctx), self
        while e:
            if e & 1:
                r = r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def with_precision(self, k: int) -> "StabElt":
        ctx = self.ctx.with_precision(k)
        if k > self.ctx.k:
            raise PrecisionExceeded(f"cannot raise precision from {self.ctx.k} to {k}")
        return StabElt(ctx, tuple(ctx(a.c) for a in self.coeffs))

    def __str__(self) -> str:
        return "; ".join(str(a) for a in self.coeffs)

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "n": self.ctx.n, "k": self.ctx.k, "coeffs": [str(a) for a in self.coeffs],
                "text": str(self)}


def _same(g: StabElt, h: StabElt) -> None:
    if g.ctx != h.ctx:
        raise ContextMismatch("stabilizer elements from different contexts")


def stab_mul(g: StabElt, h: StabElt) -> StabElt:
    """Ring product with (a_i S^i)(b_j S^j) = a_i b_j^{φ^i} S^{i+j}, S^n = p."""
    _same(g, h)
    ctx, n, p = g.ctx, g.ctx.n, g.ctx.p
    out = [ctx.zero() for _ in range(n)]
    for i, a in enumerate(g.coeffs):
        if a.is_zero():
            continue
        for j, b in enumerate(h.coeffs):
            if b.is_zero():
                continue
            term = a * b.frobenius(i)
            d = i + j
            if d >= n:
                term = term * p
                d -= n
            out[d] = out[d] + term
    return StabElt(ctx, tuple(out))


def stab_inv(g: StabElt) -> StabElt:
    """Two-sided inverse of a unit by Newton iteration h ← h(2 − gh)."""
    if not g.is_unit():
        raise NotAUnit("stabilizer element is not a unit (a_0 ≡ 0 mod p)")
    ctx = g.ctx
    one = StabElt.one(ctx)
    two = StabElt.scalar(ctx, 2)
    h = StabElt.scalar(ctx, g.coeffs[0].inverse())
    for _ in range(2 * (ctx.n * ctx.k).bit_length() + 4):
        if stab_mul(g, h) == one:
            if stab_mul(h, g) != one:  # pragma: no cover - impossible in a ring
                raise PostCheckFailure("left and right inverses differ")
            return h
        h = stab_mul(h, two - stab_mul(g, h))
    raise PostCheckFailure("Newton inversion in the endomorphism ring did not converge")


def stab_matrix(g: StabElt) -> list[list[WittElt]]:
    """A(g): column c holds the coordinates of S^c · g in the basis {S^i}.

    Entry (r, c) is a_{r−c}^{φ^c} for r ≥ c and p·a_{n+r−c}^{φ^c} for r < c.
    """
    n, p = g.ctx.n, g.ctx.p
    A = [[g.ctx.zero() for _ in range(n)] for _ in range(n)]
    for r in range(n):
        for c in range(n):
            if r >= c:
                A[r][c] = g.coeffs[r - c].frobenius(c)
            else:
                A[r][c] = g.coeffs[n + r - c].frobenius(c) * p
    return A


def stab_det(g: StabElt) -> WittElt:
    """det A(g); post-checks: Frobenius-fixed and ≡ a_0^{r(n)} mod p."""
    d = witt_det(stab_matrix(g))
    if not d.is_frobenius_fixed():
        raise PostCheckFailure(f"determinant {d} is not Frobenius-fixed")
    a0r = g.coeffs[0] ** r_of(g.ctx.p, g.ctx.n)
    if (d - a0r).residue_coeffs() != (0,) * g.ctx.n:
        raise PostCheckFailure("determinant is not congruent to a_0^{r(n)} modulo p")
    return d


def padic_log_principal(y: int, p: int, k: int) -> int:
    """log(y) mod p^k for an integer y ≡ 1 mod p (p odd), from Σ (−1)^{m+1} z^m/m."""
    if (y - 1) % p:
        raise ThetaNotPrincipal(f"{y} is not ≡ 1 mod {p}")
    mod = p**k
    z = (y - 1) % mod
    if z == 0:
        return 0
    total = 0
    # v(z^m/m) ≥ m − v_p(m) ≥ k for every m beyond this bound, so the tail vanishes
    for m in range(1, 3 * k + 10):
        vm = _vp(m, p)
        if m - vm >= k:
            continue
        num = z**m
        if num % p**vm:
            raise ThetaNotPrincipal("non-integral log term")  # pragma: no cover
        term = (num // p**vm) * pow(m // p**vm, -1, mod)
        total += term if m % 2 == 1 else -term
    return total % mod


def _vp(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def stab_theta(g: StabElt) -> int:
    """θ(g) = T(ā_0)^{−r(n)} det(g) ∈ 1 + pZ_p, as an integer mod p^k."""
    if not g.is_unit():
        raise NotAUnit("ζ is defined on units only")
    ctx = g.ctx
    t = teichmuller(ctx, g.coeffs[0].reduce())
    theta = stab_det(g) * t ** (-r_of(ctx.p, ctx.n))
    if not theta.in_zp():
        raise ThetaNotPrincipal("θ does not lie in Z_p")
    val = theta.to_int()
    if (val - 1) % ctx.p:
        raise ThetaNotPrincipal(f"θ = {val} is not ≡ 1 mod p")
    return val


def stab_zeta(g: StabElt) -> int:
    """ζ(g) = (1/p) log θ(g), returned modulo p^{k−2}."""
    ctx = g.ctx
    if ctx.p == 2:
        raise PrimeTwoUnsupported("ζ is only implemented for odd primes")
    if ctx.k < 3:
        raise PrecisionExceeded("ζ needs Witt precision k ≥ 3")
    theta = stab_theta(g)
    lg = padic_log_principal(theta, ctx.p, ctx.k)
    if lg % ctx.p:
        raise ThetaNotPrincipal("log θ is not divisible by p")  # pragma: no cover
    return (lg // ctx.p) % ctx.p ** (ctx.k - 2)


def faithful_degree(ctx: WittCtx, N: int) -> int:
    """Largest degree through which stab_to_series is determined by the data mod p^k."""
    unknown = ctx.p ** (ctx.n * ctx.k)  # first degree touched by the unknown digit k of a_0
    return min(N, unknown - 1)


def stab_series_terms(g: StabElt, N: int) -> list[tuple[int, object]]:
    """Monomials (degree, α) from the Teichmüller digits: T(α)p^jS^i ↦ α x^{p^{i+nj}}."""
    ctx = g.ctx
    p, n = ctx.p, ctx.n
    terms = []
    for i, a in enumerate(g.coeffs):
        if a.is_zero():
            continue
        for j, alpha in enumerate(teich_digits(ctx, a)):
            deg = p ** (i + n * j)
            if deg > N:
                break
            if not alpha.is_zero():
                terms.append((deg, alpha))
    return terms


def stab_to_series(g: StabElt, N: int, check: bool = True) -> USeries:
    """The endomorphism series of H_n over F_{p^n} represented by g (to degree N)."""
    ctx = g.ctx
    p, n = ctx.p, ctx.n
    H = honda_fgl(p, n, max(N, 2), "field")
    K: GaloisRing = H.ring  # type: ignore[assignment]
    Nh = H.N
    monos = [
        USeries.monomial(K, Nh, d, np.array(alpha.c, dtype=K.dtype)) for d, alpha in stab_series_terms(g, Nh)
    ]
    s = formal_sum(H, monos)
    if check and not is_homomorphism(s, H, H):
        raise PostCheckFailure("series of g does not commute with H_n")
    return s.truncate(N) if Nh != N else s


def stab_random(ctx: WittCtx, seed: int | _random.Random | None = None, unit: bool = True) -> StabElt:
    """Uniform coefficients from a seeded generator; a_0 forced to be a unit if requested."""
    rng = seed if isinstance(seed, _random.Random) else _random.Random(seed)
    coeffs = [ctx.random(rng) for _ in range(ctx.n)]
    if unit:
        while not coeffs[0].is_unit():
            coeffs[0] = ctx.random(rng)
    return StabElt(ctx, tuple(coeffs))


def teich_stab(ctx: WittCtx, alpha) -> StabElt:
    """The element T(α) ∈ S_n."""
    return StabElt.scalar(ctx, teichmuller(ctx, ctx.field(alpha) if not hasattr(alpha, "ctx") else alpha))


__all__ = [
    "COMPOSITION_CONVENTION",
    "MATRIX_CONVENTION",
    "StabElt",
    "faithful_degree",
    "padic_log_principal",
    "r_of",
    "stab_det",
    "stab_inv",
    "stab_matrix",
    "stab_mul",
    "stab_random",
    "stab_series_terms",
    "stab_theta",
    "stab_to_series",
    "stab_zeta",
    "teich_stab",
]
