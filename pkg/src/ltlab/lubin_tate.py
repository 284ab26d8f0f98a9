"""The deformation ring E_0/m^j, its unit-group maps, and the Lubin-Tate action.

For a unit g of the endomorphism ring of H_n, ``lt_action`` computes the
W-algebra automorphism φ_g of E_0/m^j and the isomorphism ψ_g: φ_*G_n → G_n
lifting the series of g, together with the coordinates t_i(g) in
ψ_g = t_0 x +_G t_1 x^p +_G t_2 x^{p^2} +_G ...

The coordinates come from :mod:`ltlab._tsolver`.  Everything is then checked
again at the level of truncated series over E_0/m^j: ψ ≡ h mod m for the
chosen lift h of g, f = h^{-1}∘ψ ≡ x mod m, and f is a homomorphism
φ_*G_n → G_h, where G_h is the conjugate law with h: G_h → G_n.
"""

from __future__ import annotations

import math
import random as _random
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._tsolver import CoordinateSolver
from .base import WittCtx, WittElt, ZnElt, teich_digits, teichmuller, zn_reduce
from .errors import (
    ConfigError,
    IntegralityFailure,
    NotAUnit,
    NotPrincipalUnit,
    PostCheckFailure,
    PrecisionExceeded,
    PrimeTwoUnsupported,
    ResidueNotExpressible,
)
from .fgl import FormalGroupLaw, conjugate_fgl, formal_sum, universal_deformation_fgl
from .rings import DefRing
from .series import USeries, compose, compose_outer, revert, substitute_separate
from .stabilizer import StabElt, faithful_degree, stab_mul, stab_to_series


# ---------------------------------------------------------------------------
# elements of E_0/m^j


class DefRingElt:
    """An element of E_0/m^j = W[[u_1..u_{n-1}]]/m^j."""

    __slots__ = ("ring", "c")

    def __init__(self, ring: DefRing, c):
        self.ring = ring
        self.c = ring.reduce(np.asarray(c, dtype=ring.dtype))

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_int(cls, ring: DefRing, a: int) -> "DefRingElt":
        return cls(ring, ring.from_int(a))

    @classmethod
    def const(cls, ring: DefRing, w) -> "DefRingElt":
        return cls(ring, ring.const(w))

    @classmethod
    def u(cls, ring: DefRing, i: int = 1) -> "DefRingElt":
        return cls(ring, ring.u(i))

    @classmethod
    def from_monomials(cls, ring: DefRing, terms: dict) -> "DefRingElt":
        """Build from {β (exponent tuple): Witt element or int}."""
        c = ring.zeros()
        for beta, w in terms.items():
            if beta not in ring.mon_index:
                continue
            idx = ring.mon_index[beta] * ring.n
            vals = [w] + [0] * (ring.n - 1) if isinstance(w, int) else [int(v) for v in w.c]
            c[idx : idx + ring.n] = vals
        return cls(ring, c)

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "DefRingElt":
        if isinstance(other, DefRingElt):
            if other.ring != self.ring:
                from .errors import ContextMismatch

                raise ContextMismatch("elements of different deformation rings")
            return other
        if isinstance(other, int):
            return DefRingElt.from_int(self.ring, other)
        if isinstance(other, WittElt):
            return DefRingElt.const(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return DefRingElt(self.ring, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return DefRingElt(self.ring, self.c - o.c)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return DefRingElt(self.ring, -self.c)

    def __mul__(self, other):
        o = self._coerce(other)
        return DefRingElt(self.ring, self.ring.mul(self.c, o.c))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "DefRingElt":
        return DefRingElt(self.ring, self.ring.pow(self.c, e))

    def inverse(self) -> "DefRingElt":
        return DefRingElt(self.ring, self.ring.inv(self.c))

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return not np.any(self.c != o.c)

    def __hash__(self) -> int:
        return hash((self.ring.key, tuple(int(v) for v in self.c)))

    # -- structure ------------------------------------------------------------
    def is_unit(self) -> bool:
        return self.ring.is_unit(self.c)

    def in_max_ideal(self) -> bool:
        return self.ring.in_max_ideal(self.c)

    def is_zero(self) -> bool:
        return not np.any(self.c != 0)

    def constant_term(self) -> WittElt:
        return self.ring.coeff(self.c, (0,) * self.ring.nvars)

    def residue(self):
        """Image in the residue field F_{p^n}."""
        return self.ring.wctx.field([int(v) for v in self.ring.residue(self.c)])

    def mod_p(self) -> "DefRingElt":
        """Representative of the image in E_0/(p, m^j) (coefficients reduced mod p)."""
        return DefRingElt(self.ring, self.ring.mod_p(self.c))

    def reduce_order(self, j: int) -> "DefRingElt":
        """Image in E_0/m^{j'} for j' ≤ j."""
        if j > self.ring.j:
            raise PrecisionExceeded(f"cannot raise the m-adic truncation from {self.ring.j} to {j}")
        R = DefRing(self.ring.p, self.ring.n, j, self.ring.wctx.modulus)
        c = R.zeros()
        for beta, idx in R.mon_index.items():
            src = self.ring.mon_index[beta] * self.ring.n
            c[idx * R.n : (idx + 1) * R.n] = self.c[src : src + R.n]
        return DefRingElt(R, c)

    def __str__(self) -> str:
        return self.ring.fmt(self.c)

    def __repr__(self) -> str:
        return f"DefRingElt<{self.ring.name}>({self})"

    def to_json(self):
        return str(self)


# ---------------------------------------------------------------------------
# exp(p·), log and Z_n-powers on units


def _vp(m: int, p: int) -> int:
    v = 0
    while m and m % p == 0:
        m //= p
        v += 1
    return v


def exp_p(x: DefRingElt) -> DefRingElt:
    """exp(px) = Σ p^m x^m / m!  (p odd); the result is ≡ 1 mod p."""
    ring = x.ring
    p, j = ring.p, ring.j
    if p == 2:
        raise PrimeTwoUnsupported("exp(p·) is only implemented for odd primes")
    mod = p**j
    total = DefRingElt.from_int(ring, 1)
    xm = DefRingElt.from_int(ring, 1)
    m = 0
    fact_unit, fact_v = 1, 0  # m! = fact_unit · p^fact_v
    while True:
        m += 1
        xm = xm * x
        v = _vp(m, p)
        fact_v += v
        fact_unit = fact_unit * (m // p**v) % mod
        val = m - fact_v  # p-adic valuation of p^m/m!
        if val >= j:
            # valuations m − v_p(m!) only grow for p odd, so the tail vanishes
            if m - (m - 1) // (p - 1) >= j:
                break
            continue
        coeff = p**val * pow(fact_unit, -1, mod) % mod
        total = total + xm * coeff
    return total


def log_unit(y: DefRingElt, mode: str = "ell") -> DefRingElt:
    """Logarithm of a unit.

    * ``mode="ell"``: y ≡ 1 mod p; returns (1/p)·log y in E_0/m^{j−1} (one order
      is lost to the division by p).
    * ``mode="principal"``: y ≡ 1 mod m; returns log y = Σ (−1)^{m+1}(y−1)^m/m in
      E_0/m^j.  The sum is taken in E_0[1/p] modulo the filtration in which p and
      the u_i have weight 1: the term (y−1)^m/m has weight ≥ m − v_p(m), so only
      terms with m − v_p(m) < j are kept, and each kept term must be integral.
      That holds for y ≡ 1 mod p, and for every y ≡ 1 mod m when p > j; otherwise
      (e.g. u_1^3/3 at p = 3, j = 3) NotPrincipalUnit is raised.
    """
    ring = y.ring
    p, n, j = ring.p, ring.n, ring.j
    if p == 2:
        raise PrimeTwoUnsupported("logarithms are only implemented for odd primes")
    w = y - 1
    if mode == "ell":
        if np.any(w.c % p != 0):
            raise NotPrincipalUnit("ell-mode log needs y ≡ 1 mod p")
        if j < 2:
            raise PrecisionExceeded("ell-mode log needs j ≥ 2")
        R = DefRing(p, n, j - 1, ring.wctx.modulus)
        zc = R.zeros()
        for beta, idx in R.mon_index.items():
            src = ring.mon_index[beta] * n
            zc[idx * n : (idx + 1) * n] = w.c[src : src + n] // p
        z = DefRingElt(R, zc)
        mod = p ** (j - 1)
        total = DefRingElt.from_int(R, 0)
        zm = DefRingElt.from_int(R, 1)
        for m in range(1, 3 * j + 10):
            zm = zm * z
            v = _vp(m, p)
            val = m - 1 - v  # valuation of p^{m−1}/m
            if val >= j - 1:
                continue
            coeff = p**val * pow(m // p**v, -1, mod) % mod
            term = zm * coeff
            total = total + term if m % 2 else total - term
        return total
    if mode == "principal":
        if not w.in_max_ideal():
            raise NotPrincipalUnit("principal log needs y ≡ 1 mod m")
        mmax = 1
        while (mmax + 1) - _vp(mmax + 1, p) < j or mmax < j:
            mmax += 1
        D = max(_vp(m, p) for m in range(1, mmax + 1))
        big = DefRing(p, n, j + D, ring.wctx.modulus)
        wc = big.zeros()
        for beta, idx in ring.mon_index.items():
            dst = big.mon_index[beta] * n
            wc[dst : dst + n] = w.c[idx * n : (idx + 1) * n]
        W = DefRingElt(big, wc)
        total = DefRingElt.from_int(ring, 0)
        wm = DefRingElt.from_int(big, 1)
        for m in range(1, mmax + 1):
            wm = wm * W
            v = _vp(m, p)
            if m - v >= j:
                continue
            d = p**v
            if np.any(wm.c % d != 0):
                raise NotPrincipalUnit(
                    f"log term (y−1)^{m}/{m} is not integral, so log y is not defined modulo m^{j}"
                )
            qc = ring.zeros()
            for beta, idx in ring.mon_index.items():
                src = big.mon_index[beta] * n
                qc[idx * n : (idx + 1) * n] = wm.c[src : src + n] // d
            term = DefRingElt(ring, qc) * pow(m // d, -1, p**j)
            total = total + term if m % 2 else total - term
        return total
    raise ValueError(f"unknown log mode {mode!r}")


def zn_pow(x: DefRingElt, a: ZnElt) -> DefRingElt:
    """x^a for a ∈ Z_n, computed as x^{a_k} with a_k = a mod p^k(p^n−1), k = j−1.

    Well defined because x^{p^k(p^n−1)} ≡ 1 mod m^{k+1} for every unit x.
    """
    if not x.is_unit():
        raise NotAUnit("Z_n-powers are defined on units only")
    k = x.ring.j - 1
    return x ** zn_reduce(a, k)


# ---------------------------------------------------------------------------
# formal inverse and coordinate extraction

_INVERSE_CACHE: dict[int, tuple[FormalGroupLaw, USeries]] = {}


def formal_inverse(law: FormalGroupLaw) -> USeries:
    """i(x) with F(x, i(x)) = 0 to truncation."""
    hit = _INVERSE_CACHE.get(id(law))
    if hit is not None and hit[0] is law:
        return hit[1]
    ring, N = law.ring, law.N
    x = USeries.x(ring, N)
    i = -x
    for _ in range(N + 1):
        err = law.add(x, i)
        if err.is_zero():
            break
        i = i - err
    else:  # pragma: no cover - the iteration gains a degree per step
        raise PostCheckFailure("formal inverse did not converge")
    _INVERSE_CACHE[id(law)] = (law, i)
    return i


def extract_t(psi: USeries, law: FormalGroupLaw, imax: int | None = None) -> list[DefRingElt]:
    """The t_i with psi = t_0 x +_G t_1 x^p +_G ... to truncation (i ≤ imax)."""
    ring, N, p = law.ring, law.N, law.p
    if not ring.is_unit(psi.c[1]):
        from .errors import LinearNotUnit

        raise LinearNotUnit("linear coefficient of psi is not a unit")
    if imax is None:
        imax = int(math.floor(math.log(N, p) + 1e-9))
    inv = formal_inverse(law)
    r = psi
    ts = []
    prev = 0
    for i in range(imax + 1):
        d = p**i
        if d > N:
            break
        for e in range(prev + 1, d):
            if np.any(r.c[e] != 0):
                raise ResidueNotExpressible(f"nonzero coefficient in degree {e}, which is not a power of p")
        t = r.c[d].copy()
        ts.append(DefRingElt(ring, t))
        r = law.add(r, compose(inv, USeries.monomial(ring, N, d, t)))
        prev = d
    top = min(N, p ** (len(ts)) - 1)
    for e in range(1, top + 1):
        if np.any(r.c[e] != 0):
            raise ResidueNotExpressible(f"nonzero remainder in degree {e}")
    return ts


# ---------------------------------------------------------------------------
# the action


@dataclass
class LTResult:
    g: StabElt
    phi: dict[str, DefRingElt]
    f: USeries
    psi: USeries
    t: list[DefRingElt]
    residual: dict
    effective_degree: int
    working_order: int
    lift: str = "teichmuller"
    extra: dict = field(default_factory=dict)

    @property
    def t0(self) -> DefRingElt:
        return self.t[0]

    def to_json(self) -> dict:
        return {
            "g": str(self.g),
            "phi": {k: str(v) for k, v in self.phi.items()},
            "t0": str(self.t0),
            "t_list": [str(t) for t in self.t],
            "psi": str(self.psi),
            "f": str(self.f),
            "residual": dict(self.residual),
            "effective_degree": self.effective_degree,
            "working_order": self.working_order,
            "lift": self.lift,
        }


def default_degree(p: int, n: int) -> int:
    return p * p + 1 if n >= 2 else p + 1


def _residue_digits(g: StabElt, M: int) -> list[tuple[int, ...]]:
    """ē_m for m = 0..M, with ē_{i+nj} the Teichmüller digit α_{ij} of a_i."""
    ctx = g.ctx
    n = ctx.n
    need = M // n + 1
    if ctx.k < need:
        raise PrecisionExceeded(
            f"the action to this order needs Witt digits 0..{need - 1}; use Witt precision k ≥ {need}"
        )
    eb = [(0,) * n for _ in range(M + 1)]
    for i, a in enumerate(g.coeffs):
        for jj, alpha in enumerate(teich_digits(ctx, a)):
            m = i + n * jj
            if m <= M:
                eb[m] = tuple(int(v) for v in alpha.c)
    return eb


def _fixed_to_defring(sol_alg, V: np.ndarray, E: DefRing) -> DefRingElt:
    """Convert a fixed-point (U, n) array to E_0/m^j (integrality checked)."""
    p, j, n = E.p, E.j, E.n
    c = E.zeros()
    for beta, idx in E.mon_index.items():
        b = sum(beta)
        for e in range(n):
            v = V[b, e]
            if v % sol_alg.S:
                raise IntegralityFailure("solver produced a non-integral coordinate")
            c[idx * n + e] = int(sol_alg.to_int(v, p ** (j - b)))
    return DefRingElt(E, c)


def lift_series(g_series: USeries, E: DefRing, rng: _random.Random | None = None) -> USeries:
    """Lift a series over F_{p^n} to E_0/m^j: Teichmüller lift of each coefficient,
    plus (if ``rng`` is given) a random element of m on every coefficient."""
    N = g_series.N
    c = E.from_residue(g_series.c)
    if rng is not None:
        nprng = np.random.default_rng(rng.randrange(2**32))
        noise = E.random(nprng, N + 1)
        noise[..., : E.n] = (noise[..., : E.n] // E.p) * E.p  # constant Witt part in pW
        noise[0] = 0
        c = c + noise
    return USeries(E, N, c)


def lt_action(g: StabElt, j: int = 3, N: int | None = None, lift_seed: int | None = None,
              check: bool = True) -> LTResult:
    """φ_g, ψ_g, f and t_i(g) over E_0/m^j, verified through degree N.

    ``lift_seed`` selects a random (non-Teichmüller) lift h of the series of g;
    φ and ψ do not depend on it, and the post-checks are run against that lift.
    """
    if lift_seed is None:
        return _lt_cached(g, j, N if N is not None else default_degree(g.ctx.p, g.ctx.n), check)
    return _lt_compute(g, j, N if N is not None else default_degree(g.ctx.p, g.ctx.n), lift_seed, check)


@lru_cache(maxsize=4096)
def _lt_cached(g: StabElt, j: int, N: int, check: bool) -> LTResult:
    return _lt_compute(g, j, N, None, check)


def working_order(p: int, n: int, j: int, N: int) -> tuple[int, int]:
    """(imax, J): coordinates t_0..t_imax are reported, the solver runs to order J."""
    m_N = 0
    while p ** (m_N + 1) <= N:
        m_N += 1
    imax = max(m_N, n)
    J = j + -(-imax // n)
    return imax, J


def _lt_compute(g: StabElt, j: int, N: int, lift_seed: int | None, check: bool) -> LTResult:
    ctx = g.ctx
    p, n = ctx.p, ctx.n
    if not g.is_unit():
        raise NotAUnit("the Lubin-Tate action is defined for units")
    if n > 2:
        raise ConfigError("the Lubin-Tate solver supports n ≤ 2")
    if j < 2:
        raise ConfigError("the m-adic truncation j must be at least 2")
    if p == 2:
        raise PrimeTwoUnsupported("the Lubin-Tate solver is implemented for odd primes")
    imax, J = working_order(p, n, j, N)
    solver = _solver(p, n, ctx.modulus, J, imax)
    eb = _residue_digits(g, solver.M)
    W = WittCtx(p, n, solver.alg.K, ctx.modulus)
    base = [teichmuller(W, W.field(list(eb[i]))).c for i in range(n)]
    sol = solver.solve(eb, base)

    E = DefRing(p, n, j, ctx.modulus)
    ts = [_fixed_to_defring(sol.alg, sol.t[m], E) for m in range(imax + 1)]
    phi = {}
    if n == 2:
        phi["u1"] = _fixed_to_defring(sol.alg, sol.phi_u, E)

    G = universal_deformation_fgl(p, n, j, N)
    x = USeries.x(E, N)
    terms = [USeries.monomial(E, N, p**i, ts[i].c) for i in range(imax + 1) if p**i <= N]
    psi = formal_sum(G, terms)

    g_series = stab_to_series(g, N, check=check)
    h = lift_series(g_series, E, None if lift_seed is None else _random.Random(lift_seed))
    if np.any(E.residue(psi.c) != E.residue(h.c)):
        raise PostCheckFailure("ψ is not congruent to the lift of g modulo m")
    f = compose(revert(h), psi)
    if np.any(E.residue(f.c) != E.residue(x.c)):
        raise PostCheckFailure("f = h^{-1}∘ψ is not congruent to x modulo m")

    residual = {"m_order": j, "x_degree": N, "verified": False}
    if check:
        Gh = conjugate_fgl(h, G)
        images = [phi[f"u{i}"].c for i in range(1, n)]
        phiG = G.F.map_coeffs(lambda c: E.substitute(c, images), E)
        lhs = substitute_separate(Gh.F, f, f)
        rhs = compose_outer(f, phiG)
        if lhs != rhs:
            bad = [(i, k) for i, k in (lhs - rhs).support()]
            raise PostCheckFailure(f"defect G_h(f,f) − f(φ_*G) is nonzero in degrees {bad[:5]}")
        ext = extract_t(psi, G, imax=max(i for i in range(imax + 1) if p**i <= N))
        for i, t in enumerate(ext):
            if t != ts[i]:
                raise PostCheckFailure(f"extracted t_{i} differs from the solver value")
        residual["verified"] = True
    return LTResult(
        g=g,
        phi=phi,
        f=f,
        psi=psi,
        t=ts,
        residual=residual,
        effective_degree=faithful_degree(ctx, N),
        working_order=J,
        lift="teichmuller" if lift_seed is None else f"random(seed={lift_seed})",
    )


@lru_cache(maxsize=64)
def _solver(p: int, n: int, modulus: tuple[int, ...], J: int, imax: int) -> CoordinateSolver:
    return CoordinateSolver(p, n, modulus, J, M=imax)


def act_on(result: LTResult, x: DefRingElt) -> DefRingElt:
    """φ_g(x): substitute u_i ↦ φ_g(u_i), keeping W-coefficients fixed."""
    E = x.ring
    n = E.n
    if n == 1:
        return x
    images = []
    for i in range(1, n):
        im = result.phi[f"u{i}"]
        if im.ring != E:
            im = im.reduce_order(E.j) if im.ring.j > E.j else im
        images.append(im.c)
    return DefRingElt(E, E.substitute(x.c, images))


def crossed_check(g: StabElt, h: StabElt, j: int = 3, N: int | None = None) -> dict:
    """Compare t_0(gh) with φ_g(t_0(h))·t_0(g); also report φ_{gh} = φ_g∘φ_h on u_i."""
    rg = lt_action(g, j, N)
    rh = lt_action(h, j, N)
    rgh = lt_action(stab_mul(g, h), j, N)
    lhs = rgh.t0
    rhs = act_on(rg, rh.t0) * rg.t0
    functorial = all(rgh.phi[k] == act_on(rg, rh.phi[k]) for k in rgh.phi)
    return {
        "holds": lhs == rhs,
        "functorial": functorial,
        "lhs": str(lhs),
        "rhs": str(rhs),
    }


def t0_residue_matches(result: LTResult) -> bool:
    """t_0(g) ≡ g'(0) mod m."""
    g = result.g
    return result.t0.residue() == g.coeffs[0].reduce()


__all__ = [
    "DefRingElt",
    "LTResult",
    "act_on",
    "crossed_check",
    "default_degree",
    "exp_p",
    "extract_t",
    "formal_inverse",
    "lift_series",
    "log_unit",
    "lt_action",
    "t0_residue_matches",
    "working_order",
    "zn_pow",
]
