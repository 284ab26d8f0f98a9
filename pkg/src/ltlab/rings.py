"""Vectorised coefficient rings used by the series kernel.

A ring element is a length-``dim`` vector of integers (or exact rationals for
the characteristic-zero rings); arrays of elements carry the ring dimension as
their last axis, so series coefficients, matrices of ring elements etc. are
plain numpy arrays.  Multiplication is a bilinear map given by a structure
tensor, followed by component-wise reduction.

Rings provided:

* :class:`IntModRing`   Z/m
* :class:`RationalRing` Q (exact, ``Fraction`` entries)
* :class:`GaloisRing`   W(F_{p^n})/p^k = Z/p^k[t]/(f)  (k = 1 gives F_{p^n})
* :class:`DefRing`      E_0/m^j = W[[u_1..u_{n-1}]]/m^j
* :class:`RationalPolyRing` Q[u_1..u_{n-1}]/(u-degree >= j), exact
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from .base import FieldCtx, WittCtx, WittElt, _GRElt, teichmuller
from .errors import IntegralityFailure, NotAUnit

_INT64_SAFE = 2**62


class CoeffRing:
    """Base class: subclasses set ``dim``, ``table`` (dim*dim, dim), ``moduli``."""

    dim: int
    moduli: np.ndarray | None
    table: np.ndarray
    dtype: type | str
    name: str = "ring"

    key: tuple = ()

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, CoeffRing) and self.key == other.key)

    def __hash__(self) -> int:
        return hash(self.key)

    def random(self, rng: np.random.Generator, *lead: int) -> np.ndarray:
        """Uniformly random element(s); small integers for the exact rings."""
        out = self.zeros(*lead)
        shape = lead if lead else ()
        if self.moduli is None:
            vals = rng.integers(-5, 6, size=shape)
            out[..., 0] = np.vectorize(Fraction, otypes=[object])(vals) if self.dtype is object else vals
            return out
        for i, m in enumerate(self.moduli):
            vals = rng.integers(0, min(int(m), 2**62), size=shape)
            out[..., i] = vals.astype(object) if self.dtype is object else vals
        return out

    def _finish(self, table: np.ndarray, moduli: Sequence[int] | None):
        self.moduli = None if moduli is None else np.array(moduli, dtype=object)
        if moduli is None:
            self.dtype = object
            self.table = np.array(table, dtype=object)
            self._mx = None
        else:
            mx = max(moduli)
            table = np.array(table, dtype=object) % mx
            bound = self.dim * self.dim * mx * max(1, int(table.max()) if table.size else 1)
            self.dtype = np.int64 if bound < _INT64_SAFE and mx * mx < _INT64_SAFE else object
            self.table = table.astype(self.dtype)
            self.moduli = np.array(moduli, dtype=self.dtype)
            self._mx = mx

    # -- construction -----------------------------------------------------
    def zeros(self, *lead: int) -> np.ndarray:
        z = np.zeros((*lead, self.dim), dtype=self.dtype)
        if self.dtype is object:
            z[...] = 0
        return z

    def one(self) -> np.ndarray:
        e = self.zeros()
        e[0] = 1
        return e

    def from_int(self, a: int) -> np.ndarray:
        e = self.zeros()
        e[0] = a
        return self.reduce(e)

    # -- arithmetic ---------------------------------------------------------
    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.moduli is None:
            return a
        return a % self.moduli

    def add(self, a, b):
        return self.reduce(a + b)

    def sub(self, a, b):
        return self.reduce(a - b)

    def neg(self, a):
        return self.reduce(-a)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        outer = a[..., :, None] * b[..., None, :]
        if self._mx is not None:
            outer %= self._mx
        lead = outer.shape[:-2]
        res = outer.reshape(*lead, self.dim * self.dim) @ self.table
        return self.reduce(res)

    def scale_int(self, a: np.ndarray, c: int) -> np.ndarray:
        return self.reduce(a * c)

    def pow(self, a: np.ndarray, e: int) -> np.ndarray:
        if e < 0:
            return self.pow(self.inv(a), -e)
        r = self.one()
        base = a
        while e:
            if e & 1:
                r = self.mul(r, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return r

    def is_zero(self, a: np.ndarray) -> bool:
        return not np.any(self.reduce(a) != 0)

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    # -- units ------------------------------------------------------------------
    def residue_inverse(self, a: np.ndarray) -> np.ndarray:
        """An element x with a*x ≡ 1 modulo the nilpotent/maximal part."""
        raise NotImplementedError

    def is_unit(self, a: np.ndarray) -> bool:
        raise NotImplementedError

    def inv(self, a: np.ndarray, max_iter: int = 64) -> np.ndarray:
        if not self.is_unit(a):
            raise NotAUnit("element is not a unit")
        x = self.residue_inverse(a)
        two = self.from_int(2)
        for _ in range(max_iter):
            if self.eq(self.mul(a, x), self.one()):
                return x
            x = self.mul(x, self.sub(two, self.mul(a, x)))
        raise AssertionError("Newton inversion did not converge")

    def fmt(self, a: np.ndarray) -> str:
        return str(list(a))


class IntModRing(CoeffRing):
    def __init__(self, m: int):
        self.m = m
        self.key = ("Z/m", m)
        self.dim = 1
        self.name = f"Z/{m}"
        self._finish([[1]], [m])

    def is_unit(self, a):
        from math import gcd

        return gcd(int(a[0]), self.m) == 1

    def residue_inverse(self, a):
        return self.from_int(pow(int(a[0]), -1, self.m))

    def fmt(self, a):
        return str(int(a[0]))


class RationalRing(CoeffRing):
    def __init__(self):
        self.dim = 1
        self.key = ("Q",)
        self.name = "Q"
        self._finish([[1]], None)

    def is_unit(self, a):
        return a[0] != 0

    def residue_inverse(self, a):
        return np.array([Fraction(1) / a[0]], dtype=object)

    def fmt(self, a):
        return str(a[0])


def _galois_table(n: int, f: Sequence[int], m: int | None) -> list[list[int]]:
    """Structure constants of Z[t]/(f) (optionally reduced mod m) on the basis t^e."""
    powers = []
    cur = [1] + [0] * (n - 1)
    for _ in range(2 * n - 1):
        powers.append(cur)
        # multiply by t
        nxt = [0] + cur[:-1]
        top = cur[-1]
        if n == 1:
            nxt = [0]
        nxt = [x - top * f[i] for i, x in enumerate(nxt)]
        if m is not None:
            nxt = [x % m for x in nxt]
        cur = nxt
    table = []
    for i in range(n):
        for j in range(n):
            table.append(powers[i + j])
    return table


class GaloisRing(CoeffRing):
    """W/p^k = Z/p^k[t]/(f); with k = 1 this is the field F_{p^n}."""

    def __init__(self, ctx: WittCtx | FieldCtx):
        self.ctx = ctx
        self.p, self.n, self.k = ctx.p, ctx.n, ctx.k
        self.key = ("GR", ctx.p, ctx.n, ctx.k, tuple(ctx.modulus))
        self.dim = ctx.n
        self.name = f"GF({ctx.p}^{ctx.n})" if ctx.k == 1 else f"W({ctx.p},{ctx.n})/p^{ctx.k}"
        m = ctx.p**ctx.k
        self._finish(_galois_table(ctx.n, ctx.modulus, m), [m] * ctx.n)

    @property
    def is_field(self) -> bool:
        return self.k == 1

    def elt(self, x) -> np.ndarray:
        if isinstance(x, _GRElt):
            return self.reduce(np.array(x.c, dtype=self.dtype))
        return self.elt(self.ctx(x))

    def to_ctx(self, a: np.ndarray):
        return self.ctx([int(v) for v in a])

    def is_unit(self, a):
        return any(int(v) % self.p for v in a)

    def residue_inverse(self, a):
        return self.elt(self.to_ctx(a).inverse())

    def fmt(self, a):
        return str(self.to_ctx(a))

    def frobenius_matrix(self) -> np.ndarray:
        """(n, n) integer matrix M with φ(a) = a @ M (rows: images of t^e)."""
        if self.k == 1:
            cols = []
            cur = self.ctx.one()
            tp = self.ctx.gen() ** self.p
            for _ in range(self.n):
                cols.append(cur.c)
                cur = cur * tp
            return np.array(cols, dtype=self.dtype)
        return np.array(self.ctx.frobenius_matrix, dtype=self.dtype)


def _monomials(nvars: int, j: int) -> list[tuple[int, ...]]:
    mons = [b for b in product(range(j), repeat=nvars) if sum(b) < j]
    mons.sort(key=lambda b: (sum(b), tuple(-x for x in b)))
    return mons


class _MonomialMixin:
    nvars: int
    j: int

    @cached_property
    def monomials(self) -> list[tuple[int, ...]]:
        return _monomials(self.nvars, self.j)

    @cached_property
    def mon_index(self) -> dict[tuple[int, ...], int]:
        return {b: i for i, b in enumerate(self.monomials)}

    def _mon_table(self) -> list[list[int]]:
        nm = len(self.monomials)
        table = []
        for b1 in self.monomials:
            for b2 in self.monomials:
                row = [0] * nm
                s = tuple(x + y for x, y in zip(b1, b2))
                if s in self.mon_index:
                    row[self.mon_index[s]] = 1
                table.append(row)
        return table


class DefRing(_MonomialMixin, CoeffRing):
    """E_0/m^j: polynomials in u_1..u_{n-1}; the coefficient of u^β lives in W/p^{j-|β|}.

    Components are indexed by (monomial β, basis power t^e), flattened as
    ``β_index * n + e``.
    """

    def __init__(self, p: int, n: int, j: int, modulus: Sequence[int] = ()):
        if j < 1:
            raise ValueError("j must be >= 1")
        self.p, self.n, self.j = p, n, j
        self.nvars = n - 1
        self.wctx = WittCtx(p, n, j, modulus)
        self.key = ("E0", p, n, j, tuple(self.wctx.modulus))
        self.name = f"E0({p},{n})/m^{j}"
        nm = len(self.monomials)
        self.dim = nm * n
        gt = _galois_table(n, self.wctx.modulus, p**j)
        mt = self._mon_table()
        table = []
        for b1 in range(nm):
            for e1 in range(n):
                for b2 in range(nm):
                    for e2 in range(n):
                        row = [0] * self.dim
                        mrow = mt[b1 * nm + b2]
                        if any(mrow):
                            b = mrow.index(1)
                            for e, c in enumerate(gt[e1 * n + e2]):
                                row[b * n + e] = c
                        table.append(row)
        # reorder rows to (b1,e1)x(b2,e2) flattened order
        moduli = [p ** (j - sum(b)) for b in self.monomials for _ in range(n)]
        self._finish(table, moduli)

    @cached_property
    def witt_ring(self) -> GaloisRing:
        return GaloisRing(self.wctx)

    @cached_property
    def residue_field(self) -> GaloisRing:
        return GaloisRing(self.wctx.field)

    def u(self, i: int = 1) -> np.ndarray:
        """The generator u_i (1-based)."""
        e = self.zeros()
        if self.j == 1:
            return e
        b = tuple(int(k == i - 1) for k in range(self.nvars))
        e[self.mon_index[b] * self.n] = 1
        return e

    def p_elt(self) -> np.ndarray:
        return self.from_int(self.p)

    def const(self, w) -> np.ndarray:
        """Embed a Witt element (or int) as a constant."""
        e = self.zeros()
        if isinstance(w, int):
            e[0] = w
        else:
            e[: self.n] = [int(v) for v in w.c]
        return self.reduce(e)

    def coeff(self, a: np.ndarray, beta: tuple[int, ...]) -> WittElt:
        i = self.mon_index[beta]
        ctx = self.wctx.with_precision(self.j - sum(beta))
        return ctx([int(v) for v in a[i * self.n : (i + 1) * self.n]])

    def coeff_array(self, a: np.ndarray, beta: tuple[int, ...]) -> np.ndarray:
        i = self.mon_index[beta]
        return a[..., i * self.n : (i + 1) * self.n]

    def constant_part(self, a: np.ndarray) -> np.ndarray:
        return a[..., : self.n]

    def residue(self, a: np.ndarray) -> np.ndarray:
        """Image in E_0/m = F_{p^n} (array with last axis n)."""
        return self.constant_part(a) % self.p

    def from_residue(self, x: np.ndarray, teich: bool = True) -> np.ndarray:
        """Lift residue-field coefficients (last axis n); Teichmüller lift by default."""
        x = np.asarray(x)
        out = self.zeros(*x.shape[:-1])
        flat_in = x.reshape(-1, self.n)
        flat_out = out.reshape(-1, self.dim)
        fctx = self.wctx.field
        for idx, row in enumerate(flat_in):
            vals = [int(v) % self.p for v in row]
            if teich:
                w = teichmuller(self.wctx, fctx(vals))
                flat_out[idx, : self.n] = [int(v) for v in w.c]
            else:
                flat_out[idx, : self.n] = vals
        return out

    def is_unit(self, a):
        return any(int(v) % self.p for v in a[: self.n])

    def residue_inverse(self, a):
        w = self.wctx([int(v) for v in a[: self.n]])
        return self.const(w.inverse())

    def in_max_ideal(self, a: np.ndarray) -> bool:
        return not np.any(self.residue(a) != 0)

    def mod_p(self, a: np.ndarray) -> np.ndarray:
        """Reduce every coefficient modulo p (image in E_0/(p, m^j))."""
        return a % self.p

    def substitute(self, a: np.ndarray, images: Sequence[np.ndarray]) -> np.ndarray:
        """W-algebra map u_i ↦ images[i] applied to (an array of) elements."""
        if self.nvars == 0:
            return a
        powers = {}
        for beta in self.monomials:
            v = self.one()
            for i, e in enumerate(beta):
                if e:
                    v = self.mul(v, self.pow(images[i], e))
            powers[beta] = v
        out = self.zeros(*a.shape[:-1])
        for idx, beta in enumerate(self.monomials):
            c = self.zeros(*a.shape[:-1])
            c[..., : self.n] = a[..., idx * self.n : (idx + 1) * self.n]
            out = out + self.mul(c, powers[beta])
        return self.reduce(out)

    def fmt(self, a: np.ndarray) -> str:
        terms = []
        for idx, beta in enumerate(self.monomials):
            w = self.coeff(a, beta)
            if w.is_zero():
                continue
            mon = "*".join(
                (f"u{i + 1}" if e == 1 else f"u{i + 1}^{e}") for i, e in enumerate(beta) if e
            )
            cs = str(w)
            if not mon:
                terms.append(cs)
            elif cs == "1":
                terms.append(mon)
            else:
                terms.append(f"({cs})*{mon}" if "+" in cs else f"{cs}*{mon}")
        return " + ".join(terms) if terms else "0"


class RationalPolyRing(_MonomialMixin, CoeffRing):
    """Q[u_1..u_{nvars}] truncated at total degree j (exact)."""

    def __init__(self, nvars: int, j: int):
        self.nvars, self.j = nvars, j
        self.key = ("Qu", nvars, j)
        self.dim = len(self.monomials)
        self.name = f"Q[u]/deg>={j}"
        self._finish(self._mon_table(), None)
        self.table = self.table.astype(object)

    def zeros(self, *lead):
        z = np.empty((*lead, self.dim), dtype=object)
        z[...] = Fraction(0)
        return z

    def u(self, i: int = 1) -> np.ndarray:
        e = self.zeros()
        if self.j > 1:
            b = tuple(int(k == i - 1) for k in range(self.nvars))
            e[self.mon_index[b]] = Fraction(1)
        return e

    def is_unit(self, a):
        return a[0] != 0

    def residue_inverse(self, a):
        return self.from_int(1) * (Fraction(1) / a[0])

    def to_defring(self, a: np.ndarray, target: DefRing) -> np.ndarray:
        """Map p-integral rational coefficients into E_0/m^j (integrality checked)."""
        if target.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        p = target.p
        flat = a.reshape(-1, self.dim)
        out = target.zeros(flat.shape[0])
        for r, row in enumerate(flat):
            for idx, beta in enumerate(self.monomials):
                if beta not in target.mon_index:
                    continue
                c = Fraction(row[idx])
                if c.denominator % p == 0:
                    raise IntegralityFailure(f"coefficient {c} is not p-integral")
                mod = p ** (target.j - sum(beta))
                out[r, target.mon_index[beta] * target.n] = c.numerator * pow(c.denominator, -1, mod) % mod
        return out.reshape(*a.shape[:-1], target.dim)

    def fmt(self, a):
        terms = []
        for idx, beta in enumerate(self.monomials):
            if a[idx] != 0:
                mon = "*".join(f"u{i + 1}^{e}" for i, e in enumerate(beta) if e)
                terms.append(f"{a[idx]}" + (f"*{mon}" if mon else ""))
        return " + ".join(terms) if terms else "0"


def rational_to_ring(a: np.ndarray, target: CoeffRing, p: int) -> np.ndarray:
    """Map a Q-valued array (last axis 1) into Z/p^k-type rings (p-integrality checked)."""
    flat = a.reshape(-1)
    out = target.zeros(flat.shape[0])
    mx = target._mx
    for i, c in enumerate(flat):
        c = Fraction(c)
        if c.denominator % p == 0:
            raise IntegralityFailure(f"coefficient {c} is not p-integral")
        out[i, 0] = c.numerator * pow(c.denominator, -1, mx) % mx
    return target.reduce(out.reshape(*a.shape[:-1], target.dim))


def ring_from_key(key: tuple) -> CoeffRing:
    """Rebuild a ring from its ``key`` (used by JSON fixtures)."""
    kind = key[0]
    if kind == "Z/m":
        return IntModRing(int(key[1]))
    if kind == "Q":
        return RationalRing()
    if kind == "GR":
        p, n, k, mod = int(key[1]), int(key[2]), int(key[3]), tuple(key[4])
        return GaloisRing(FieldCtx(p, n, mod) if k == 1 else WittCtx(p, n, k, mod))
    if kind == "E0":
        return DefRing(int(key[1]), int(key[2]), int(key[3]), tuple(key[4]))
    if kind == "Qu":
        return RationalPolyRing(int(key[1]), int(key[2]))
    raise ValueError(f"unknown ring key {key!r}")
