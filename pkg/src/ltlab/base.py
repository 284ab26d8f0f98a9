"""Finite fields, truncated Witt rings, Teichmüller structure, Z_n and Galois descent.

``W/p^k`` is modelled as ``Z/p^k[t]/(f)`` where ``f`` is the Conway polynomial
``C(p, n)`` read from ``data/moduli.tsv`` (its integer coefficients are used
verbatim as the lift).  ``F_{p^n}`` is the case ``k = 1``.
"""

from __future__ import annotations

import math
import random as _random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from itertools import product
from typing import Iterable, Sequence

from .errors import ContextMismatch, NotAUnit, NotSemilinear, PrecisionExceeded
from .parse import parse_poly_text

__all__ = [
    "is_prime", "load_moduli", "conway_polynomial", "FieldCtx", "FieldElt", "WittCtx",
    "WittElt", "teichmuller", "witt_frobenius", "teich_digits", "ZnElt", "zn_canonical",
    "zn_reduce", "TwistedGalModule", "DescentReport", "galois_descent_check", "kernel_mod_pk",
    "random_invertible_matrix", "witt_det",
]


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


# ---------------------------------------------------------------------------
# polynomial helpers over Z/m (coefficient lists, constant term first)


def _polymulmod(a: Sequence[int], b: Sequence[int], f: Sequence[int], m: int) -> list[int]:
    n = len(f) - 1
    r = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                r[i + j] += x * y
    for d in range(len(r) - 1, n - 1, -1):
        c = r[d] % m
        if c:
            for i in range(n + 1):
                r[d - n + i] -= c * f[i]
    out = [x % m for x in r[:n]]
    return out + [0] * (n - len(out))


def _polypowmod(a: Sequence[int], e: int, f: Sequence[int], m: int) -> list[int]:
    n = len(f) - 1
    r = [1 % m] + [0] * (n - 1)
    base = list(a)
    while e:
        if e & 1:
            r = _polymulmod(r, base, f, m)
        e >>= 1
        if e:
            base = _polymulmod(base, base, f, m)
    return r


def _factor(m: int) -> set[int]:
    fs, d = set(), 2
    while d * d <= m:
        while m % d == 0:
            fs.add(d)
            m //= d
        d += 1
    if m > 1:
        fs.add(m)
    return fs


def _poly_gcd_is_one(a: list[int], b: list[int], p: int) -> bool:
    def trim(c):
        c = [x % p for x in c]
        while c and c[-1] == 0:
            c.pop()
        return c

    a, b = trim(a), trim(b)
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b) and a:
            c = a[-1] * inv % p
            shift = len(a) - len(b)
            for i, y in enumerate(b):
                a[shift + i] = (a[shift + i] - c * y) % p
            a = trim(a)
        a, b = b, a
    return len(a) == 1


@lru_cache(maxsize=None)
def _is_irreducible(f: tuple[int, ...], p: int) -> bool:
    """Rabin's test for a monic polynomial over F_p."""
    n = len(f) - 1
    if n == 1:
        return True
    x = [0, 1] + [0] * (n - 2)
    if _polypowmod(x, p**n, f, p) != x:
        return False
    for q in _factor(n):
        y = _polypowmod(x, p ** (n // q), f, p)
        y = [(c - (1 if i == 1 else 0)) % p for i, c in enumerate(y)]
        if not _poly_gcd_is_one(list(f), y, p):
            return False
    return True


def _is_primitive(f: Sequence[int], p: int) -> bool:
    n = len(f) - 1
    order = p**n - 1
    x = [0, 1] + [0] * (n - 2) if n > 1 else [(-f[0]) % p]
    one = [1] + [0] * (n - 1)
    if _polypowmod(x, order, f, p) != one:
        return False
    return all(_polypowmod(x, order // q, f, p) != one for q in _factor(order))


@lru_cache(maxsize=None)
def conway_polynomial(p: int, n: int) -> tuple[int, ...]:
    """Conway polynomial C(p, n) by direct search (fine for the small cases used here).

    Candidates ``x^n - a_{n-1}x^{n-1} + a_{n-2}x^{n-2} - ...`` are scanned in
    lexicographic order of ``(a_{n-1}, ..., a_0)``; the first primitive one
    compatible with every ``C(p, d)``, ``d | n``, ``d < n`` is returned.
    """
    for a in product(range(p), repeat=n):
        f = [0] * (n + 1)
        f[n] = 1
        for idx, ai in enumerate(a):
            deg = n - 1 - idx
            f[deg] = ((-1) ** (n - deg) * ai) % p
        if f[0] == 0 or not _is_primitive(f, p):
            continue
        ok = True
        for d in range(1, n):
            if n % d:
                continue
            g = conway_polynomial(p, d)
            x = [0, 1] + [0] * (n - 2)
            y = _polypowmod(x, (p**n - 1) // (p**d - 1), f, p)
            # y must be a root of g
            acc = [0] * n
            pw = [1] + [0] * (n - 1)
            for c in g:
                acc = [(s + c * t) % p for s, t in zip(acc, pw)]
                pw = _polymulmod(pw, y, f, p)
            if any(acc):
                ok = False
                break
        if ok:
            return tuple(f)
    raise ValueError(f"no Conway polynomial found for ({p}, {n})")


@lru_cache(maxsize=1)
def load_moduli() -> dict[tuple[int, int], tuple[int, ...]]:
    """Read the shipped ``moduli.tsv`` table: {(p, n): coefficients, constant first}."""
    text = resources.files("ltlab").joinpath("data/moduli.tsv").read_text()
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#") or line.startswith("p\t"):
            continue
        p, n, coeffs = line.split("\t")
        table[int(p), int(n)] = tuple(int(c) for c in coeffs.split(","))
    return table


def _default_modulus(p: int, n: int) -> tuple[int, ...]:
    return load_moduli().get((p, n)) or conway_polynomial(p, n)


# ---------------------------------------------------------------------------
# Galois rings Z/p^k[t]/(f)


@dataclass(frozen=True)
class _GRCtx:
    p: int
    n: int
    k: int
    modulus: tuple[int, ...] = field(default=(), compare=True)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be positive")
        if not self.modulus:
            object.__setattr__(self, "modulus", _default_modulus(self.p, self.n))
        f = tuple(int(c) for c in self.modulus)
        if len(f) != self.n + 1 or f[-1] % self.p != 1:
            raise ValueError("modulus must be monic of degree n")
        object.__setattr__(self, "modulus", f)
        if not _is_irreducible(tuple(c % self.p for c in f), self.p):
            raise ValueError(f"modulus {f} is not irreducible mod {self.p}")

    @property
    def mod(self) -> int:
        return self.p**self.k

    @property
    def order_units_residue(self) -> int:
        return self.p**self.n - 1

    def _elt(self, coeffs):
        raise NotImplementedError

    def __call__(self, value=0):
        """Coerce an int, a coefficient sequence, a dict {exponent: coeff} or text."""
        if isinstance(value, _GRElt):
            if value.ctx.p != self.p or value.ctx.n != self.n or value.ctx.modulus != self.modulus:
                raise ContextMismatch("element belongs to another ring")
            return self._elt(value.c)
        if isinstance(value, str):
            value = parse_poly_text(value)
        if isinstance(value, dict):
            c = [0] * self.n
            for e, a in value.items():
                mono = self._t_power(e)
                c = [x + a * y for x, y in zip(c, mono)]
            return self._elt(c)
        if isinstance(value, int):
            return self._elt([value] + [0] * (self.n - 1))
        c = list(value)
        if len(c) > self.n:
            raise ValueError("too many coefficients")
        return self._elt(c + [0] * (self.n - len(c)))

    def _t_power(self, e: int) -> list[int]:
        x = [0, 1] + [0] * (self.n - 2) if self.n > 1 else [(-self.modulus[0]) % self.mod]
        return _polypowmod(x, e, self.modulus, self.mod)

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def gen(self):
        """The class of ``t``."""
        return self._elt(self._t_power(1))

    def elements(self):
        """Iterate all elements (only sensible for tiny rings)."""
        for c in product(range(self.mod), repeat=self.n):
            yield self._elt(list(c))

    def random(self, rng: _random.Random):
        return self._elt([rng.randrange(self.mod) for _ in range(self.n)])


class _GRElt:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx: _GRCtx, coeffs):
        m = ctx.mod
        self.ctx = ctx
        self.c = tuple(int(x) % m for x in coeffs)

    def _check(self, other):
        if isinstance(other, int):
            return self.ctx(other)
        if not isinstance(other, _GRElt) or other.ctx != self.ctx:
            raise ContextMismatch(f"cannot combine {self.ctx} with {getattr(other, 'ctx', other)}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return self.ctx._elt([a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return self.ctx._elt([a - b for a, b in zip(self.c, other.c)])

    def __rsub__(self, other):
        return self._check(other) - self

    def __neg__(self):
        return self.ctx._elt([-a for a in self.c])

    def __mul__(self, other):
        if isinstance(other, int):
            return self.ctx._elt([a * other for a in self.c])
        other = self._check(other)
        return self.ctx._elt(_polymulmod(self.c, other.c, self.ctx.modulus, self.ctx.mod))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self.ctx._elt(_polypowmod(self.c, e, self.ctx.modulus, self.ctx.mod))

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx(other)
        return isinstance(other, _GRElt) and other.ctx == self.ctx and other.c == self.c

    def __hash__(self):
        return hash((self.ctx, self.c))

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_unit(self) -> bool:
        return any(x % self.ctx.p for x in self.c)

    def residue_coeffs(self) -> tuple[int, ...]:
        return tuple(x % self.ctx.p for x in self.c)

    def inverse(self):
        if not self.is_unit():
            raise NotAUnit(f"{self} is not invertible")
        p, n = self.ctx.p, self.ctx.n
        # inverse in the residue field, then Newton/Hensel lifting
        x0 = _polypowmod(self.residue_coeffs(), p**n - 2, self.ctx.modulus, p)
        x = self.ctx._elt(x0)
        prec = 1
        while prec < self.ctx.k:
            x = x * (2 - self * x)
            prec *= 2
        return x

    def valuation(self) -> int:
        """p-adic valuation (``k`` for zero)."""
        if self.is_zero():
            return self.ctx.k
        v = 0
        while all(x % self.ctx.p ** (v + 1) == 0 for x in self.c):
            v += 1
        return v

    def __str__(self) -> str:
        terms = []
        for e, a in enumerate(self.c):
            if a == 0:
                continue
            if e == 0:
                terms.append(str(a))
            elif e == 1:
                terms.append("t" if a == 1 else f"{a}*t")
            else:
                terms.append(f"t^{e}" if a == 1 else f"{a}*t^{e}")
        return "+".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self}; p={self.ctx.p}, n={self.ctx.n}, k={self.ctx.k})"


@dataclass(frozen=True)
class FieldCtx(_GRCtx):
    """The finite field F_{p^n} = F_p[t]/(f)."""


    def __init__(self, p: int, n: int, modulus: Sequence[int] = ()):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", 1)
        object.__setattr__(self, "modulus", tuple(modulus))
        self.__post_init__()

    def _elt(self, coeffs):
        return FieldElt(self, coeffs)

    def __repr__(self):
        return f"FieldCtx(p={self.p}, n={self.n})"

    def multiplicative_generator(self) -> "FieldElt":
        """The class of ``t`` is a generator since the modulus is primitive."""
        g = self.gen()
        if _is_primitive(self.modulus, self.p):
            return g
        for x in self.elements():
            if not x.is_zero() and all(x ** ((self.p**self.n - 1) // q) != 1 for q in _factor(self.p**self.n - 1)):
                return x
        raise AssertionError("unreachable")


class FieldElt(_GRElt):
    __slots__ = ()

    def frobenius(self) -> "FieldElt":
        return self ** self.ctx.p


@dataclass(frozen=True)
class WittCtx(_GRCtx):
    """W(F_{p^n})/p^k = Z/p^k[t]/(f)."""

    def __init__(self, p: int, n: int, k: int, modulus: Sequence[int] = ()):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "modulus", tuple(modulus))
        self.__post_init__()

    def _elt(self, coeffs):
        return WittElt(self, coeffs)

    def __repr__(self):
        return f"WittCtx(p={self.p}, n={self.n}, k={self.k})"

    @cached_property
    def field(self) -> FieldCtx:
        return FieldCtx(self.p, self.n, tuple(c % self.p for c in self.modulus))

    def with_precision(self, k: int) -> "WittCtx":
        return WittCtx(self.p, self.n, k, self.modulus)

    def lift(self, x: FieldElt) -> "WittElt":
        """The naive lift (coefficients in [0, p))."""
        return self._elt(x.c)

    @cached_property
    def frobenius_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Columns are φ(t^e) for e < n, computed with the Teichmüller digit rule."""
        t = self.gen()
        phi_t = _frobenius_by_digits(self, t)
        cols, cur = [], self.one()
        for _ in range(self.n):
            cols.append(cur.c)
            cur = cur * phi_t
        return tuple(cols)


class WittElt(_GRElt):
    __slots__ = ()

    def reduce(self) -> FieldElt:
        return self.ctx.field._elt(self.residue_coeffs())

    def frobenius(self, times: int = 1) -> "WittElt":
        return witt_frobenius(self.ctx, self, times)

    def is_frobenius_fixed(self) -> bool:
        return self.frobenius() == self

    def in_zp(self) -> bool:
        """Lies in the image of Z/p^k (equivalently: Frobenius-fixed)."""
        return self.is_frobenius_fixed()

    def to_int(self) -> int:
        """Integer representative of a Frobenius-fixed element."""
        if not self.in_zp():
            raise ValueError(f"{self} does not lie in Z/p^k")
        # Z/p^k embeds as the constants
        return self.c[0]

    def reduce_precision(self, k: int) -> "WittElt":
        if k > self.ctx.k:
            raise PrecisionExceeded(f"cannot raise precision from {self.ctx.k} to {k}")
        return self.ctx.with_precision(k)._elt(self.c)


# ---------------------------------------------------------------------------
# Teichmüller lifts, digits, Frobenius


@lru_cache(maxsize=65536)
def _teich_coeffs(p: int, n: int, k: int, modulus: tuple[int, ...], x: tuple[int, ...]) -> tuple[int, ...]:
    m = p**k
    y = [c % m for c in x]
    q = p**n
    while True:
        z = _polypowmod(y, q, modulus, m)
        if z == y:
            return tuple(y)
        y = z


def teichmuller(ctx: WittCtx, x: FieldElt | WittElt) -> WittElt:
    """The Teichmüller lift: the stabilised limit of ``y -> y^{p^n}`` on a lift of x."""
    res = tuple(c % ctx.p for c in x.c)
    return WittElt(ctx, _teich_coeffs(ctx.p, ctx.n, ctx.k, ctx.modulus, res))


def teich_digits(ctx: WittCtx, a: WittElt) -> list[FieldElt]:
    """Digits α_j with a = Σ_{j<k} T(α_j) p^j."""
    a = ctx(a)
    digits = []
    cur = list(a.c)
    for _ in range(ctx.k):
        alpha = ctx.field._elt([c % ctx.p for c in cur])
        digits.append(alpha)
        t = teichmuller(ctx, alpha)
        cur = [(c - d) % ctx.mod // ctx.p for c, d in zip(cur, t.c)]
    return digits


def _frobenius_by_digits(ctx: WittCtx, a: WittElt) -> WittElt:
    out = ctx.zero()
    for j, alpha in enumerate(teich_digits(ctx, a)):
        out = out + teichmuller(ctx, alpha**ctx.p) * ctx.p**j
    return out


def witt_frobenius(ctx: WittCtx, a: WittElt, times: int = 1) -> WittElt:
    """The Frobenius lift φ.

    φ is Z_p-linear, so it is applied through the matrix whose columns are
    φ(t^e); that matrix is built from the digit rule Σ T(α_j)p^j ↦ Σ T(α_j^p)p^j.
    """
    a = ctx(a)
    times %= ctx.n
    cols = ctx.frobenius_matrix
    c = a.c
    m = ctx.mod
    for _ in range(times):
        c = tuple(sum(c[e] * cols[e][i] for e in range(ctx.n)) % m for i in range(ctx.n))
    return WittElt(ctx, c)


# ---------------------------------------------------------------------------
# the profinite ring Z_n = Z_p x Z/(p^n - 1)


@dataclass(frozen=True)
class ZnElt:
    """Element of Z_n, with the Z_p component known modulo p^K."""

    p: int
    n: int
    K: int
    zp: int
    res: int

    def __post_init__(self):
        object.__setattr__(self, "zp", self.zp % self.p**self.K)
        object.__setattr__(self, "res", self.res % (self.p**self.n - 1))

    @classmethod
    def from_int(cls, p: int, n: int, K: int, a: int) -> "ZnElt":
        return cls(p, n, K, a, a)

    def _check(self, other) -> "ZnElt":
        if isinstance(other, int):
            return ZnElt.from_int(self.p, self.n, self.K, other)
        if (other.p, other.n) != (self.p, self.n):
            raise ContextMismatch("Z_n elements for different (p, n)")
        if other.K != self.K:
            raise PrecisionExceeded(
                f"precision mismatch K={self.K} vs K={other.K}; lower one explicitly with with_precision"
            )
        return other

    def with_precision(self, K: int) -> "ZnElt":
        if K > self.K:
            raise PrecisionExceeded(f"cannot raise precision from {self.K} to {K}")
        return ZnElt(self.p, self.n, K, self.zp, self.res)

    def __add__(self, other):
        o = self._check(other)
        return ZnElt(self.p, self.n, self.K, self.zp + o.zp, self.res + o.res)

    __radd__ = __add__

    def __neg__(self):
        return ZnElt(self.p, self.n, self.K, -self.zp, -self.res)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        o = self._check(other)
        return ZnElt(self.p, self.n, self.K, self.zp * o.zp, self.res * o.res)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.zp == 0 and self.res == 0

    def additive_order(self) -> int:
        """Order in the finite quotient Z/p^K × Z/(p^n-1)."""
        m1 = self.p**self.K
        m2 = self.p**self.n - 1
        o1 = m1 // math.gcd(self.zp, m1)
        o2 = m2 // math.gcd(self.res, m2)
        return math.lcm(o1, o2)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "K": self.K, "zp": self.zp, "res": self.res}


def zn_canonical(p: int, n: int, K: int = 4) -> dict:
    """α = (0, 1), λ = α·r(n) = (0, r mod p^n-1) and r(n) = (p^n-1)/(p-1)."""
    r = (p**n - 1) // (p - 1)
    alpha = ZnElt(p, n, K, 0, 1)
    lam = ZnElt(p, n, K, 0, r)
    return {"alpha": alpha, "lambda": lam, "r": r}


def zn_reduce(a: ZnElt, k: int) -> int:
    """The residue of a modulo p^k(p^n - 1) (Chinese remainder theorem)."""
    if k > a.K:
        raise PrecisionExceeded(f"k={k} exceeds the working precision K={a.K}")
    if k < 0:
        raise ValueError("k must be non-negative")
    m1, m2 = a.p**k, a.p**a.n - 1
    x1, x2 = a.zp % m1, a.res
    # x = x2 + m2 * s with x ≡ x1 (mod m1)
    s = ((x1 - x2) * pow(m2, -1, m1)) % m1 if m1 > 1 else 0
    return (x2 + m2 * s) % (m1 * m2)


# ---------------------------------------------------------------------------
# twisted Galois modules and descent


def kernel_mod_pk(rows: Sequence[Sequence[int]], p: int, k: int):
    """Solution module of A x ≡ 0 (mod p^k) via Smith normal form.

    Returns ``(free_generators, torsion)``: column vectors spanning the free
    part and a list of ``(generator, exponent)`` for the cyclic torsion parts
    ``Z/p^exponent``.  Pivots are chosen by smallest valuation, then lowest
    (row, column) index.
    """
    m = p**k
    A = [[x % m for x in row] for row in rows]
    nrows = len(A)
    ncols = len(A[0]) if A else 0
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def val(x):
        if x % m == 0:
            return k
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    pivots = []
    r = 0
    while r < min(nrows, ncols):
        best = None
        for i in range(r, nrows):
            for j in range(r, ncols):
                v = val(A[i][j])
                if v < k and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        A[r], A[i] = A[i], A[r]
        for row in A:
            row[r], row[j] = row[j], row[r]
        for row in V:
            row[r], row[j] = row[j], row[r]
        unit = A[r][r] // p**v
        inv = pow(unit, -1, m)
        A[r] = [x * inv % m for x in A[r]]
        for i2 in range(nrows):
            if i2 != r and A[i2][r]:
                c = A[i2][r] // p**v
                A[i2] = [(x - c * y) % m for x, y in zip(A[i2], A[r])]
        for j2 in range(ncols):
            if j2 != r and A[r][j2]:
                c = A[r][j2] // p**v
                for row in A:
                    row[j2] = (row[j2] - c * row[r]) % m
                for row in V:
                    row[j2] = (row[j2] - c * row[r]) % m
        pivots.append(v)
        r += 1
    free = [[V[i][j] for i in range(ncols)] for j in range(len(pivots), ncols)]
    torsion = []
    for j, v in enumerate(pivots):
        if v > 0:
            torsion.append(([V[i][j] * p ** (k - v) % m for i in range(ncols)], v))
    return free, torsion


@dataclass(frozen=True)
class TwistedGalModule:
    """Free W/p^k-module of rank r with semilinear operator v ↦ F·φ(v)."""

    ctx: WittCtx
    matrix: tuple[tuple[WittElt, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @classmethod
    def standard(cls, ctx: WittCtx, rank: int) -> "TwistedGalModule":
        return cls(ctx, tuple(tuple(ctx(int(i == j)) for j in range(rank)) for i in range(rank)))

    def basis_change(self, C: Sequence[Sequence[WittElt]]) -> "TwistedGalModule":
        """The same module in the basis given by the columns of C: F' = C^{-1} F φ(C)."""
        Cinv = _mat_inverse(self.ctx, C)
        phiC = [[c.frobenius() for c in row] for row in C]
        F = _mat_mul(Cinv, _mat_mul(self.matrix, phiC))
        return TwistedGalModule(self.ctx, tuple(tuple(row) for row in F))

    def apply(self, v: Sequence[WittElt]) -> list[WittElt]:
        fv = [x.frobenius() for x in v]
        return [sum((self.matrix[i][j] * fv[j] for j in range(self.rank)), self.ctx.zero()) for i in range(self.rank)]


@dataclass(frozen=True)
class DescentReport:
    invariants_rank: int
    iso_verified: bool
    torsion_exponents: tuple[int, ...]
    invariant_basis: tuple[tuple[WittElt, ...], ...]

    def to_json(self) -> dict:
        return {
            "invariants_rank": self.invariants_rank,
            "iso_verified": self.iso_verified,
            "torsion_exponents": list(self.torsion_exponents),
            "invariant_basis": [[str(x) for x in v] for v in self.invariant_basis],
        }


def _mat_mul(A, B):
    ctx = A[0][0].ctx
    return [
        [sum((A[i][l] * B[l][j] for l in range(len(B))), ctx.zero()) for j in range(len(B[0]))]
        for i in range(len(A))
    ]


def _mat_inverse(ctx: WittCtx, C):
    r = len(C)
    M = [list(row) + [ctx(int(i == j)) for j in range(r)] for i, row in enumerate(C)]
    for col in range(r):
        piv = next((i for i in range(col, r) if M[i][col].is_unit()), None)
        if piv is None:
            raise NotAUnit("matrix is not invertible")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for i in range(r):
            if i != col and not M[i][col].is_zero():
                c = M[i][col]
                M[i] = [x - c * y for x, y in zip(M[i], M[col])]
    return [row[r:] for row in M]


def witt_det(M) -> WittElt:
    """Determinant by Laplace expansion (matrices here are at most 3x3)."""
    r = len(M)
    if r == 1:
        return M[0][0]
    ctx = M[0][0].ctx
    total = ctx.zero()
    for j in range(r):
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = M[0][j] * witt_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def galois_descent_check(M: TwistedGalModule) -> DescentReport:
    """Compute M^Gal = ker(Φ - id) and test that W ⊗ M^Gal → M is an isomorphism."""
    ctx, r, n, p, k = M.ctx, M.rank, M.ctx.n, M.ctx.p, M.ctx.k
    basis = []
    for i in range(r):
        for e in range(n):
            v = [ctx.zero()] * r
            v[i] = ctx({e: 1})
            basis.append(v)
    # twisted-module law: Φ^n = id on a Z_p-basis
    for v in basis:
        w = v
        for _ in range(n):
            w = M.apply(w)
        if w != v:
            raise NotSemilinear("the operator iterated n times is not the identity")
    # Z/p^k-matrix of Φ - id in coordinates (i, e)
    cols = []
    for v in basis:
        w = M.apply(v)
        cols.append([c for x, y in zip(w, v) for c in (x - y).c])
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(cols))]
    free, torsion = kernel_mod_pk(rows, p, k)
    vecs = tuple(tuple(ctx(list(g[i * n : (i + 1) * n])) for i in range(r)) for g in free)
    iso = False
    if len(free) == r and not torsion:
        B = [[vecs[j][i] for j in range(r)] for i in range(r)]
        iso = witt_det(B).is_unit()
    return DescentReport(len(free), iso, tuple(e for _, e in torsion), vecs)


def random_invertible_matrix(ctx: WittCtx, r: int, rng: _random.Random):
    while True:
        C = [[ctx.random(rng) for _ in range(r)] for _ in range(r)]
        if witt_det(C).is_unit():
            return C


def iter_field(ctx: FieldCtx) -> Iterable[FieldElt]:
    return ctx.elements()
