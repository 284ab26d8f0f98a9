"""Truncated univariate and bivariate power series over a :class:`CoeffRing`.

Storage is dense: a univariate series of truncation degree N is an array of
shape ``(N+1, dim)`` (index = degree), a bivariate series an array of shape
``(N+1, N+1, dim)`` whose entries with ``i + j > N`` are always zero.
Values are immutable by convention: every operation returns a new series.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import ConstantTermNonzero, ContextMismatch, LinearNotUnit
from .rings import CoeffRing


def _nonzero_rows(a: np.ndarray) -> np.ndarray:
    """Indices along axis 0 whose ring element is nonzero."""
    return np.nonzero(np.any(a != 0, axis=-1))[0]


def ring_matmul(ring: CoeffRing, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product of ring-valued matrices (a, b, dim) x (b, c, dim) -> (a, c, dim)."""
    out = ring.zeros(A.shape[0], B.shape[1])
    nzA = np.any(A != 0, axis=-1)
    nzB = np.any(B != 0, axis=-1)
    for k in range(A.shape[1]):
        rows = np.nonzero(nzA[:, k])[0]
        cols = np.nonzero(nzB[k, :])[0]
        if rows.size == 0 or cols.size == 0:
            continue
        prod = ring.mul(A[rows, k][:, None, :], B[k, cols][None, :, :])
        out[np.ix_(rows, cols)] += prod
        if ring.moduli is not None and out.dtype != object:
            out[np.ix_(rows, cols)] %= ring.moduli
    return ring.reduce(out)


class USeries:
    """Truncated univariate series c_0 + c_1 x + ... + c_N x^N."""

    __slots__ = ("ring", "N", "c")

    def __init__(self, ring: CoeffRing, N: int, coeffs: np.ndarray | None = None):
        self.ring = ring
        self.N = N
        if coeffs is None:
            coeffs = ring.zeros(N + 1)
        if coeffs.shape != (N + 1, ring.dim):
            raise ValueError(f"coefficient array shape {coeffs.shape} != {(N + 1, ring.dim)}")
        self.c = ring.reduce(coeffs)

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, ring: CoeffRing, N: int) -> "USeries":
        return cls(ring, N)

    @classmethod
    def x(cls, ring: CoeffRing, N: int) -> "USeries":
        return cls.monomial(ring, N, 1, ring.one())

    @classmethod
    def monomial(cls, ring: CoeffRing, N: int, d: int, coeff: np.ndarray) -> "USeries":
        c = ring.zeros(N + 1)
        if d <= N:
            c[d] = coeff
        return cls(ring, N, c)

    @classmethod
    def from_dict(cls, ring: CoeffRing, N: int, terms: Mapping[int, np.ndarray | int]) -> "USeries":
        c = ring.zeros(N + 1)
        for d, v in terms.items():
            if d <= N:
                c[d] = ring.from_int(v) if isinstance(v, int) else v
        return cls(ring, N, c)

    # -- basic access -----------------------------------------------------
    def coeff(self, d: int) -> np.ndarray:
        return self.c[d] if d <= self.N else self.ring.zeros()

    def support(self) -> list[int]:
        return [int(d) for d in _nonzero_rows(self.c)]

    def valuation(self) -> int | None:
        s = self.support()
        return s[0] if s else None

    def is_zero(self) -> bool:
        return not np.any(self.c != 0)

    def _check(self, other: "USeries") -> None:
        if other.ring != self.ring or other.N != self.N:
            if other.ring != self.ring:
                raise ContextMismatch("series over different coefficient rings")
            raise ContextMismatch(f"truncation mismatch: {self.N} vs {other.N}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, USeries):
            return NotImplemented
        self._check(other)
        return not np.any(self.c != other.c)

    __hash__ = None  # type: ignore[assignment]

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "USeries") -> "USeries":
        self._check(other)
        return USeries(self.ring, self.N, self.c + other.c)

    def __sub__(self, other: "USeries") -> "USeries":
        self._check(other)
        return USeries(self.ring, self.N, self.c - other.c)

    def __neg__(self) -> "USeries":
        return USeries(self.ring, self.N, -self.c)

    def __mul__(self, other: "USeries") -> "USeries":
        self._check(other)
        return USeries(self.ring, self.N, _umul(self.ring, self.c, other.c, self.N))

    def scale(self, a: np.ndarray | int) -> "USeries":
        """Multiply every coefficient by the ring element (or integer) a."""
        if isinstance(a, int):
            return USeries(self.ring, self.N, self.c * a)
        return USeries(self.ring, self.N, self.ring.mul(self.c, a[None, :]))

    def __pow__(self, e: int) -> "USeries":
        if e < 0:
            return self.inverse() ** (-e)
        r = USeries.monomial(self.ring, self.N, 0, self.ring.one())
        base = self
        while e:
            if e & 1:
                r = r * base
            e >>= 1
            if e:
                base = base * base
        return r

    def truncate(self, M: int) -> "USeries":
        """Series at truncation degree M ≤ N (coefficients above M dropped)."""
        if M > self.N:
            raise ValueError("cannot raise truncation degree")
        return USeries(self.ring, M, self.c[: M + 1].copy())

    def extend(self, M: int) -> "USeries":
        """Zero-pad to truncation degree M ≥ N (used for exact polynomials)."""
        c = self.ring.zeros(M + 1)
        c[: self.N + 1] = self.c
        return USeries(self.ring, M, c)

    def derivative(self) -> "USeries":
        d = np.arange(1, self.N + 1, dtype=self.c.dtype if self.c.dtype != object else object)
        c = self.ring.zeros(self.N + 1)
        c[: self.N] = self.c[1:] * d[:, None]
        return USeries(self.ring, self.N, c)

    def inverse(self) -> "USeries":
        """Multiplicative inverse (constant term must be a unit)."""
        ring = self.ring
        y = USeries.monomial(ring, self.N, 0, ring.inv(self.c[0]))
        two = USeries.monomial(ring, self.N, 0, ring.from_int(2))
        prec = 1
        while prec <= self.N:
            y = y * (two - self * y)
            prec *= 2
        return y

    def map_coeffs(self, func: Callable[[np.ndarray], np.ndarray], ring: CoeffRing) -> "USeries":
        """Apply a vectorised coefficient map (array (N+1, dim) -> (N+1, dim'))."""
        return USeries(ring, self.N, func(self.c))

    def powers_matrix(self, M: int | None = None) -> np.ndarray:
        """P[i, d] = coefficient of x^d in self^i, for i = 0..M (default N)."""
        M = self.N if M is None else M
        P = self.ring.zeros(M + 1, self.N + 1)
        cur = USeries.monomial(self.ring, self.N, 0, self.ring.one())
        for i in range(M + 1):
            P[i] = cur.c
            if i < M:
                cur = cur * self
        return P

    # -- formatting ---------------------------------------------------------
    def __str__(self) -> str:
        terms = []
        for d in self.support():
            cs = self.ring.fmt(self.c[d])
            mon = "" if d == 0 else ("x" if d == 1 else f"x^{d}")
            if not mon:
                terms.append(cs)
            elif cs == "1":
                terms.append(mon)
            else:
                if any(ch in cs for ch in " +") or cs.startswith("-") and len(cs) > 2:
                    cs = f"({cs})"
                terms.append(f"{cs}*{mon}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"USeries<{self.ring.name}, N={self.N}>({self})"


def _umul(ring: CoeffRing, a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    ia = _nonzero_rows(a)
    ib = _nonzero_rows(b)
    out = ring.zeros(N + 1)
    if ia.size == 0 or ib.size == 0:
        return out
    I, K = np.meshgrid(ia, ib, indexing="ij")
    mask = I + K <= N
    I, K = I[mask], K[mask]
    if I.size == 0:
        return out
    prods = ring.mul(a[I], b[K])
    np.add.at(out, I + K, prods)
    return ring.reduce(out)


def compose(f: USeries, g: USeries) -> USeries:
    """f∘g through degree N; g must have zero constant term."""
    f._check(g)
    ring = f.ring
    if np.any(g.c[0] != 0):
        raise ConstantTermNonzero("inner series of a composition must have zero constant term")
    supp = f.support()
    if not supp:
        return USeries.zero(ring, f.N)
    top = supp[-1]
    res = USeries.monomial(ring, f.N, 0, f.c[top])
    for d in range(top - 1, -1, -1):
        res = res * g
        if np.any(f.c[d] != 0):
            res = res + USeries.monomial(ring, f.N, 0, f.c[d])
    return res


def revert(f: USeries) -> USeries:
    """Compositional inverse: compose(f, r) = x = compose(r, f) through degree N."""
    ring = f.ring
    if np.any(f.c[0] != 0):
        raise ConstantTermNonzero("series to revert must have zero constant term")
    if not ring.is_unit(f.c[1]):
        raise LinearNotUnit("linear coefficient is not a unit")
    x = USeries.x(ring, f.N)
    g = x.scale(ring.inv(f.c[1]))
    fp = f.derivative()
    prec = 2
    while True:
        err = compose(f, g) - x
        if err.is_zero():
            return g
        if prec > 2 * f.N + 2:
            raise AssertionError("series reversion did not converge")
        g = g - err * compose(fp, g).inverse()
        prec *= 2


class BSeries:
    """Truncated bivariate series Σ c_ij x^i y^j with i + j ≤ N."""

    __slots__ = ("ring", "N", "c")

    def __init__(self, ring: CoeffRing, N: int, coeffs: np.ndarray | None = None):
        self.ring = ring
        self.N = N
        if coeffs is None:
            coeffs = ring.zeros(N + 1, N + 1)
        if coeffs.shape != (N + 1, N + 1, ring.dim):
            raise ValueError("bad coefficient array shape")
        c = ring.reduce(coeffs)
        c[_outside_mask(N)] = 0
        self.c = c

    @classmethod
    def from_dict(cls, ring: CoeffRing, N: int, terms: Mapping[tuple[int, int], np.ndarray | int]) -> "BSeries":
        c = ring.zeros(N + 1, N + 1)
        for (i, j), v in terms.items():
            if i + j <= N:
                c[i, j] = ring.from_int(v) if isinstance(v, int) else v
        return cls(ring, N, c)

    @classmethod
    def additive(cls, ring: CoeffRing, N: int) -> "BSeries":
        return cls.from_dict(ring, N, {(1, 0): 1, (0, 1): 1})

    def coeff(self, i: int, j: int) -> np.ndarray:
        return self.c[i, j] if i + j <= self.N else self.ring.zeros()

    def support(self) -> list[tuple[int, int]]:
        nz = np.any(self.c != 0, axis=-1)
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(nz))]

    def is_zero(self) -> bool:
        return not np.any(self.c != 0)

    def _check(self, other: "BSeries") -> None:
        if other.ring != self.ring:
            raise ContextMismatch("series over different coefficient rings")
        if other.N != self.N:
            raise ContextMismatch(f"truncation mismatch: {self.N} vs {other.N}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, BSeries):
            return NotImplemented
        self._check(other)
        return not np.any(self.c != other.c)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "BSeries") -> "BSeries":
        self._check(other)
        return BSeries(self.ring, self.N, self.c + other.c)

    def __sub__(self, other: "BSeries") -> "BSeries":
        self._check(other)
        return BSeries(self.ring, self.N, self.c - other.c)

    def __neg__(self) -> "BSeries":
        return BSeries(self.ring, self.N, -self.c)

    def __mul__(self, other: "BSeries") -> "BSeries":
        self._check(other)
        ring, N = self.ring, self.N
        sa = np.array(self.support(), dtype=np.int64).reshape(-1, 2)
        sb = np.array(other.support(), dtype=np.int64).reshape(-1, 2)
        out = ring.zeros(N + 1, N + 1)
        if len(sa) == 0 or len(sb) == 0:
            return BSeries(ring, N, out)
        A, B = np.meshgrid(np.arange(len(sa)), np.arange(len(sb)), indexing="ij")
        A, B = A.ravel(), B.ravel()
        tot = sa[A].sum(1) + sb[B].sum(1)
        keep = tot <= N
        A, B = A[keep], B[keep]
        if A.size:
            prods = ring.mul(self.c[sa[A, 0], sa[A, 1]], other.c[sb[B, 0], sb[B, 1]])
            np.add.at(out, (sa[A, 0] + sb[B, 0], sa[A, 1] + sb[B, 1]), prods)
        return BSeries(ring, N, out)

    def scale(self, a: np.ndarray | int) -> "BSeries":
        if isinstance(a, int):
            return BSeries(self.ring, self.N, self.c * a)
        return BSeries(self.ring, self.N, self.ring.mul(self.c, a[None, None, :]))

    def swap(self) -> "BSeries":
        return BSeries(self.ring, self.N, np.swapaxes(self.c, 0, 1).copy())

    def truncate(self, M: int) -> "BSeries":
        if M > self.N:
            raise ValueError("cannot raise truncation degree")
        return BSeries(self.ring, M, self.c[: M + 1, : M + 1].copy())

    def map_coeffs(self, func: Callable[[np.ndarray], np.ndarray], ring: CoeffRing) -> "BSeries":
        return BSeries(ring, self.N, func(self.c))

    def __str__(self) -> str:
        terms = []
        for i, j in sorted(self.support(), key=lambda t: (t[0] + t[1], -t[0])):
            cs = self.ring.fmt(self.c[i, j])
            mon = "*".join(
                s for s in (("x" if i == 1 else f"x^{i}") if i else "", ("y" if j == 1 else f"y^{j}") if j else "") if s
            )
            if cs == "1" and mon:
                terms.append(mon)
            else:
                if any(ch in cs for ch in " +"):
                    cs = f"({cs})"
                terms.append(f"{cs}*{mon}" if mon else cs)
        return " + ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"BSeries<{self.ring.name}, N={self.N}>({self})"


def _outside_mask(N: int) -> np.ndarray:
    i = np.arange(N + 1)
    return (i[:, None] + i[None, :]) > N


def _require_no_constant(*series: USeries) -> None:
    for s in series:
        if np.any(s.c[0] != 0):
            raise ConstantTermNonzero("substituted series must have zero constant term")


def bsubstitute(F: BSeries, a: USeries, b: USeries) -> USeries:
    """F(a(x), b(x)) through degree N."""
    if a.ring != F.ring or b.ring != F.ring:
        raise ContextMismatch("series over different coefficient rings")
    if not (a.N == b.N == F.N):
        raise ContextMismatch("truncation mismatch")
    _require_no_constant(a, b)
    ring, N = F.ring, F.N
    Pb = b.powers_matrix()  # (N+1, N+1, dim): Pb[j, d] = [x^d] b^j
    C = ring_matmul(ring, F.c, Pb)  # C[i, d] = [x^d] Σ_j F_ij b^j
    res = USeries(ring, N, C[N].copy())
    for i in range(N - 1, -1, -1):
        res = res * a + USeries(ring, N, C[i].copy())
    return res


def substitute_separate(F: BSeries, a: USeries, b: USeries) -> BSeries:
    """F(a(x), b(y)) as a bivariate series (a in the x slot, b in the y slot)."""
    if a.ring != F.ring or b.ring != F.ring:
        raise ContextMismatch("series over different coefficient rings")
    _require_no_constant(a, b)
    ring = F.ring
    Pa = a.powers_matrix()
    Pb = b.powers_matrix()
    # R = Pa^T F Pb
    tmp = ring_matmul(ring, F.c, Pb)  # (i, d2)
    R = ring_matmul(ring, np.swapaxes(Pa, 0, 1).copy(), tmp)  # (d1, d2)
    return BSeries(ring, F.N, R)


def compose_outer(u: USeries, F: BSeries) -> BSeries:
    """u(F(x, y)) as a bivariate series; F must have zero constant term."""
    if u.ring != F.ring:
        raise ContextMismatch("series over different coefficient rings")
    if np.any(F.c[0, 0] != 0):
        raise ConstantTermNonzero("inner series must have zero constant term")
    ring, N = F.ring, F.N
    supp = u.support()
    res = BSeries(ring, N)
    if not supp:
        return res
    one = ring.zeros(N + 1, N + 1)
    for d in range(supp[-1], -1, -1):
        res = res * F
        if np.any(u.c[d] != 0):
            add = one.copy()
            add[0, 0] = u.c[d]
            res = res + BSeries(ring, N, add)
    return res


def diagonal(F: BSeries) -> USeries:
    """F(x, x)."""
    ring, N = F.ring, F.N
    out = ring.zeros(N + 1)
    for i in range(N + 1):
        for j in range(N + 1 - i):
            out[i + j] += F.c[i, j]
    return USeries(ring, N, out)


def partial_y(F: BSeries) -> USeries:
    """∂F/∂y at y = 0, as a series in x (truncated at N)."""
    ring, N = F.ring, F.N
    c = ring.zeros(N + 1)
    c[: N] = F.c[:N, 1]
    return USeries(ring, N, c)


def series_from_terms(ring: CoeffRing, N: int, terms: Iterable[tuple[int, np.ndarray]]) -> USeries:
    c = ring.zeros(N + 1)
    for d, v in terms:
        if d <= N:
            c[d] = ring.add(c[d], v)
    return USeries(ring, N, c)
