"""Solver for the coordinates t_i(g) of the Lubin-Tate action (heights n ≤ 2).

Write ψ_g = t_0 x +_G t_1 x^p +_G t_2 x^{p^2} +_G ... for the isomorphism
φ_*G_n → G_n attached to g.  Taking logarithms (l = Σ l_k x^{p^k}) turns
this into the coordinate relations

    t_0 · φ(l_m) = Σ_{i+k=m} l_k t_i^{p^k}            (m ≥ 0)

which express φ(u_1) and all t_m (m ≥ n) through t_0, ..., t_{n−1}.  The
conditions pinning down the unknowns are: every t_m is integral, and its
residue equals the digit ē_m of g, where ē_{i+nj} = α_{ij} are the
Teichmüller digits a_i = Σ_j T(α_{ij}) p^j.  Degree-by-degree comparison of
truncated series cannot see these conditions for large m, which is why the
solver works with the relations directly.

The unknowns are determined order by order in the m-adic filtration.  At
order r, the unknown "p^a u^b t^e-coefficient of t_i" (a + b = r) is paired
with the residue of t_{na+i} (b = 0) or the p^{-1}-digit of the u^b t^e
coefficient of t_{n(a+1)+i} (b > 0).  The resulting F_p-linear system is set
up by finite differences, evaluating every perturbation in one batched pass.

Arithmetic is fixed-point p-adic: an element of (W ⊗ Q)[u]/(u^U) is an
integer array V of shape (batch, U, n) representing V / p^E modulo p^K.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PostCheckFailure, SolverStuck


class FixedPointAlgebra:
    """Batched fixed-point arithmetic in (W ⊗ Q)[u]/(u^U), W = Z_p[t]/(f), n ≤ 2."""

    def __init__(self, p: int, n: int, U: int, modulus: tuple[int, ...], E: int, K: int):
        if n > 2:
            raise ValueError("the coordinate solver supports n ≤ 2")
        self.p, self.n, self.U, self.E, self.K = p, n, U, E, K
        self.f = tuple(int(c) for c in modulus)
        self.S = p**E
        self.P = p ** (K + E)

    # -- construction ---------------------------------------------------------
    def zeros(self, B: int) -> np.ndarray:
        z = np.empty((B, self.U, self.n), dtype=object)
        z[...] = 0
        return z

    def const(self, B: int, w, scale: int = 0) -> np.ndarray:
        """Constant p^scale · w for w a coefficient sequence in the basis t^e."""
        z = self.zeros(B)
        for e, c in enumerate(w):
            z[:, 0, e] = (int(c) * p_pow(self.p, self.E + scale)) % self.P
        return z

    def one(self, B: int) -> np.ndarray:
        return self.const(B, [1])

    def u(self, B: int) -> np.ndarray:
        z = self.zeros(B)
        if self.U > 1:
            z[:, 1, 0] = self.S % self.P
        return z

    # -- arithmetic ---------------------------------------------------------
    def add(self, x, y):
        return (x + y) % self.P

    def sub(self, x, y):
        return (x - y) % self.P

    def scale(self, x, num: int, den_pow: int = 0):
        """x · num / p^den_pow (the division must be exact in the representation)."""
        y = (x * num) % self.P
        if den_pow:
            d = p_pow(self.p, den_pow)
            if np.any(y % d != 0):
                raise PostCheckFailure("fixed-point underflow: increase the working precision")
            y = y // d
        return y

    def _tmul(self, a, b):
        """Product in Z[t]/(f) on the last axis (broadcasting leading axes)."""
        if self.n == 1:
            return a * b
        f0, f1 = self.f[0], self.f[1]
        a0, a1 = a[..., 0], a[..., 1]
        b0, b1 = b[..., 0], b[..., 1]
        c2 = a1 * b1
        out = np.empty(np.broadcast(a0, b0).shape + (2,), dtype=object)
        out[..., 0] = a0 * b0 - c2 * f0
        out[..., 1] = a0 * b1 + a1 * b0 - c2 * f1
        return out

    def mul(self, x, y):
        U = self.U
        acc = self.zeros(max(x.shape[0], y.shape[0]))
        for b1 in range(U):
            xb = x[:, b1 : b1 + 1, :]
            if not np.any(xb != 0):
                continue
            acc[:, b1:, :] += self._tmul(xb, y[:, : U - b1, :])
        acc %= self.P
        if np.any(acc % self.S != 0):
            raise PostCheckFailure("fixed-point underflow: increase the working precision")
        return acc // self.S

    def pow(self, x, e: int):
        r = self.one(x.shape[0])
        b = x
        while e:
            if e & 1:
                r = self.mul(r, b)
            e >>= 1
            if e:
                b = self.mul(b, b)
        return r

    def inv(self, x):
        """Inverse of a unit (constant term a p-adic unit of W), by Newton iteration."""
        p, n = self.p, self.n
        B = x.shape[0]
        # residue-field inverse of the constant term, then Newton
        y = self.zeros(B)
        for bi in range(B):
            c0 = [int(v) // self.S % p for v in x[bi, 0]]
            inv = _field_inverse(p, n, self.f, tuple(c0))
            for e, c in enumerate(inv):
                y[bi, 0, e] = (c * self.S) % self.P
        two = self.const(B, [2])
        for _ in range(2 * (self.K + self.U).bit_length() + 2):
            y = self.mul(y, self.sub(two, self.mul(x, y)))
        return y

    # -- digits ---------------------------------------------------------------
    def digit(self, V, d: int):
        """p-adic digit d (d may be negative) of the represented value."""
        return (V // p_pow(self.p, self.E + d)) % self.p

    def is_integral(self, V) -> np.ndarray:
        return V % self.S == 0

    def to_int(self, V, mod: int):
        """Integer value of an integral representation, reduced mod ``mod``."""
        return (V // self.S) % mod


@lru_cache(maxsize=None)
def p_pow(p: int, e: int) -> int:
    return p**e


@lru_cache(maxsize=4096)
def _field_inverse(p: int, n: int, f: tuple[int, ...], c: tuple[int, ...]) -> tuple[int, ...]:
    from .base import FieldCtx

    ctx = FieldCtx(p, n, f)
    return tuple(ctx(list(c)).inverse().c)


@dataclass
class TSolution:
    phi_u: np.ndarray | None  # (U, n) fixed-point representation of φ(u_1) (n = 2)
    t: list[np.ndarray]  # t_0..t_M, each (U, n)
    alg: FixedPointAlgebra
    working_order: int
    corrections: dict


class CoordinateSolver:
    """Computes t_0..t_M and φ(u_1) from the residue digits ē_0..ē_M of g."""

    def __init__(self, p: int, n: int, modulus: tuple[int, ...], J: int, M: int | None = None):
        self.p, self.n, self.J = p, n, J
        self.M = n * J - 1 if M is None else max(M, n * J - 1)
        self.U = J if n > 1 else 1
        E = 4 * self.M + 12
        K = E + 2 * J + 20
        self.alg = FixedPointAlgebra(p, n, self.U, modulus, E, K)
        self.modulus = tuple(modulus)
        A = self.alg
        # P_k = p − p^{p^k} = p·(1 − p^{p^k − 1}); only its class mod p^{K+E} matters
        self._P = [(p - pow(p, p**k, A.P)) % A.P for k in range(self.M + 1)]
        self._Punit = [(1 - pow(p, p**k - 1, A.P)) % A.P if k else 1 for k in range(self.M + 1)]
        self._l_u = self._logs(A.u(1), self.M)

    # -- relations ------------------------------------------------------------
    def _logs(self, uval: np.ndarray, M: int) -> list[np.ndarray]:
        """l_0..l_M with v_0 = p, v_i = u (0<i<n), v_n = 1 evaluated at u = uval (batched)."""
        A, p, n = self.alg, self.p, self.n
        B = uval.shape[0]
        ls = [A.one(B)]
        # powers v^{p^j} for v = uval
        upow = [uval]
        for _ in range(M):
            upow.append(A.pow(upow[-1], p))
        for k in range(1, M + 1):
            s = A.zeros(B)
            for j in range(k):
                i = k - j
                if i < n:
                    s = A.add(s, A.mul(ls[j], upow[j]))
                elif i == n:
                    s = A.add(s, ls[j])
            ls.append(A.scale(s, pow(self._Punit[k], -1, A.P), 1))
        return ls

    def compute(self, t_low: list[np.ndarray], M: int):
        """φ(u_1) (or None for n = 1) and t_0..t_M from t_0..t_{n−1} (batched)."""
        A, p, n = self.alg, self.p, self.n
        t0 = t_low[0]
        B = t0.shape[0]
        l = [np.broadcast_to(x, (B,) + x.shape[1:]) for x in self._l_u[: M + 1]]
        if n == 2:
            # t_0 φ(l_1) = t_1 + l_1 t_0^p  and  φ(l_1) = φ(u_1)/P_1
            rhs = A.add(t_low[1], A.mul(l[1], A.pow(t0, p)))
            phiu = A.scale(A.mul(rhs, A.inv(t0)), self._P[1])
            lphi = self._logs(phiu, M)
        else:
            phiu = None
            lphi = l
        ts = list(t_low)
        pw = [[t] for t in ts]  # pw[i][k] = t_i^{p^k}
        for m in range(n, M + 1):
            s = A.mul(t0, lphi[m])
            for k in range(1, m + 1):
                i = m - k
                while len(pw[i]) <= k:
                    pw[i].append(A.pow(pw[i][-1], p))
                s = A.sub(s, A.mul(l[k], pw[i][k]))
            ts.append(s)
            pw.append([s])
        return phiu, ts

    # -- solving ----------------------------------------------------------------
    def stages(self):
        """Unknowns and designated conditions for each m-adic order r = 1..J−1."""
        n = self.n
        out = []
        for r in range(1, self.J):
            unknowns, conds = [], []
            for i in range(n):
                for a in range(r + 1):
                    b = r - a
                    if b >= self.U:
                        continue
                    for e in range(n):
                        unknowns.append((i, a, b, e))
                        if b == 0:
                            conds.append((n * a + i, 0, 0, e))
                        else:
                            conds.append((n * (a + 1) + i, b, -1, e))
            out.append((unknowns, conds))
        return out

    def _condvals(self, ts, conds, ebar) -> np.ndarray:
        """(batch, #conds) array of condition defects mod p."""
        A, p = self.alg, self.p
        cols = []
        for m, b, d, e in conds:
            v = A.digit(ts[m][:, b, e], d)
            if b == 0 and d == 0:
                v = (v - ebar[m][e]) % p
            cols.append(v)
        return np.stack(cols, axis=1).astype(np.int64)

    def solve(self, ebar: list[tuple[int, ...]], base: list[tuple[int, ...]]) -> TSolution:
        """ebar[m]: residue digit of t_m (coefficients in the basis t^e), m = 0..M;
        base[i]: a Teichmüller-type lift of ē_i (integers mod p^K) for i < n."""
        A, p, n = self.alg, self.p, self.n
        if len(ebar) <= self.M:
            raise ValueError(f"need residue digits ē_0..ē_{self.M}")
        z: dict[tuple[int, int, int, int], int] = {}

        def build(extra: list[tuple[tuple[int, int, int, int], int]]):
            """Batch of t_low states: the current one plus one per perturbation."""
            B = 1 + len(extra)
            tl = [A.const(B, base[i]) for i in range(n)]
            for (i, a, b, e), v in z.items():
                if v:
                    tl[i][:, b, e] = (tl[i][:, b, e] + v * p_pow(p, A.E + a)) % A.P
            for row, ((i, a, b, e), v) in enumerate(extra, start=1):
                tl[i][row, b, e] = (tl[i][row, b, e] + v * p_pow(p, A.E + a)) % A.P
            return tl

        stages = self.stages()
        for unknowns, conds in stages:
            if not unknowns:
                continue
            Mneed = max(c[0] for c in conds)
            _, ts = self.compute(build([(u, 1) for u in unknowns]), Mneed)
            vals = self._condvals(ts, conds, ebar)
            b0 = vals[0]
            mat = (vals[1:] - b0[None, :]) % p  # (#unknowns, #conds)
            x = solve_mod_p(mat.T, (-b0) % p, p)
            for u, v in zip(unknowns, x):
                z[u] = (z.get(u, 0) + int(v)) % p
        phiu, ts = self.compute(build([]), self.M)
        # every designated condition must still hold after all later corrections
        for unknowns, conds in stages:
            if conds and np.any(self._condvals(ts, conds, ebar) != 0):
                raise SolverStuck("coordinate conditions violated after the final order")
        return TSolution(
            phi_u=None if phiu is None else phiu[0],
            t=[t[0] for t in ts],
            alg=A,
            working_order=self.J,
            corrections=dict(z),
        )


def solve_mod_p(A: np.ndarray, b: np.ndarray, p: int) -> list[int]:
    """Solve A x = b over F_p for square (or overdetermined consistent) A."""
    A = [[int(v) % p for v in row] + [int(bv) % p] for row, bv in zip(A.tolist(), b.tolist())]
    R, C = len(A), len(A[0]) - 1
    r = 0
    pivots = []
    for c in range(C):
        pr = next((i for i in range(r, R) if A[i][c]), None)
        if pr is None:
            raise SolverStuck("singular linear system in the coordinate solver")
        A[r], A[pr] = A[pr], A[r]
        iv = pow(A[r][c], -1, p)
        A[r] = [(v * iv) % p for v in A[r]]
        for i in range(R):
            if i != r and A[i][c]:
                fct = A[i][c]
                A[i] = [(v - fct * w) % p for v, w in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    for i in range(r, R):
        if A[i][-1]:
            raise SolverStuck("inconsistent linear system in the coordinate solver")
    return [A[i][-1] for i in range(C)]
