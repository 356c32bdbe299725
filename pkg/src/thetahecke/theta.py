"""Representation numbers and Fourier coefficient tables of theta series.

The degree-n theta series of a lattice with Gram matrix G has coefficient
a(L, T) = #{U in Z^(m x n) : U^T G U = T} at the even matrix T.  Vectors are
enumerated with an exact, vectorized Fincke-Pohst search: the quadratic form
is written as a sum of squares of integer linear forms with integer weights,
so every bound is an integer square root and nothing is rounded.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt, lcm
from typing import Iterator

import numpy as np

from . import arith
from .arith import CapacityError
from .lattice import Lattice, SubframeBasis, gram_of, lll_gram

#: default cap on the number of candidate column tuples a count may examine
DEFAULT_NODE_BUDGET = 10 ** 10
_CHUNK = 1 << 20


# ---------------------------------------------------------------------------
# exact Fincke-Pohst enumeration

@dataclass(frozen=True)
class _Decomposition:
    minors: tuple[int, ...]          # d_0 = 1, d_1, ..., d_m
    coef: np.ndarray                 # coef[k, j] = d_k * L[j, k] for j > k
    weights: tuple[int, ...]         # M / (d_{k-1} d_k)
    scale: int                       # M


@lru_cache(maxsize=256)
def _decompose(gram: tuple[tuple[int, ...], ...]) -> _Decomposition:
    m = len(gram)
    d = [1] + arith.leading_minors(gram)
    # LDL^T with exact fractions; L[j][k] for j > k
    A = [[Fraction(x) for x in row] for row in gram]
    Lm = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    for k in range(m):
        for j in range(k + 1, m):
            Lm[j][k] = A[j][k] / A[k][k]
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                A[i][j] -= Lm[i][k] * A[k][j]
    coef = np.zeros((m, m), dtype=np.int64)
    for k in range(m):
        for j in range(k + 1, m):
            c = Lm[j][k] * d[k + 1]
            if c.denominator != 1:
                raise ArithmeticError("leading-minor scaling failed to clear denominators")
            coef[k, j] = int(c)
    M = lcm(*[d[k] * d[k + 1] for k in range(m)])
    weights = tuple(M // (d[k] * d[k + 1]) for k in range(m))
    return _Decomposition(tuple(d), coef, weights, M)


def _isqrt_array(v: np.ndarray) -> np.ndarray:
    s = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    s = np.where(s * s > v, s - 1, s)
    s = np.where(s * s > v, s - 1, s)
    s = np.where((s + 1) * (s + 1) <= v, s + 1, s)
    return s


def iter_short_vectors(gram, bound: int, chunk: int = _CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield blocks ``(X, norms)`` covering every x with x^T G x <= bound.

    ``X`` has one vector per row in the coordinates of ``gram``.
    """
    gram = tuple(tuple(int(x) for x in row) for row in gram)
    m = len(gram)
    if bound < 0:
        return
    dec = _decompose(gram)
    Mb = dec.scale * int(bound)
    if Mb >= 1 << 61:
        raise CapacityError("enumeration bound overflows 64-bit arithmetic")
    d = dec.minors
    stack = [(m - 1, np.zeros((1, 0), dtype=np.int64), np.zeros(1, dtype=np.int64))]
    while stack:
        i, X, P = stack.pop()
        c = X @ dec.coef[i, i + 1:][::-1] if X.shape[1] else np.zeros(len(X), dtype=np.int64)
        dk = d[i + 1]
        w = dec.weights[i]
        s = _isqrt_array((Mb - P) // w)
        lo = -((s + c) // dk)
        hi = (s - c) // dk
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total == 0:
            continue
        if total > chunk and len(X) > 1:
            cuts = np.searchsorted(np.cumsum(cnt), np.arange(chunk, total, chunk))
            cuts = np.unique(np.clip(cuts, 1, len(X) - 1))
            for part in reversed(np.split(np.arange(len(X)), cuts)):
                stack.append((i, X[part], P[part]))
            continue
        rep = np.repeat(np.arange(len(X)), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        xk = lo[rep] + offs
        z = dk * xk + c[rep]
        Pn = P[rep] + z * z * w
        # X stores coordinates in reverse order (x_m first) while enumerating
        Xn = np.concatenate([X[rep], xk[:, None]], axis=1)
        if i == 0:
            if np.any(Pn % dec.scale):
                raise ArithmeticError("non-integral norm in enumeration")
            yield Xn[:, ::-1].copy(), Pn // dec.scale
        else:
            stack.append((i - 1, Xn, Pn))


def short_vectors(gram, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """All vectors of norm <= bound (including 0) and their norms."""
    blocks = list(iter_short_vectors(gram, bound))
    m = len(gram)
    if not blocks:
        return np.zeros((0, m), dtype=np.int64), np.zeros(0, dtype=np.int64)
    X = np.concatenate([b[0] for b in blocks])
    N = np.concatenate([b[1] for b in blocks])
    order = np.lexsort(X.T[::-1])
    order = order[np.argsort(N[order], kind="stable")]
    return X[order], N[order]


def shells(gram, norms) -> dict[int, np.ndarray]:
    """Vectors of each requested norm, as a dict norm -> array."""
    norms = sorted(set(int(t) for t in norms))
    out = {t: [] for t in norms}
    if not norms:
        return {}
    wanted = np.array(norms)
    for X, N in iter_short_vectors(gram, max(norms)):
        hit = np.isin(N, wanted)
        if hit.any():
            Xh, Nh = X[hit], N[hit]
            for t in norms:
                sel = Nh == t
                if sel.any():
                    out[t].append(Xh[sel])
    m = len(gram)
    res = {}
    for t in norms:
        X = np.concatenate(out[t]) if out[t] else np.zeros((0, m), dtype=np.int64)
        res[t] = X[np.lexsort(X.T[::-1])] if len(X) else X
    return res


# ---------------------------------------------------------------------------
# Fourier indices

def _as_matrix(T) -> list[list[int]]:
    if isinstance(T, (int, np.integer)):
        return [[int(T)]]
    M = [[int(x) for x in row] for row in T]
    if not arith.is_symmetric(M):
        raise ValueError("Fourier index must be symmetric")
    return M


def is_psd_even(T) -> bool:
    M = _as_matrix(T)
    if any(M[i][i] % 2 for i in range(len(M))):
        return False
    n = len(M)
    # all principal minors nonnegative
    from itertools import combinations
    return all(arith.det_int([[M[i][j] for j in S] for i in S]) >= 0
               for r in range(1, n + 1) for S in combinations(range(n), r))


def canonicalize_T(T) -> tuple[tuple[int, ...], ...]:
    """Canonical representative of the GL_n(Z)-class of an even psd index.

    n = 1 is the identity.  For n = 2 a definite form [[a, b], [b, c]] is
    Gauss-reduced to 0 <= 2b <= a <= c, and a singular one becomes
    [[t, 0], [0, 0]] with t the content.  For n >= 3 only diagonal indices
    are supported (sorted diagonal).

    >>> canonicalize_T([[2, -1], [-1, 2]])
    ((2, 1), (1, 2))
    >>> canonicalize_T([[4, 0], [0, 2]])
    ((2, 0), (0, 4))
    """
    M = _as_matrix(T)
    n = len(M)
    if not is_psd_even(M):
        raise ValueError("Fourier index must be even and positive semidefinite")
    if n == 1:
        return ((M[0][0],),)
    if n == 2:
        a, b, c = M[0][0], M[0][1], M[1][1]
        if a * c - b * b == 0:
            t = arith.gcd_list([a, b, c])
            return ((t, 0), (0, 0))
        while True:
            if a > c:
                a, c = c, a
            if 2 * abs(b) > a:
                t = (2 * b + a) // (2 * a)  # nearest integer to b / a
                b, c = b - t * a, c - 2 * t * b + t * t * a
                continue
            if a > c:
                continue
            break
        return ((a, abs(b)), (abs(b), c))
    if any(M[i][j] for i in range(n) for j in range(n) if i != j):
        raise ValueError("degree >= 3 indices must be diagonal")
    diag = sorted(M[i][i] for i in range(n))
    return tuple(tuple(diag[i] if i == j else 0 for j in range(n)) for i in range(n))


def canonical_keys(n: int, bound: int) -> list[tuple[tuple[int, ...], ...]]:
    """Every canonical even psd index of degree n <= 2 with trace <= bound."""
    if n == 1:
        return [((t,),) for t in range(0, bound + 1, 2)]
    if n != 2:
        raise ValueError("tables are available for degree 1 and 2")
    keys = [((t, 0), (0, 0)) for t in range(0, bound + 1, 2)]
    for a in range(2, bound + 1, 2):
        for c in range(a, bound - a + 1, 2):
            for b in range(0, a // 2 + 1):
                if a * c - b * b > 0:
                    keys.append(((a, b), (b, c)))
    return sorted(keys, key=lambda K: (K[0][0] + K[1][1], K))


def key_of(T) -> tuple[int, ...]:
    return tuple(x for row in T for x in row)


def matrix_of(key: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    n = isqrt(len(key))
    return tuple(tuple(key[i * n:(i + 1) * n]) for i in range(n))


# ---------------------------------------------------------------------------
# coefficient tables

@dataclass
class CoeffTable:
    n: int
    bound: int
    entries: dict[tuple[int, ...], Fraction] = field(default_factory=dict)

    def __getitem__(self, T) -> Fraction:
        k = T if isinstance(T, tuple) and all(isinstance(x, int) for x in T) else key_of(canonicalize_T(T))
        return self.entries.get(k, Fraction(0))

    def keys(self):
        return sorted(self.entries, key=lambda k: (sum(matrix_of(k)[i][i] for i in range(self.n)), k))

    def items(self):
        return [(k, self.entries[k]) for k in self.keys()]

    def scaled(self, c) -> "CoeffTable":
        c = Fraction(c)
        return CoeffTable(self.n, self.bound, {k: v * c for k, v in self.entries.items()})

    def __add__(self, other: "CoeffTable") -> "CoeffTable":
        if (self.n, self.bound) != (other.n, other.bound):
            raise ValueError("tables of different shape")
        keys = set(self.entries) | set(other.entries)
        return CoeffTable(self.n, self.bound,
                          {k: self.entries.get(k, Fraction(0)) + other.entries.get(k, Fraction(0)) for k in keys})

    def __eq__(self, other):
        if not isinstance(other, CoeffTable) or (self.n, self.bound) != (other.n, other.bound):
            return False
        keys = set(self.entries) | set(other.entries)
        return all(self.entries.get(k, 0) == other.entries.get(k, 0) for k in keys)

    # -- serialization --------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"t{i}{j}" for i in range(self.n) for j in range(self.n)] + ["num", "den"])
        for k, v in self.items():
            w.writerow(list(k) + [v.numerator, v.denominator])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, bound: int | None = None) -> "CoeffTable":
        rows = list(csv.reader(io.StringIO(text)))
        n = isqrt(len(rows[0]) - 2)
        entries = {}
        for r in rows[1:]:
            vals = [int(x) for x in r]
            entries[tuple(vals[:-2])] = Fraction(vals[-2], vals[-1])
        if bound is None:
            bound = max((sum(matrix_of(k)[i][i] for i in range(n)) for k in entries), default=0)
        return cls(n, bound, entries)

    def to_json(self) -> str:
        data = {
            "n": self.n,
            "bound": self.bound,
            "entries": [{"T": [list(r) for r in matrix_of(k)], "value": _frac_str(v)} for k, v in self.items()],
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        data = json.loads(text)
        entries = {key_of(e["T"]): Fraction(e["value"]) for e in data["entries"]}
        return cls(data["n"], data["bound"], entries)


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# representation numbers

def integral_gram(L) -> tuple[list[list[int]], int]:
    """Integral Gram matrix of L (Lattice or SubframeBasis) and the factor s with Gram = s * true Gram."""
    if isinstance(L, Lattice):
        return [list(r) for r in L.gram], 1
    if isinstance(L, SubframeBasis):
        g = gram_of(L)
        s = lcm(1, *[x.denominator for row in g for x in row])
        return [[int(x * s) for x in row] for row in g], s
    G = [[int(x) for x in row] for row in L]
    return G, 1


def _reduced(L) -> tuple[tuple[tuple[int, ...], ...], int]:
    G, s = integral_gram(L)
    Gr, _ = lll_gram(G)
    return tuple(tuple(r) for r in Gr), s


def rep_number(L, T, node_budget: int = DEFAULT_NODE_BUDGET) -> int:
    """#{U : U^T G U = T} by column-by-column enumeration.

    >>> rep_number(Lattice([[2, 0], [0, 2]]), [[2]])
    4
    """
    M = _as_matrix(T)
    n = len(M)
    if not is_psd_even(M):
        raise ValueError("Fourier index must be even and positive semidefinite")
    G, s = _reduced(L)
    M = [[s * x for x in row] for row in M]
    sh = shells(G, [M[i][i] for i in range(n)])
    Garr = np.array(G, dtype=np.int64)
    # partial solutions as index tuples into the shells
    cols = [sh[M[0][0]]]
    partial = np.arange(len(cols[0]))[:, None]
    used = len(partial)
    for c in range(1, n):
        S = sh[M[c][c]]
        prev_imgs = [sh[M[i][i]] @ Garr for i in range(c)]
        new = []
        for start in range(0, len(partial), 4096):
            block = partial[start:start + 4096]
            used += len(block) * len(S)
            if used > node_budget:
                raise CapacityError("representation count exceeded its node budget")
            ok = np.ones((len(block), len(S)), dtype=bool)
            for i in range(c):
                ok &= (prev_imgs[i][block[:, i]] @ S.T) == M[i][c]
            bi, si = np.nonzero(ok)
            if len(bi):
                new.append(np.concatenate([block[bi], si[:, None]], axis=1))
        partial = np.concatenate(new) if new else np.zeros((0, c + 1), dtype=np.int64)
        cols.append(S)
    return int(len(partial))


def theta_table(L, n: int, bound: int, node_budget: int = DEFAULT_NODE_BUDGET) -> CoeffTable:
    """Coefficients a(L, T) for every canonical index T of trace <= bound (n <= 2)."""
    G, s = _reduced(L)
    keys = canonical_keys(n, bound)
    table = CoeffTable(n, bound)
    X, N = short_vectors(G, s * bound)
    counts = {int(t): int(c) for t, c in zip(*np.unique(N, return_counts=True))}
    if n == 1:
        for K in keys:
            table.entries[key_of(K)] = Fraction(counts.get(s * K[0][0], 0))
        return table
    Garr = np.array(G, dtype=np.int64)
    by_norm = {t: X[N == t] for t in counts}
    ip_hist: dict[tuple[int, int], dict[int, int]] = {}
    for K in keys:
        (a, b), (_, c) = K
        if a * c - b * b == 0:
            table.entries[key_of(K)] = Fraction(counts.get(s * a, 0))
            continue
        if (a, c) not in ip_hist:
            A = by_norm.get(s * a, np.zeros((0, len(G)), dtype=np.int64))
            C = by_norm.get(s * c, np.zeros((0, len(G)), dtype=np.int64))
            if len(A) * len(C) > node_budget:
                raise CapacityError("theta table exceeded its node budget")
            hist: dict[int, int] = {}
            for start in range(0, len(A), 2048):
                ips = (A[start:start + 2048] @ Garr) @ C.T
                vals, cnts = np.unique(ips, return_counts=True)
                for v, ct in zip(vals.tolist(), cnts.tolist()):
                    hist[v] = hist.get(v, 0) + ct
            ip_hist[(a, c)] = hist
        table.entries[key_of(K)] = Fraction(ip_hist[(a, c)].get(s * b, 0))
    return table
