"""Positive-definite even lattices and sublattices of their rational span.

A :class:`Lattice` is an even, positive-definite Gram matrix of even rank.
Lattices between ``p^a L`` and ``p^-b L`` are :class:`SubframeBasis` values:
an integer column matrix over the parent basis divided by a power of a
prime, kept in column Hermite normal form so that equal lattices compare
equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from pathlib import Path
from typing import Sequence

import numpy as np

from . import arith


class LatticeError(ValueError):
    """Invalid lattice input; the message names the violated invariant."""


def _rational_gcd(xs) -> Fraction:
    xs = [Fraction(x) for x in xs if x != 0]
    if not xs:
        return Fraction(0)
    den = lcm(*[x.denominator for x in xs])
    return Fraction(arith.gcd_list(int(x * den) for x in xs), den)


@dataclass(frozen=True, eq=False)
class Lattice:
    gram: tuple[tuple[int, ...], ...]
    label: str = ""

    def __post_init__(self):
        try:
            G = tuple(tuple(int(x) for x in row) for row in self.gram)
        except (TypeError, ValueError) as exc:
            raise LatticeError(f"gram: entries must be integers ({exc})") from None
        object.__setattr__(self, "gram", G)
        m = len(G)
        if m == 0 or any(len(row) != m for row in G):
            raise LatticeError("gram: matrix must be square and nonempty")
        if not arith.is_symmetric(G):
            raise LatticeError("gram: matrix must be symmetric")
        if any(G[i][i] % 2 for i in range(m)):
            raise LatticeError("gram: diagonal entries must be even (even lattice)")
        if any(d <= 0 for d in arith.leading_minors(G)):
            raise LatticeError("gram: matrix must be positive definite")
        if m % 2:
            raise LatticeError("gram: m must be even (rank m = 2k)")

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        name = f"{self.label!r}, " if self.label else ""
        return f"Lattice({name}gram={[list(r) for r in self.gram]})"

    # -- construction -----------------------------------------------------
    @classmethod
    def from_json(cls, source) -> "Lattice":
        """Read ``{"label": ..., "gram": [[...]]}`` from a path, string or dict."""
        if isinstance(source, dict):
            data = source
        else:
            text = Path(source).read_text() if Path(str(source)).exists() else str(source)
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise LatticeError(f"lattice file is not valid JSON: {exc}") from None
        if not isinstance(data, dict) or "gram" not in data:
            raise LatticeError("gram: missing field")
        if not isinstance(data["gram"], list) or not all(isinstance(r, list) for r in data["gram"]):
            raise LatticeError("gram: must be a list of integer rows")
        label = data.get("label", "")
        if not isinstance(label, str):
            raise LatticeError("label: must be a string")
        return cls(data["gram"], label)

    def to_json(self) -> dict:
        return {"label": self.label, "gram": [list(r) for r in self.gram]}

    # -- invariants ---------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.gram)

    @property
    def k(self) -> int:
        return self.m // 2

    @cached_property
    def G(self) -> np.ndarray:
        return np.array(self.gram, dtype=np.int64)

    @cached_property
    def det(self) -> int:
        return arith.det_int(self.gram)

    @cached_property
    def inverse(self) -> list[list[Fraction]]:
        return arith.inverse_frac(self.gram)

    @cached_property
    def level(self) -> int:
        """Least N with N * gram^-1 even integral."""
        inv = self.inverse
        m = self.m
        dens = [inv[i][j].denominator for i in range(m) for j in range(m) if i != j]
        dens += [(inv[i][i] / 2).denominator for i in range(m)]
        return lcm(*dens)

    @cached_property
    def norm(self) -> Fraction:
        """Generator of the ideal spanned by all Q[x]."""
        m = self.m
        return _rational_gcd([self.gram[i][i] for i in range(m)]
                             + [2 * self.gram[i][j] for i in range(m) for j in range(i)])

    @cached_property
    def dual_norm(self) -> Fraction:
        inv, m = self.inverse, self.m
        return _rational_gcd([inv[i][i] for i in range(m)]
                             + [2 * inv[i][j] for i in range(m) for j in range(i)])

    @cached_property
    def ideal_level(self) -> Fraction:
        """The level as 4 / (norm L * norm L#)."""
        return Fraction(4) / (self.norm * self.dual_norm)

    def chi_star(self, p: int) -> int:
        if self.level % p == 0:
            raise ValueError(f"p = {p} divides the level {self.level}; the character is undefined there")
        return arith.kronecker((-1) ** self.k * self.det, p)

    def q(self, x) -> int:
        x = np.asarray(x, dtype=np.int64)
        return int(x @ self.G @ x)


def dual(L: Lattice) -> "SubframeBasis":
    """The dual lattice, spanned by the columns of gram^-1."""
    inv = L.inverse
    den = lcm(*[x.denominator for row in inv for x in row])
    return SubframeBasis(L, [[int(x * den) for x in row] for row in inv], den)


# ---------------------------------------------------------------------------
# sublattices of the rational span

class SubframeBasis:
    """Lattice spanned by the columns of ``num / den`` in the parent basis."""

    __slots__ = ("parent", "num", "den", "_key")

    def __init__(self, parent: Lattice, num, den: int = 1, *, canonical: bool = True):
        self.parent = parent
        M = [[int(x) for x in row] for row in num]
        if len(M) != parent.m:
            raise ValueError("basis matrix must have one row per parent coordinate")
        if den <= 0:
            raise ValueError("denominator must be positive")
        if canonical:
            M = arith.hnf_cols(M)
            while den > 1:
                g = gcd(den, arith.gcd_list(x for row in M for x in row))
                if g == 1:
                    break
                M = [[x // g for x in row] for row in M]
                den //= g
        self.num = tuple(tuple(row) for row in M)
        self.den = int(den)
        self._key = None

    @classmethod
    def from_rational(cls, parent: Lattice, cols) -> "SubframeBasis":
        F = [[Fraction(x) for x in row] for row in cols]
        den = lcm(1, *[x.denominator for row in F for x in row])
        return cls(parent, [[int(x * den) for x in row] for row in F], den)

    @property
    def rank(self) -> int:
        return len(self.num[0]) if self.num and self.num[0] else 0

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.den, self.num)
        return self._key

    def __eq__(self, other):
        return isinstance(other, SubframeBasis) and self.parent == other.parent and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"SubframeBasis(num={[list(r) for r in self.num]}, den={self.den})"

    def cols(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.den) for x in row] for row in self.num]

    def gram(self) -> list[list[Fraction]]:
        return gram_of(self)

    def contains(self, x) -> bool:
        """Membership of a rational vector (parent coordinates)."""
        x = [Fraction(v) * self.den for v in x]
        if any(v.denominator != 1 for v in x):
            return False
        target = [int(v) for v in x]
        aug = [list(row) + [t] for row, t in zip(self.num, target)]
        return arith.hnf_cols(aug) == arith.hnf_cols(self.num)


def gram_of(K: SubframeBasis) -> list[list[Fraction]]:
    N = np.array(K.num, dtype=object)
    G = np.array(K.parent.gram, dtype=object)
    raw = (N.T @ G @ N).tolist()
    d2 = K.den * K.den
    return [[Fraction(int(x), d2) for x in row] for row in raw]


def is_even_integral(K: SubframeBasis) -> bool:
    g = gram_of(K)
    return all(x.denominator == 1 for row in g for x in row) and all(
        g[i][i].numerator % 2 == 0 for i in range(len(g)))


def invariant_mults(K: SubframeBasis, p: int) -> dict[int, int]:
    """Multiplicities of p^e among the invariant factors of K relative to the parent."""
    if K.rank != K.parent.m:
        raise ValueError("invariant multiplicities need a full-rank sublattice")
    vals = arith.snf_valuations(K.cols(), p)
    out: dict[int, int] = {}
    for v in vals:
        out[v] = out.get(v, 0) + 1
    return out


def scaled(L: Lattice, c: Fraction) -> SubframeBasis:
    c = Fraction(c)
    m = L.m
    return SubframeBasis(L, [[c.numerator * int(i == j) for j in range(m)] for i in range(m)], c.denominator)


def as_lattice(K: SubframeBasis, label: str = "", reduce: bool = True) -> Lattice:
    """K as a standalone lattice (its Gram in an LLL-reduced basis)."""
    g = gram_of(K)
    if any(x.denominator != 1 for row in g for x in row):
        raise LatticeError("gram: sublattice is not integral")
    G = [[int(x) for x in row] for row in g]
    if reduce:
        G, _ = lll_gram(G)
    return Lattice(G, label)


# ---------------------------------------------------------------------------
# LLL on a Gram matrix

def lll_gram(G: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)):
    """LLL-reduce a positive-definite integer Gram matrix.

    Returns ``(Gred, P)`` with ``Gred = P^T G P`` and ``P`` unimodular.
    """
    m = len(G)
    A = [[int(x) for x in row] for row in G]
    P = arith.identity(m)  # columns are the current basis vectors

    def col_op(j, i, f):  # b_j -= f * b_i
        for row in P:
            row[j] -= f * row[i]
        # update Gram: row/col j
        for t in range(m):
            A[j][t] -= f * A[i][t]
        for t in range(m):
            A[t][j] -= f * A[t][i]

    def swap(i, j):
        for row in P:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]
        for row in A:
            row[i], row[j] = row[j], row[i]

    def gso():
        mu = [[Fraction(0)] * m for _ in range(m)]
        B = [Fraction(0)] * m
        for i in range(m):
            for j in range(i):
                s = Fraction(A[i][j]) - sum(mu[j][t] * mu[i][t] * B[t] for t in range(j))
                mu[i][j] = s / B[j]
            B[i] = Fraction(A[i][i]) - sum(mu[i][t] ** 2 * B[t] for t in range(i))
        return mu, B

    k = 1
    mu, B = gso()
    while k < m:
        for j in range(k - 1, -1, -1):
            f = round(mu[k][j])
            if f:
                col_op(k, j, f)
                mu, B = gso()
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            mu, B = gso()
            k = max(k - 1, 1)
    return A, P
