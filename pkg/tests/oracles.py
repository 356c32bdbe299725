"""Brute-force reference computations for the test-suite.

Everything here is deliberately naive: plain loops over boxes, subsets and
matrices, with no shared code from the package beyond ``Lattice`` parsing.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


# -- finite fields ----------------------------------------------------------

def vectors(p, r):
    return list(itertools.product(range(p), repeat=r))


def span(gens, p, r):
    out = {tuple([0] * r)}
    for g in gens:
        out = {tuple((a + c * b) % p for a, b in zip(v, g)) for v in out for c in range(p)}
    return frozenset(out)


def subspaces(p, r, a):
    """All a-dimensional subspaces of F_p^r as frozensets of vectors."""
    layer = {span([], p, r)}
    for _ in range(a):
        nxt = set()
        for S in layer:
            for v in vectors(p, r):
                if v not in S:
                    nxt.add(_extend(S, v, p))
        layer = nxt
    return layer


def _extend(S, v, p):
    return frozenset(tuple((a + c * b) % p for a, b in zip(s, v)) for s in S for c in range(p))


def count_subspaces(p, r, a):
    return len(subspaces(p, r, a))


def _rank_mod(rows, p):
    M = [list(r) for r in rows]
    rank, col, ncol = 0, 0, len(M[0]) if M else 0
    while rank < len(M) and col < ncol:
        piv = next((i for i in range(rank, len(M)) if M[i][col] % p), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][col] % p:
                f = M[i][col]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


def count_extensions(p, r, a):
    """Number of ways to complete the first a standard basis columns to an invertible matrix.

    Full enumeration when small; otherwise column by column, counting the
    vectors outside the current span by enumeration along one completion
    (the count does not depend on which completion is followed).
    """
    fixed = [tuple(int(i == j) for i in range(r)) for j in range(a)]
    if p ** (r * (r - a)) <= 200_000:
        return sum(1 for cols in itertools.product(vectors(p, r), repeat=r - a)
                   if _rank_mod(fixed + list(cols), p) == r)
    total, cols = 1, list(fixed)
    for _ in range(r - a):
        S = span(cols, p, r)
        outside = [v for v in vectors(p, r) if v not in S]
        total *= len(outside)
        cols.append(outside[0])
    return total


# -- quadratic forms mod p --------------------------------------------------

def isotropic_lines(G, p):
    """Nonzero x mod p with Q[x]/2 = 0 mod p, up to scalars."""
    G = np.asarray(G, dtype=np.int64)
    X = np.array(vectors(p, len(G)), dtype=np.int64)
    Q = np.einsum("ni,ij,nj->n", X, G, X)
    if p == 2:
        iso = (Q // 2) % 2 == 0
    else:
        iso = Q % p == 0
    return (int(iso.sum()) - 1) // (p - 1)


def gauss_sum_float(G, p):
    """sum over x mod p of exp(2 pi i Q[x]/(2p)) (p odd), numerically."""
    G = np.asarray(G, dtype=np.int64)
    X = np.array(vectors(p, len(G)), dtype=np.int64)
    inv2 = (p + 1) // 2
    e = (np.einsum("ni,ij,nj->n", X, G, X) * inv2) % p
    return np.exp(2j * np.pi * e / p).sum()


# -- lattices ---------------------------------------------------------------

def box_vectors(G, bound):
    """All integer x with x^T G x <= bound, by a box from the inverse diagonal."""
    G = np.asarray(G, dtype=float)
    inv = np.linalg.inv(G)
    m = len(G)
    R = [int(np.floor(np.sqrt(bound * inv[i, i]) + 1e-9)) for i in range(m)]
    grids = np.array(list(itertools.product(*[range(-r, r + 1) for r in R])), dtype=np.int64)
    Gi = np.asarray(G, dtype=np.int64)
    N = np.einsum("ni,ij,nj->n", grids, Gi, grids)
    keep = N <= bound
    return grids[keep], N[keep]


def theta_brute(G, n, bound):
    """a(L, T) for all even T up to trace bound, keyed by the flattened matrix (n <= 2)."""
    X, N = box_vectors(G, bound)
    Gi = np.asarray(G, dtype=np.int64)
    out = {}
    if n == 1:
        for t in range(0, bound + 1, 2):
            out[(t,)] = int((N == t).sum())
        return out
    ips = X @ Gi @ X.T
    for a in range(0, bound + 1, 2):
        for c in range(0, bound + 1 - a, 2):
            A = N == a
            C = N == c
            sub = ips[np.ix_(A, C)]
            vals, cnts = np.unique(sub, return_counts=True)
            for b, ct in zip(vals.tolist(), cnts.tolist()):
                out[(a, b, b, c)] = int(ct)
    return out


def automorphisms_brute(G, box=3):
    G = np.asarray(G, dtype=np.int64)
    m = len(G)
    found = 0
    for entries in itertools.product(range(-box, box + 1), repeat=m * m):
        X = np.array(entries, dtype=np.int64).reshape(m, m)
        if np.array_equal(X.T @ G @ X, G):
            found += 1
    return found


def reduced_binary_forms(D):
    """GL_2(Z) classes of positive definite forms ax^2+bxy+cy^2 with b^2-4ac = D < 0."""
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(0, a + 1):
            num = b * b - D
            if num % (4 * a) == 0:
                c = num // (4 * a)
                if c >= a:
                    out.append((a, b, c))
        a += 1
    return out


def lattices_between(G, p):
    """All K with pL <= K <= p^-1 L, as HNF row bases of pK (inside L) with det p^m."""
    m = len(G)
    q = p * p
    found = []
    for piv in itertools.product((1, p, q), repeat=m):
        if int(np.prod(piv)) != p ** m:
            continue
        slots = [(i, j) for i in range(m) for j in range(i + 1, m)]
        for vals in itertools.product(*[range(piv[j]) for _, j in slots]):
            H = np.diag(piv).astype(object)
            for (i, j), v in zip(slots, vals):
                H[i, j] = v
            # need p^2 Z^m inside the row span: q * H^-1 integral
            Hf = [[Fraction(int(x)) for x in row] for row in H.tolist()]
            inv = _inv(Hf)
            if all((q * x).denominator == 1 for row in inv for x in row):
                found.append(H)
    return found


def _inv(M):
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        f = A[c][c]
        A[c] = [x / f for x in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                g = A[i][c]
                A[i] = [x - g * y for x, y in zip(A[i], A[c])]
    return [row[n:] for row in A]


def neighbors_brute(G, p, r):
    """HNF bases (of pK, in L-coordinates) of all p^r-neighbours of L."""
    Gi = np.array(G, dtype=object)
    m = len(G)
    q = p * p
    out = []
    for H in lattices_between(G, p):
        # with det p^m, "rank r mod p" forces invariants 1 (r times), p (m-2r), p^2 (r)
        if _rank_mod(H.tolist(), p) != r:
            continue
        gram = H.dot(Gi).dot(H.T)  # Gram of pK, must be p^2 * even
        if all(x % q == 0 for x in gram.ravel()) and all((gram[i, i] // q) % 2 == 0 for i in range(m)):
            out.append(tuple(map(tuple, H.tolist())))
    return out


def subgroups_mod_p2(n, p):
    """All subgroups of (Z/p^2)^n (n <= 2), as frozensets of tuples."""
    q = p * p
    elems = list(itertools.product(range(q), repeat=n))
    found = set()
    for g1 in elems:
        for g2 in elems if n > 1 else [tuple([0] * n)]:
            S = {tuple(((a * x + b * y) % q) for x, y in zip(g1, g2)) for a in range(q) for b in range(q)}
            found.add(frozenset(S))
    return found
