"""Quadratic spaces over prime fields.

A space is stored as the Gram matrix of its bilinear form together with,
when p = 2, the values q(e_i) on the basis (the bilinear form alone does not
determine q in characteristic 2).  For odd p the form is q(x) = x.B.x / 2.
This matches the reduction of an even lattice: B = Gram mod p and
q(x) = Gram[x]/2 mod p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .arith import CapacityError, CycInt, beta, det_int, kronecker

#: largest number of candidate matrices a brute-force count may touch
BRUTE_FORCE_LIMIT = 2 ** 22
#: largest ambient size p**dim for brute-force subspace enumeration
SUBSPACE_LIMIT = 2 ** 20


# ---------------------------------------------------------------------------
# linear algebra mod p

def rref_mod(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p; returns (nonzero rows, pivot columns)."""
    A = np.array(M, dtype=np.int64) % p
    if A.ndim == 1:
        A = A[None, :]
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        f = A[:, c].copy()
        f[r] = 0
        A = (A - np.outer(f, A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank_mod(M, p: int) -> int:
    return len(rref_mod(M, p)[1])


def nullspace_mod(M, p: int) -> np.ndarray:
    """Basis (as rows) of {x : M x = 0 mod p}."""
    A = np.array(M, dtype=np.int64) % p
    ncols = A.shape[1]
    R, piv = rref_mod(A, p) if A.size else (np.zeros((0, ncols), dtype=np.int64), [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = np.zeros(ncols, dtype=np.int64)
        x[f] = 1
        for row, c in zip(R, piv):
            x[c] = (-row[f]) % p
        basis.append(x)
    return np.array(basis, dtype=np.int64).reshape(len(basis), ncols)


def solve_right_inverse(A, p: int) -> np.ndarray:
    """F with A @ F = I mod p for a full-row-rank r x m matrix A."""
    A = np.array(A, dtype=np.int64) % p
    r, m = A.shape
    R, piv = rref_mod(np.concatenate([A, np.eye(r, dtype=np.int64)], axis=1), p)
    if any(c >= m for c in piv):
        raise ValueError("matrix does not have full row rank mod p")
    F = np.zeros((m, r), dtype=np.int64)
    for row, c in zip(R, piv):
        F[c] = row[m:]
    return F % p


def all_vectors(p: int, m: int) -> np.ndarray:
    """Every vector of F_p^m as rows, in lexicographic order."""
    if p ** m > 4 * SUBSPACE_LIMIT:
        raise CapacityError(f"F_{p}^{m} is too large to list")
    grids = np.indices((p,) * m).reshape(m, -1).T
    return grids.astype(np.int64)


def normalized_mask(X: np.ndarray, p: int) -> np.ndarray:
    """Rows that are nonzero with first nonzero entry equal to 1."""
    nz = X != 0
    has = nz.any(axis=1)
    first = np.argmax(nz, axis=1)
    lead = X[np.arange(len(X)), first]
    return has & (lead == 1)


def enumerate_subspaces(p: int, dim: int, d: int) -> Iterator[np.ndarray]:
    """Every d-dimensional subspace of F_p^dim, as its RREF basis (d x dim)."""
    if d < 0 or d > dim:
        return
    if d == 0:
        yield np.zeros((0, dim), dtype=np.int64)
        return
    for piv in itertools.combinations(range(dim), d):
        free_slots = [(i, c) for i, pc in enumerate(piv) for c in range(pc + 1, dim)
                      if c not in piv]
        for vals in itertools.product(range(p), repeat=len(free_slots)):
            M = np.zeros((d, dim), dtype=np.int64)
            for i, pc in enumerate(piv):
                M[i, pc] = 1
            for (i, c), v in zip(free_slots, vals):
                M[i, c] = v
            yield M


# ---------------------------------------------------------------------------
# quadratic spaces

@dataclass(frozen=True)
class FFQuadSpace:
    p: int
    bilin: tuple[tuple[int, ...], ...]
    qdiag: tuple[int, ...] | None = None

    def __post_init__(self):
        p = self.p
        B = tuple(tuple(int(x) % p for x in row) for row in self.bilin)
        object.__setattr__(self, "bilin", B)
        n = len(B)
        if any(len(row) != n for row in B) or any(B[i][j] != B[j][i] for i in range(n) for j in range(n)):
            raise ValueError("bilinear Gram must be square and symmetric")
        if p == 2:
            if self.qdiag is None or len(self.qdiag) != n:
                raise ValueError("p = 2 needs the quadratic values q(e_i)")
            object.__setattr__(self, "qdiag", tuple(int(x) % 2 for x in self.qdiag))
            if any(B[i][i] for i in range(n)):
                raise ValueError("the polar form of a quadratic form over F_2 is alternating")
        else:
            object.__setattr__(self, "qdiag", None)

    @classmethod
    def from_even_gram(cls, G, p: int) -> "FFQuadSpace":
        """Reduction mod p of an even integral Gram matrix, with q = G[x]/2."""
        G = [[int(x) for x in row] for row in G]
        if p == 2:
            if any(G[i][i] % 2 for i in range(len(G))):
                raise ValueError("Gram matrix must be even")
            return cls(2, G, tuple((G[i][i] // 2) % 2 for i in range(len(G))))
        return cls(p, G)

    @classmethod
    def from_half_gram(cls, H, p: int) -> "FFQuadSpace":
        """Odd p only: the space with q(x) = x.H.x."""
        if p == 2:
            raise ValueError("half-Gram description needs p odd")
        return cls(p, [[2 * int(x) for x in row] for row in H])

    @property
    def dim(self) -> int:
        return len(self.bilin)

    def bilin_array(self) -> np.ndarray:
        return np.array(self.bilin, dtype=np.int64).reshape(self.dim, self.dim)

    def q_values(self, X) -> np.ndarray:
        """q evaluated on each row of X."""
        X = np.asarray(X, dtype=np.int64) % self.p
        if X.ndim == 1:
            X = X[None, :]
        B = self.bilin_array()
        if self.p == 2:
            qd = np.array(self.qdiag, dtype=np.int64)
            upper = np.triu(B, 1)
            return ((X @ qd) + np.einsum("ni,ij,nj->n", X, upper, X)) % 2
        inv2 = (self.p + 1) // 2
        return (np.einsum("ni,ij,nj->n", X, B, X) % self.p) * inv2 % self.p

    def restrict(self, C) -> "FFQuadSpace":
        """Form pulled back along the columns of C (dim x a)."""
        C = np.asarray(C, dtype=np.int64).reshape(self.dim, -1) % self.p
        Bs = (C.T @ self.bilin_array() @ C) % self.p
        if self.p == 2:
            return FFQuadSpace(2, Bs.tolist(), tuple(int(v) for v in self.q_values(C.T)))
        return FFQuadSpace(self.p, Bs.tolist())

    def is_totally_isotropic(self, rows) -> bool:
        if self.dim == 0:
            return True
        R = np.asarray(rows, dtype=np.int64).reshape(-1, self.dim)
        if R.shape[0] == 0:
            return True
        if np.any(self.q_values(R)):
            return False
        return not np.any((R @ self.bilin_array() @ R.T) % self.p)


def zero_space(p: int, dim: int) -> FFQuadSpace:
    return FFQuadSpace(p, [[0] * dim for _ in range(dim)], (0,) * dim if p == 2 else None)


@dataclass(frozen=True)
class WittReport:
    radical_dim: int
    witt_type: int | str  # +1, -1 or "odd"
    nondegenerate_dim: int


def _diagonalize_odd(B: np.ndarray, p: int) -> list[int]:
    """Diagonal entries of a congruent diagonal form (odd p)."""
    A = B.copy() % p
    n = A.shape[0]
    diag = []
    for t in range(n):
        sub = A[t:, t:]
        if not sub.any():
            diag.extend([0] * (n - t))
            break
        d = np.nonzero(np.diag(sub))[0]
        if d.size:
            i = t + d[0]
        else:
            # find i != j with A[i, j] != 0 and replace e_i by e_i + e_j
            ii, jj = np.nonzero(sub)
            i, j = t + ii[0], t + jj[0]
            A[i] = (A[i] + A[j]) % p
            A[:, i] = (A[:, i] + A[:, j]) % p
        A[[t, i]] = A[[i, t]]
        A[:, [t, i]] = A[:, [i, t]]
        a = int(A[t, t])
        inv = pow(a, -1, p)
        for r in range(t + 1, n):
            f = (A[r, t] * inv) % p
            if f:
                A[r] = (A[r] - f * A[t]) % p
                A[:, r] = (A[:, r] - f * A[:, t]) % p
        diag.append(a)
    return diag


def _arf_invariant(space: FFQuadSpace, basis: np.ndarray) -> int:
    """Arf invariant of q restricted to the span of ``basis`` (nondegenerate)."""
    B = space.bilin_array()
    vecs = [v.copy() for v in basis]
    arf = 0
    while vecs:
        e = vecs.pop(0)
        k = next((i for i, w in enumerate(vecs) if (e @ B @ w) % 2), None)
        if k is None:
            raise ValueError("span is degenerate")
        f = vecs.pop(k)
        arf ^= int(space.q_values(e)[0]) & int(space.q_values(f)[0])
        rest = []
        for w in vecs:
            w = (w + ((w @ B @ f) % 2) * e + ((w @ B @ e) % 2) * f) % 2
            rest.append(w)
        vecs = rest
    return arf


def classify(space: FFQuadSpace) -> WittReport:
    """Radical dimension and Witt type of the nondegenerate quotient."""
    p, n = space.p, space.dim
    if n == 0:
        return WittReport(0, 1, 0)
    B = space.bilin_array()
    if p != 2:
        diag = _diagonalize_odd(B, p)
        nonzero = [a for a in diag if a]
        rad = n - len(nonzero)
        n0 = len(nonzero)
        if n0 % 2:
            return WittReport(rad, "odd", n0)
        det = 1
        for a in nonzero:
            det = det * a % p
        return WittReport(rad, kronecker((-1) ** (n0 // 2) * det, p) if n0 else 1, n0)
    K = nullspace_mod(B, 2)
    qk = space.q_values(K) if len(K) else np.zeros(0, dtype=np.int64)
    if qk.any():
        rad = len(K) - 1
        return WittReport(rad, "odd", n - rad)
    # complement of the radical, then Arf invariant
    R, piv = rref_mod(K, 2) if len(K) else (K, [])
    comp = np.array([np.eye(n, dtype=np.int64)[c] for c in range(n) if c not in piv],
                    dtype=np.int64).reshape(-1, n)
    arf = _arf_invariant(space, comp) if len(comp) else 0
    return WittReport(len(K), 1 if arf == 0 else -1, n - len(K))


def _nondegenerate_ti_count(q: int, n0: int, witt, e: int) -> int:
    if e == 0:
        return 1
    num, den = 1, 1
    if witt == "odd":
        s = (n0 - 1) // 2
        for i in range(e):
            num *= q ** (2 * (s - i)) - 1 if s - i >= 0 else 0
            den *= q ** (i + 1) - 1
    else:
        s = n0 // 2
        eps = witt
        for i in range(e):
            if s - i <= 0:
                return 0
            num *= (q ** (s - i) - eps) * (q ** (s - i - 1) + eps)
            den *= q ** (i + 1) - 1
    if num == 0:
        return 0
    assert num % den == 0
    return num // den


def count_totally_isotropic(space: FFQuadSpace, d: int) -> int:
    """Number of d-dimensional totally isotropic subspaces.

    The space splits as radical + nondegenerate part; a totally isotropic
    subspace is an isotropic subspace of the quotient together with a choice
    of intersection with the radical and a linear lift.

    >>> H = FFQuadSpace.from_even_gram([[0, 1], [1, 0]], 3)
    >>> count_totally_isotropic(H, 1)
    2
    """
    if d < 0 or d > space.dim:
        return 0
    if d == 0:
        return 1
    w = classify(space)
    q, rho = space.p, w.radical_dim
    total = 0
    for e in range(0, d + 1):
        if d - e > rho:
            continue
        ne = _nondegenerate_ti_count(q, w.nondegenerate_dim, w.witt_type, e)
        if ne:
            total += ne * beta(q, rho, d - e) * q ** (e * (rho - d + e))
    return total


def count_totally_isotropic_bruteforce(space: FFQuadSpace, d: int) -> int:
    if space.p ** space.dim > SUBSPACE_LIMIT:
        raise CapacityError("space too large for subspace enumeration")
    return sum(1 for S in enumerate_subspaces(space.p, space.dim, d) if space.is_totally_isotropic(S))


def totally_isotropic_subspaces(space: FFQuadSpace, d: int) -> list[np.ndarray]:
    """Every totally isotropic d-subspace as an RREF basis, built one vector at a time."""
    p, n = space.p, space.dim
    if d == 0:
        return [np.zeros((0, n), dtype=np.int64)]
    V = all_vectors(p, n)
    iso = V[(space.q_values(V) == 0) & normalized_mask(V, p)]
    B = space.bilin_array()
    layer = {tuple(v): v[None, :] for v in iso}
    for _ in range(d - 1):
        nxt = {}
        for S in layer.values():
            _, piv = rref_mod(S, p)
            ok = np.all((iso @ B @ S.T) % p == 0, axis=1)
            # candidates reduced against S: zero in the pivot columns
            ok &= np.all(iso[:, piv] == 0, axis=1)
            for w in iso[ok]:
                R, _ = rref_mod(np.vstack([S, w]), p)
                key = tuple(R.ravel())
                if key not in nxt:
                    nxt[key] = R
        layer = nxt
    return [layer[k] for k in sorted(layer)]


def alpha_j(space: FFQuadSpace, n: int, j: int, r0: int, r2: int) -> int:
    """Totally isotropic subspaces of codimension n - j in the residue space."""
    if space.dim != n - r0 - r2:
        raise ValueError("residue space has the wrong dimension")
    if j < r0 + r2:
        return 0
    if j == r0 + r2:
        return 1
    return count_totally_isotropic(space, space.dim - (n - j))


# ---------------------------------------------------------------------------
# representation counts

def _all_matrices(p: int, r: int, a: int) -> np.ndarray:
    if p ** (r * a) > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"{p}^{r * a} candidate matrices exceed the brute-force limit")
    return all_vectors(p, r * a).reshape(-1, r, a) if r * a else np.zeros((1, r, a), dtype=np.int64)


def _full_rank_mask(Cs: np.ndarray, p: int) -> np.ndarray:
    N, r, a = Cs.shape
    if a == 0:
        return np.ones(N, dtype=bool)
    combos = all_vectors(p, a)
    combos = combos[normalized_mask(combos, p)]
    imgs = np.einsum("nra,ma->nmr", Cs, combos) % p
    return ~np.any(np.all(imgs == 0, axis=2), axis=1)


def rep_count_rstar(V: FFQuadSpace, U: FFQuadSpace) -> tuple[int, int]:
    """(r*, R*): rank-a representations of U by V, and those up to O(U)."""
    if V.p != U.p:
        raise ValueError("spaces over different fields")
    rs = _rstar(V, U)
    o = _rstar(U, U)
    if rs % o:
        raise ArithmeticError("representation count not divisible by o(U)")
    return rs, rs // o


@lru_cache(maxsize=None)
def _rstar(V: FFQuadSpace, U: FFQuadSpace) -> int:
    p, r, a = V.p, V.dim, U.dim
    if a > r:
        return 0
    if a == 0:
        return 1
    Cs = _all_matrices(p, r, a)
    B = V.bilin_array()
    G = np.einsum("nia,ij,njb->nab", Cs, B, Cs) % p
    ok = np.all(G == U.bilin_array(), axis=(1, 2))
    if p == 2:
        qd = np.array(U.qdiag, dtype=np.int64)
        cols = Cs.transpose(0, 2, 1).reshape(-1, r)
        qv = V.q_values(cols).reshape(-1, a)
        ok &= np.all(qv == qd, axis=1)
    Cs = Cs[ok]
    return int(_full_rank_mask(Cs, p).sum())


def orth_order(U: FFQuadSpace) -> int:
    """|O(U)| by brute force over all square matrices."""
    return _rstar(U, U)


# ---------------------------------------------------------------------------
# character sums

def _value_histogram(exps_of_chunk, p: int, vectors: Iterator[np.ndarray]) -> np.ndarray:
    hist = np.zeros(p, dtype=np.int64)
    for X in vectors:
        hist += np.bincount(exps_of_chunk(X), minlength=p)
    return hist


def _vector_chunks(p: int, m: int, chunk_dim: int = 8) -> Iterator[np.ndarray]:
    """F_p^m in blocks: loop over the leading coordinates, vectorize the rest."""
    tail = min(m, chunk_dim)
    while p ** tail > 2 ** 18 and tail > 1:
        tail -= 1
    T = all_vectors(p, tail)
    for head in itertools.product(range(p), repeat=m - tail):
        H = np.broadcast_to(np.array(head, dtype=np.int64), (len(T), m - tail))
        yield np.concatenate([H, T], axis=1)


def gauss_sum_lattice(Qbar, p: int, c: int = 1) -> CycInt:
    """Sum over u in F_p^m of zeta_p^(c * Q[u]/2), exactly.

    >>> gauss_sum_lattice([[0, 1], [1, 0]], 3).to_int()
    3
    """
    if p == 2:
        raise ValueError("gauss_sum_lattice needs an odd prime")
    Q = np.array(Qbar, dtype=np.int64)
    m = Q.shape[0]
    if det_int(Q.tolist()) % p == 0:
        raise ValueError(f"p = {p} divides the level: the form is degenerate mod p")
    if c % p == 0:
        raise ValueError("scaling must be a unit mod p")
    Qm = Q % p
    scale = (c * (p + 1) // 2) % p

    def exps(X):
        return (np.einsum("ni,ij,nj->n", X, Qm, X) % p) * scale % p

    return CycInt(p, _value_histogram(exps, p, _vector_chunks(p, m)).tolist())


@lru_cache(maxsize=None)
def _nonsingular_symmetric(p: int, a: int) -> np.ndarray:
    idx = [(i, j) for i in range(a) for j in range(i, a)]
    vals = all_vectors(p, len(idx))
    W = np.zeros((len(vals), a, a), dtype=np.int64)
    for t, (i, j) in enumerate(idx):
        W[:, i, j] = vals[:, t]
        W[:, j, i] = vals[:, t]
    dets = np.array([det_int(w.tolist()) % p for w in W]) if a else np.ones(1)
    return W[dets != 0]


@lru_cache(maxsize=None)
def _character_sum_over_subspaces(V: FFQuadSpace, a: int) -> CycInt:
    """Sum of the W-character sums over all a-dimensional subspaces of V."""
    p = V.p
    by_gram: dict[bytes, int] = {}
    for S in enumerate_subspaces(p, V.dim, a):
        key = ((S @ V.bilin_array() @ S.T) % p).tobytes()
        by_gram[key] = by_gram.get(key, 0) + 1
    acc = CycInt.from_int(p, 0)
    for key, mult in by_gram.items():
        BS = np.frombuffer(key, dtype=np.int64).reshape(a, a)
        acc = acc + mult * _gram_character_sum(p, BS)
    return acc


def _gram_character_sum(p: int, BS: np.ndarray) -> CycInt:
    a = BS.shape[0]
    if a == 0:
        return CycInt.from_int(p, 1)
    W = _nonsingular_symmetric(p, a)
    e = (np.einsum("ij,nji->n", BS, W) % p) * ((p + 1) // 2) % p
    return CycInt(p, np.bincount(e, minlength=p).tolist())


def thm45_closing_identity_check(V: FFQuadSpace, n: int, j: int, r: int) -> bool:
    """Check the character-sum identity that closes the T-tilde expansion.

    Left side: sum over a of beta(n-r-a, j-r-a) times the sum over a-dim
    subspaces S of V and nonsingular symmetric W of zeta^(tr(Gram_S W)/2).
    Right side: p^((j-r)(j-r+1)/2) times the number of totally isotropic
    (j-r)-dimensional subspaces of V.
    """
    p = V.p
    if p == 2:
        raise ValueError("closing identity check is implemented for odd p only")
    if V.dim != n - r:
        raise ValueError("V must have dimension n - r")
    if not r <= j <= n:
        raise ValueError("need r <= j <= n")
    if p ** V.dim > SUBSPACE_LIMIT:
        raise CapacityError("space too large")
    lhs = CycInt.from_int(p, 0)
    for a in range(0, j - r + 1):
        lhs = lhs + int(beta(p, n - r - a, j - r - a)) * _character_sum_over_subspaces(V, a)
    if not lhs.is_rational():
        return False
    _, Rstar = rep_count_rstar(V, zero_space(p, j - r))
    rhs = p ** ((j - r) * (j - r + 1) // 2) * Rstar
    return lhs.to_int() == rhs


def quadratic_space_classes(p: int, dim: int) -> list[FFQuadSpace]:
    """One representative of each isometry class of quadratic spaces of given dim (odd p)."""
    if p == 2:
        raise ValueError("odd p only")
    nonsq = next(a for a in range(2, p) if kronecker(a, p) == -1)
    out = []
    for rad in range(dim + 1):
        n0 = dim - rad
        dets = [1] if n0 == 0 else [1, nonsq]
        for last in dets:
            h = [1] * max(n0 - 1, 0) + ([last] if n0 else []) + [0] * rad
            out.append(FFQuadSpace.from_half_gram(np.diag(h).tolist() if dim else [], p))
    return out
