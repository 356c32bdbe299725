"""Neighbour lattices, isometry testing and genus enumeration.

A p^r-neighbour of L is an even lattice K with pL <= K <= p^-1 L whose
invariant factors relative to L are p^-1 (r times), 1 and p (r times).  Each
one is determined by a totally isotropic r-dimensional subspace of L/pL
together with a lift of a basis of that subspace whose Gram matrix vanishes
modulo p^2 (and whose norms vanish modulo 2p^2).  For fixed subspace there
are p^(r(r-1)/2) such lifts up to the relevant equivalence.

Isometries and automorphisms are found by backtracking over short vectors of
an LLL-reduced basis; automorphism group orders come from a stabilizer chain
in the style of Plesken and Souvignier.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import arith
from .arith import CapacityError
from .ffquad import FFQuadSpace, count_totally_isotropic, nullspace_mod, rref_mod, solve_right_inverse, \
    totally_isotropic_subspaces
from .lattice import Lattice, SubframeBasis, as_lattice, lll_gram
from .theta import CoeffTable, canonical_keys, canonicalize_T, key_of, shells, short_vectors, theta_table

DEFAULT_ISOMETRY_BUDGET = 10 ** 7


class BudgetExceeded(RuntimeError):
    """A backtracking search ran out of nodes before reaching an answer."""


# ---------------------------------------------------------------------------
# neighbours

@dataclass(frozen=True)
class NeighborSpec:
    """Data fixing one neighbour: K = (preimage of the perp of span E) + p^-1 span(X)."""
    E: np.ndarray       # r x m, RREF basis of the isotropic subspace mod p
    X: np.ndarray       # m x r, integer lifts x_j = e_j + p*y_j
    perp: np.ndarray    # rows spanning {z : E G z = 0 mod p} modulo p


@dataclass
class NeighborSet:
    base: Lattice
    p: int
    r: int
    specs: list[NeighborSpec]
    _members: list[SubframeBasis] | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.specs)

    @property
    def members(self) -> list[SubframeBasis]:
        if self._members is None:
            self._members = [neighbor_lattice(self.base, self.p, s) for s in self.specs]
        return self._members


def neighbor_lattice(L: Lattice, p: int, spec: NeighborSpec) -> SubframeBasis:
    m = L.m
    gens = [p * v for v in spec.perp] + [p * p * np.eye(m, dtype=np.int64)[i] for i in range(m)] + list(spec.X.T)
    M = np.array(gens, dtype=np.int64).T
    return SubframeBasis(L, M.tolist(), p)


def _lift_choices(r: int, p: int):
    """Free upper-triangle entries of the matrix A of pairings B(e_i, y_j)."""
    slots = [(i, j) for i in range(r) for j in range(i + 1, r)]
    for vals in itertools.product(range(p), repeat=len(slots)):
        yield dict(zip(slots, vals))


def neighbor_specs(L: Lattice, p: int, r: int, max_subspaces: int = 10 ** 6) -> list[NeighborSpec]:
    m, G = L.m, L.G
    space = FFQuadSpace.from_even_gram(L.gram, p)
    if count_totally_isotropic(space, r) > max_subspaces:
        raise CapacityError("too many isotropic subspaces")
    subs = totally_isotropic_subspaces(space, r)
    out = []
    for E in subs:
        EG = (E @ G) % p
        perp = nullspace_mod(EG, p)
        if r == 0:
            out.append(NeighborSpec(E, np.zeros((m, 0), dtype=np.int64), perp))
            continue
        F = solve_right_inverse(EG, p)           # (E G) F = I mod p
        C = E @ G @ E.T                           # integer Gram of the naive lift
        for free in _lift_choices(r, p):
            A = np.zeros((r, r), dtype=np.int64)
            for i in range(r):
                A[i, i] = (-(C[i, i] // (2 * p))) % p
            for (i, j), v in free.items():
                A[i, j] = v
                A[j, i] = (-(C[i, j] // p) - v) % p
            Y = (F @ A) % p
            X = E.T + p * Y
            out.append(NeighborSpec(E, X, perp))
    return out


def validate_neighbor(L: Lattice, p: int, r: int, spec: NeighborSpec) -> None:
    """Assert the neighbour invariants with integer arithmetic.

    Even integrality: the lifts pair to 0 mod p^2 and have norms 0 mod 2p^2,
    and pair into p with the perp lattice.  Invariant factors: the span of
    pK modulo p is the r-dim subspace E while [L : pK] = p^m.
    """
    G, X = L.G, spec.X
    gx = X.T @ G @ X
    if np.any(gx % (p * p)) or np.any(np.diag(gx) % (2 * p * p)):
        raise AssertionError("neighbour lift is not even integral")
    if np.any((spec.E @ G @ spec.perp.T) % p):
        raise AssertionError("perp lattice does not pair into p with the subspace")
    if np.any((X.T @ G @ spec.perp.T) % p):
        raise AssertionError("lift does not pair integrally with the perp lattice")
    if len(spec.perp) != L.m - r or rref_mod(X.T, p)[0].tolist() != spec.E.tolist():
        raise AssertionError("wrong invariant factors")


def neighbors(L: Lattice, p: int, r: int, validate: bool = True, max_subspaces: int = 10 ** 6) -> NeighborSet:
    """Every p^r-neighbour of L."""
    if L.level % p == 0:
        raise ValueError(f"p = {p} divides the level {L.level}")
    if r < 0 or r > L.k:
        raise ValueError("need 0 <= r <= k")
    specs = neighbor_specs(L, p, r, max_subspaces)
    if validate:
        for s in specs:
            validate_neighbor(L, p, r, s)
    return NeighborSet(L, p, r, specs)


# ---------------------------------------------------------------------------
# theta tables of all neighbours at once

class NeighborThetaEngine:
    """Theta tables of many lattices between L and p^-1 L.

    Every vector u of K with Q[u] <= bound is w/p for some w in L with
    Q[w] = p^2 Q[u].  Those w are listed once and bucketed by w mod p; a
    neighbour only ever contains vectors from the p^r buckets lying over its
    isotropic subspace, which keeps the per-neighbour work small.
    """

    def __init__(self, L: Lattice, p: int, n: int, bound: int):
        if n not in (1, 2):
            raise ValueError("degree must be 1 or 2")
        self.L, self.p, self.n, self.bound = L, p, n, bound
        self.keys = canonical_keys(n, bound)
        norms = [p * p * t for t in range(2, bound + 1, 2)]
        sh = shells(L.gram, norms)
        W = np.concatenate([sh[t] for t in norms]) if norms else np.zeros((0, L.m), dtype=np.int64)
        codes = self._codes(W % p)
        order = np.argsort(codes, kind="stable")
        self.codes = codes[order]
        W = W[order]
        self.norm = np.concatenate([np.full(len(sh[t]), t // (p * p), dtype=np.int32) for t in norms])[order] \
            if norms else np.zeros(0, dtype=np.int32)
        del sh
        top = int(np.abs(W).max()) if W.size else 0
        self.W = W.astype(np.int8 if top < 127 else np.int16 if top < 32767 else np.int64)

    def _codes(self, R: np.ndarray) -> np.ndarray:
        return R @ (self.p ** np.arange(R.shape[1] - 1, -1, -1, dtype=np.int64)) if len(R) else np.zeros(0, np.int64)

    def _bucket(self, code: int) -> np.ndarray:
        lo = np.searchsorted(self.codes, code, "left")
        hi = np.searchsorted(self.codes, code, "right")
        return np.arange(lo, hi)

    def members(self, spec: NeighborSpec) -> np.ndarray:
        """Indices into the listed vectors of those lying in p*K."""
        p = self.p
        E, X = spec.E, spec.X
        r = E.shape[0]
        idx = []
        for c in itertools.product(range(p), repeat=r):
            c = np.array(c, dtype=np.int64)
            res = (c @ E) % p if r else np.zeros(self.L.m, dtype=np.int64)
            b = self._bucket(int(self._codes(res[None, :])[0]))
            if len(b) == 0:
                continue
            diff = self.W[b].astype(np.int64) - (X @ c if r else 0)
            if r:
                test = (diff // p) @ self.L.G @ E.T % p
                ok = ~np.any(test, axis=1)
                b = b[ok]
            idx.append(b)
        return np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)

    def table(self, spec: NeighborSpec) -> dict[tuple, int]:
        sel = self.members(spec)
        return self._table_from(sel)

    def _table_from(self, sel: np.ndarray) -> dict[tuple, int]:
        p2 = self.p * self.p
        norms = self.norm[sel]
        vals, cnts = np.unique(norms, return_counts=True)
        count = dict(zip(vals.tolist(), cnts.tolist()))
        out = {}
        ip_cache = {}
        for K in self.keys:
            if self.n == 1:
                t = K[0][0]
                out[key_of(K)] = 1 if t == 0 else count.get(t, 0)
                continue
            (a, b), (_, c) = K
            if a * c - b * b == 0:
                out[key_of(K)] = 1 if a == 0 else count.get(a, 0)
                continue
            if (a, c) not in ip_cache:
                A = sel[norms == a]
                C = sel[norms == c]
                ips = (self.W[A].astype(np.int64) @ self.L.G) @ self.W[C].astype(np.int64).T
                v, ct = np.unique(ips, return_counts=True)
                ip_cache[(a, c)] = dict(zip(v.tolist(), ct.tolist()))
            out[key_of(K)] = ip_cache[(a, c)].get(b * p2, 0)
        return out

    def summed_table(self, specs) -> CoeffTable:
        tot = {key_of(K): 0 for K in self.keys}
        for s in specs:
            for k, v in self.table(s).items():
                tot[k] += v
        return CoeffTable(self.n, self.bound, {k: Fraction(v) for k, v in tot.items()})


def neighbor_count(L: Lattice, p: int, r: int) -> int:
    """Number of p^r-neighbours of L, from the isotropic subspace count."""
    space = FFQuadSpace.from_even_gram(L.gram, p)
    return count_totally_isotropic(space, r) * p ** (r * (r - 1) // 2)


def smallest_good_prime(L: Lattice) -> int:
    return next(q for q in arith.primes_up_to(10 * L.level + 10) if L.level % q)


@lru_cache(maxsize=64)
def genus_has_one_class(L: Lattice) -> bool:
    return len(genus_classes(L, smallest_good_prime(L)).classes) == 1


def neighbor_theta_sum(L: Lattice, p: int, r: int, n: int, bound: int, method: str = "auto") -> CoeffTable:
    """Sum of theta tables over all p^r-neighbours of L.

    ``method="direct"`` lists the neighbours and counts vectors in each.
    ``method="classes"`` uses that every neighbour lies in the genus of L:
    when that genus is a single class each neighbour is isometric to L and
    the sum is the neighbour count times theta(L).  ``"auto"`` takes the
    class route whenever it applies.
    """
    if method not in ("auto", "direct", "classes"):
        raise ValueError(f"unknown method {method!r}")
    if r == 0:
        return theta_table(L, n, bound)
    if method == "classes" or (method == "auto" and genus_has_one_class(L)):
        if not genus_has_one_class(L):
            raise ValueError("the class route needs a genus with one class")
        if L.level % p == 0:
            raise ValueError(f"p = {p} divides the level {L.level}")
        return theta_table(L, n, bound).scaled(neighbor_count(L, p, r))
    engine = _engine(L, p, n, bound)
    return engine.summed_table(neighbors(L, p, r).specs)


@lru_cache(maxsize=16)
def _engine(L: Lattice, p: int, n: int, bound: int) -> NeighborThetaEngine:
    return NeighborThetaEngine(L, p, n, bound)


# ---------------------------------------------------------------------------
# isometries and automorphisms

class _ShortVectorData:
    def __init__(self, gram, max_norm: int):
        S, N = short_vectors(gram, max_norm)
        keep = N > 0
        self.S, self.N = S[keep], N[keep]
        self.G = np.array(gram, dtype=np.int64)
        SG = self.S @ self.G
        self.ip = SG @ self.S.T
        self.index = {tuple(v): i for i, v in enumerate(self.S.tolist())}


class _Search:
    def __init__(self, target_gram, data: _ShortVectorData, budget: int):
        self.T = np.array(target_gram, dtype=np.int64)
        self.d = data
        self.budget = budget
        self.nodes = 0
        m = len(self.T)
        self.level_cands = [np.nonzero(data.N == self.T[i, i])[0] for i in range(m)]

    def complete(self, prefix: list[int]):
        """Extend chosen image indices to a full Gram-preserving assignment."""
        m = len(self.T)
        chosen = list(prefix)

        def rec(level):
            if level == m:
                return True
            cand = self.level_cands[level]
            for j, idx in enumerate(chosen):
                cand = cand[self.d.ip[idx, cand] == self.T[level, j]]
                if not len(cand):
                    return False
            for c in cand:
                self.nodes += 1
                if self.nodes > self.budget:
                    raise BudgetExceeded("isometry search exhausted its node budget")
                chosen.append(int(c))
                if rec(level + 1):
                    return True
                chosen.pop()
            return False

        if rec(len(prefix)):
            return np.array([self.d.S[i] for i in chosen], dtype=np.int64).T
        return None


def _inverse_unimodular(P) -> np.ndarray:
    inv = arith.inverse_frac(P)
    return np.array([[int(x) for x in row] for row in inv], dtype=np.int64)


def is_isometric(L1: Lattice, L2: Lattice, budget: int = DEFAULT_ISOMETRY_BUDGET):
    """Integer matrix X with X^T gram1 X = gram2, or None if not isometric.

    Raises :class:`BudgetExceeded` if the search is cut off.
    """
    if L1.m != L2.m or L1.det != L2.det or L1.level != L2.level:
        return None
    G1r, P1 = lll_gram(L1.gram)
    G2r, P2 = lll_gram(L2.gram)
    data = _ShortVectorData(G1r, max(G2r[i][i] for i in range(L2.m)))
    Y = _Search(G2r, data, budget).complete([])
    if Y is None:
        return None
    X = np.array(P1, dtype=np.int64) @ Y @ _inverse_unimodular(P2)
    assert np.array_equal(X.T @ L1.G @ X, L2.G)
    return X


@dataclass(frozen=True)
class AutGroup:
    order: int
    generators: tuple[np.ndarray, ...]   # act on coordinate columns: g^T G g = G


def _orbit(start: set[int], gens, data: _ShortVectorData) -> set[int]:
    orbit = set(start)
    frontier = list(start)
    while frontier:
        nxt = []
        for i in frontier:
            v = data.S[i]
            for g in gens:
                j = data.index[tuple((g @ v).tolist())]
                if j not in orbit:
                    orbit.add(j)
                    nxt.append(j)
        frontier = nxt
    return orbit


@lru_cache(maxsize=64)
def automorphism_group(L: Lattice, budget: int = DEFAULT_ISOMETRY_BUDGET) -> AutGroup:
    """Order and generators of O(L) via a pointwise stabilizer chain of a reduced basis."""
    Gr, P = lll_gram(L.gram)
    m = L.m
    data = _ShortVectorData(Gr, max(Gr[i][i] for i in range(m)))
    basis_idx = [data.index[tuple(int(i == j) for j in range(m))] for i in range(m)]
    search = _Search(Gr, data, budget)
    gens: list[np.ndarray] = []
    order = 1
    for i in range(m - 1, -1, -1):
        prefix = basis_idx[:i]
        cands = search.level_cands[i]
        for j, idx in enumerate(prefix):
            cands = cands[data.ip[idx, cands] == search.T[i, j]]
        orbit = _orbit({basis_idx[i]}, gens, data)
        excluded: set[int] = set()
        for c in cands.tolist():
            if c in orbit or c in excluded:
                continue
            g = search.complete(prefix + [c])
            if g is None:
                excluded |= _orbit({c}, gens, data)
            else:
                gens.append(g)
                orbit = _orbit(orbit, gens, data)
        order *= len(orbit)
    Pa = np.array(P, dtype=np.int64)
    Pinv = _inverse_unimodular(P)
    orig = tuple(Pa @ g @ Pinv for g in gens)
    for g in orig:
        assert np.array_equal(g.T @ L.G @ g, L.G)
    return AutGroup(order, orig)


def aut_order(L: Lattice, budget: int = DEFAULT_ISOMETRY_BUDGET) -> int:
    return automorphism_group(L, budget).order


# ---------------------------------------------------------------------------
# genus enumeration

def _class_gram(L: Lattice) -> list[list[int]]:
    if L.m == 2:
        return [list(r) for r in canonicalize_T(L.gram)]
    G, _ = lll_gram(L.gram)
    return G


def _fingerprint(L: Lattice, depth: int = 3) -> tuple:
    G, _ = lll_gram(L.gram)
    bound = max(G[i][i] for i in range(L.m))
    _, N = short_vectors(G, bound)
    vals, cnts = np.unique(N, return_counts=True)
    return (L.det, tuple(zip(vals.tolist(), cnts.tolist())))


@dataclass
class GenusDecomposition:
    seed: Lattice
    p: int
    classes: list[tuple[Lattice, int]]
    neighbor_matrix: list[list[int]]
    certified: bool

    @property
    def mass(self) -> Fraction:
        return sum((Fraction(1, o) for _, o in self.classes), Fraction(0))

    def to_json(self) -> str:
        return json.dumps({
            "seed": [list(r) for r in self.seed.gram],
            "prime": self.p,
            "classes": [{"gram": [list(r) for r in L.gram], "aut_order": o} for L, o in self.classes],
            "neighbor_multiplicities": self.neighbor_matrix,
            "closed_under_neighbors": self.certified,
        }, sort_keys=True)


def genus_classes(seed: Lattice, p: int, isometry_budget: int = DEFAULT_ISOMETRY_BUDGET,
                  max_classes: int = 200) -> GenusDecomposition:
    """Classes in the genus of ``seed`` by closure under p-neighbours."""
    if seed.level % p == 0:
        raise ValueError(f"p = {p} divides the level {seed.level}")
    reps: list[Lattice] = [Lattice(_class_gram(seed), seed.label)]
    prints = [_fingerprint(reps[0])]
    edges: dict[tuple[int, int], int] = {}
    done = 0
    while done < len(reps):
        L = reps[done]
        for K in neighbors(L, p, 1).members:
            N = as_lattice(K)
            fp = _fingerprint(N)
            hit = None
            for i, R in enumerate(reps):
                if prints[i] == fp and is_isometric(R, N, isometry_budget) is not None:
                    hit = i
                    break
            if hit is None:
                if len(reps) >= max_classes:
                    raise CapacityError("genus enumeration exceeded its class limit")
                reps.append(Lattice(_class_gram(N)))
                prints.append(fp)
                hit = len(reps) - 1
            edges[(done, hit)] = edges.get((done, hit), 0) + 1
        done += 1
    order = sorted(range(len(reps)), key=lambda i: (min(reps[i].gram[t][t] for t in range(reps[i].m)),
                                                     reps[i].gram))
    pos = {old: new for new, old in enumerate(order)}
    classes = [(reps[i], aut_order(reps[i], isometry_budget)) for i in order]
    mat = [[0] * len(reps) for _ in reps]
    for (a, b), c in edges.items():
        mat[pos[a]][pos[b]] += c
    return GenusDecomposition(seed, p, classes, mat, certified=True)


def genus_average_table(G: GenusDecomposition, n: int, bound: int) -> CoeffTable:
    """Sum over classes of theta_table(L') / o(L')."""
    total = None
    for L, o in G.classes:
        t = theta_table(L, n, bound).scaled(Fraction(1, o))
        total = t if total is None else total + t
    return total
