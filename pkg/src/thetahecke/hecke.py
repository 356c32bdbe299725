"""Hecke-operator identities on Fourier coefficients.

Two independent routes to the coefficients of theta(L)|T'_j(p^2):

* the sublattice expansion: sum over n-tuples U of vectors in p^-1 L with
  Q[U] = T of a coefficient c~_j(Omega) that depends only on T and on the
  "formal intersection" Delta = {c in p^-1 Z^n : U c in L}; c~_j is a sum
  over lattices p Z^n <= Lambda <= Delta of chi^e p^E times a count of
  totally isotropic subspaces of a residue quadratic space;
* the neighbour sum: sum over i of v_i(j) times the theta series of all
  p^(j-i)-neighbours of L.

The genus average of theta is an eigenform of T'_j with an explicit
eigenvalue; :func:`verify_eigenvalue` checks that as an exact identity.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import arith
from .arith import CapacityError, lambda_j, u_coeff, v_coeff
from .ffquad import FFQuadSpace, all_vectors, alpha_j
from .genus import BudgetExceeded, automorphism_group, genus_average_table, genus_classes, neighbor_theta_sum, \
    smallest_good_prime
from .lattice import Lattice, SubframeBasis
from .theta import CoeffTable, DEFAULT_NODE_BUDGET, canonical_keys, canonicalize_T, key_of, matrix_of, shells


# ---------------------------------------------------------------------------
# exponents

def exponent_E_j(k: int, n: int, j: int, r0: int, r2: int, primed: bool = False) -> int:
    """Power of p attached to (Omega, Lambda); ``primed`` gives the untwisted T_j version."""
    if primed:
        return k * (r2 - r0 - j) + r0 * (n - r2 + 1)
    r = r0 + r2
    return k * (j + r2 - r0) + r0 * (n - r2 + 1) + (j - r) * (j - r + 1) // 2 - j * (n + 1)


def exponent_e_j(j: int, r0: int, r2: int, primed: bool = False) -> int:
    return r2 - r0 - j if primed else j + r2 - r0


# ---------------------------------------------------------------------------
# lattices between p Z^n and p^-1 Z^n

@dataclass(frozen=True)
class _LambdaData:
    hnf: tuple[tuple[int, ...], ...]   # rows spanning p*Lambda
    mask: int                          # p*Lambda mod p^2, as a bitset of codes
    r0: int
    r2: int
    z: np.ndarray                      # adapted basis (columns): Lambda = sum p^{a_i} Z z_i
    a: tuple[int, ...]

    @property
    def residue_basis(self) -> np.ndarray:
        return self.z[:, [i for i, e in enumerate(self.a) if e == 0]]


def _codes_of(vectors: np.ndarray, p: int) -> np.ndarray:
    q = p * p
    n = vectors.shape[1]
    return (vectors % q) @ (q ** np.arange(n - 1, -1, -1, dtype=np.int64))


def _span_mask(rows, p: int) -> int:
    """Bitset of the subgroup of (Z/p^2)^n generated by ``rows``."""
    q = p * p
    rows = [np.array(r, dtype=np.int64) % q for r in rows]
    n = len(rows[0])
    elems = {tuple([0] * n)}
    for r in rows:
        new = set(elems)
        frontier = list(elems)
        while frontier:
            nxt = []
            for e in frontier:
                s = tuple((np.array(e) + r) % q)
                if s not in new:
                    new.add(s)
                    nxt.append(s)
            frontier = nxt
        elems = new
    mask = 0
    for c in _codes_of(np.array(sorted(elems), dtype=np.int64), p).tolist():
        mask |= 1 << c
    return mask




@lru_cache(maxsize=None)
def lambda_lattices(n: int, p: int) -> tuple[_LambdaData, ...]:
    """Every lattice Lambda with p Z^n <= Lambda <= p^-1 Z^n, with adapted bases.

    p*Lambda runs over the row-HNF lattices between p^2 Z^n and Z^n.
    """
    q = p * p
    out = []
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for piv in itertools.product((1, p, q), repeat=n):
        for vals in itertools.product(*[range(piv[j]) for _, j in slots]):
            H = [[piv[i] if i == j else 0 for j in range(n)] for i in range(n)]
            for (i, j), v in zip(slots, vals):
                H[i][j] = v
            if any((x * q).denominator != 1 for row in arith.inverse_frac(H) for x in row):
                continue
            D, P, _ = arith.smith_form(arith.transpose(H))
            z = np.array([[int(x) for x in row] for row in arith.inverse_frac(P)], dtype=np.int64)
            a = tuple(arith.valuation(D[t][t], p) - 1 for t in range(n))
            out.append(_LambdaData(tuple(map(tuple, H)), _span_mask(H, p), a.count(1), a.count(-1), z, a))
    return tuple(out)


@lru_cache(maxsize=None)
def _residue_grid(n: int, p: int) -> np.ndarray:
    """All c' in (Z/p^2)^n, row i having code i."""
    C = all_vectors(p * p, n)
    return C[np.argsort(_codes_of(C, p))]


def delta_masks(W: np.ndarray, p: int, chunk: int = 4096) -> list[int]:
    """Bitsets of p*Delta = {c' : W c' = 0 mod p^2} for a batch W of shape (K, m, n)."""
    n = W.shape[2]
    C = _residue_grid(n, p).T
    q = p * p
    out: list[int] = []
    for s in range(0, len(W), chunk):
        ok = ~np.any((W[s:s + chunk] @ C) % q, axis=1)
        packed = np.packbits(ok, axis=1, bitorder="little")
        out.extend(int.from_bytes(row.tobytes(), "little") for row in packed)
    return out


def _diagonal_delta_mask(a: tuple[int, ...], p: int) -> int:
    """Bitset of p*Delta when Delta = sum p^{a_i} Z e_i."""
    C = _residue_grid(len(a), p)
    ok = np.all(C % (p ** (np.array(a) + 1)) == 0, axis=1)
    return int.from_bytes(np.packbits(ok, bitorder="little").tobytes(), "little")


# ---------------------------------------------------------------------------
# the coefficient attached to one Omega

def _power(p: int, e: int) -> Fraction:
    return Fraction(p ** e) if e >= 0 else Fraction(1, p ** -e)


def lambda_term(T, lam: _LambdaData, p: int, k: int, n: int, j: int, chi: int) -> Fraction:
    """chi^e p^E alpha_j for one Lambda (T is the Gram of Omega in the Z^n frame)."""
    r = lam.r0 + lam.r2
    if r > j:
        return Fraction(0)
    Z = lam.residue_basis
    V = (Z.T @ np.asarray(T, dtype=np.int64) @ Z).tolist()
    alpha = alpha_j(FFQuadSpace.from_even_gram(V, p), n, j, lam.r0, lam.r2)
    if not alpha:
        return Fraction(0)
    sign = chi ** (exponent_e_j(j, lam.r0, lam.r2) % 2)
    return sign * _power(p, exponent_E_j(k, n, j, lam.r0, lam.r2)) * alpha


_CTILDE_CACHE: dict[tuple, Fraction] = {}


def ctilde(T, delta_mask: int, p: int, k: int, n: int, j: int, chi: int) -> Fraction:
    """Sum of chi^e p^E alpha_j over p Z^n <= Lambda <= Delta."""
    key = (key_of(T), delta_mask, p, k, n, j, chi)
    if key not in _CTILDE_CACHE:
        tot = Fraction(0)
        for lam in lambda_lattices(n, p):
            if lam.mask & ~delta_mask == 0:
                tot += lambda_term(T, lam, p, k, n, j, chi)
        _CTILDE_CACHE[key] = tot
    return _CTILDE_CACHE[key]


# ---------------------------------------------------------------------------
# enumeration of U with Q[U] = T

def _check_index(T, n: int):
    M = canonicalize_T(T) if n <= 2 else tuple(map(tuple, T))
    if len(M) != n:
        raise ValueError("Fourier index has the wrong degree")
    Mi = [list(r) for r in M]
    d = arith.det_int(Mi)
    if d == 0 and any(x for r in Mi for x in r):
        raise ValueError("unsupported input: singular Fourier index (only T = 0 is handled)")
    return M


def _code_params(X: np.ndarray, bound: int | None = None):
    off = int(np.abs(X).max()) if X.size else 0
    if bound is not None:
        off = max(off, bound)
    base = 2 * off + 1
    if base ** X.shape[1] >= 2 ** 62:
        raise CapacityError("vectors too long for integer codes")
    return off, base ** np.arange(X.shape[1], dtype=np.int64)


def orbit_representatives(S: np.ndarray, gens, chunk: int = 1 << 18) -> tuple[np.ndarray, np.ndarray]:
    """Indices of one vector per orbit of the group generated by ``gens``, and orbit sizes."""
    N = len(S)
    if N == 0 or not gens:
        return np.arange(N), np.ones(N, dtype=np.int64)
    off, w = _code_params(S)
    codes = (S.astype(np.int64) + off) @ w
    order = np.argsort(codes, kind="stable").astype(np.int32)
    sorted_codes = codes[order]
    del codes
    if np.any(sorted_codes[1:] == sorted_codes[:-1]):
        raise ValueError("shell contains repeated vectors")
    rows, cols = [], []
    for g in gens:
        gt = np.asarray(g, dtype=np.int64).T
        for s in range(0, N, chunk):
            img = S[s:s + chunk].astype(np.int64) @ gt
            if np.abs(img).max() > off:
                raise ValueError("generator does not preserve the shell")
            c = (img + off) @ w
            at = np.minimum(np.searchsorted(sorted_codes, c), N - 1)
            if np.any(sorted_codes[at] != c):
                raise ValueError("generator does not preserve the shell")
            rows.append(np.arange(s, s + len(c), dtype=np.int32))
            cols.append(order[at])
    r, c = np.concatenate(rows), np.concatenate(cols)
    del rows, cols
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N, N))
    _, labels = connected_components(graph, directed=True, connection="weak")
    sizes = np.bincount(labels)
    _, first = np.unique(labels, return_index=True)
    return first, sizes[labels[first]]


def compact(X: np.ndarray) -> np.ndarray:
    """Smallest signed integer dtype holding X."""
    if X.size == 0:
        return X
    top = int(np.abs(X).max())
    for dt in (np.int8, np.int16, np.int32):
        if top < np.iinfo(dt).max:
            return X.astype(dt)
    return X


@lru_cache(maxsize=32)
def _shell(L: Lattice, norm: int) -> np.ndarray:
    return compact(shells(L.gram, [norm])[norm])


@lru_cache(maxsize=32)
def _shell_orbits(L: Lattice, norm: int, use_orbits: bool):
    S = _shell(L, norm)
    if use_orbits:
        reps, sizes = orbit_representatives(S, automorphism_group(L).generators)
    else:
        reps, sizes = np.arange(len(S)), np.ones(len(S), dtype=np.int64)
    return S, reps, sizes


def iter_tuples(L: Lattice, p: int, T, use_orbits: bool = True,
                node_budget: int = DEFAULT_NODE_BUDGET):
    """Yield (W, weight) batches: W has shape (K, m, n) with Q[W/p] = T, weight per row.

    Each U = W/p with Q[U] = T is counted exactly once (with weights when the
    first column is reduced modulo automorphisms of L).
    """
    M = [list(r) for r in T]
    n, m = len(M), L.m
    if not any(x for r in M for x in r):
        yield np.zeros((1, m, n), dtype=np.int64), np.ones(1, dtype=np.int64)
        return
    q = p * p
    if n == 1 and use_orbits:
        # a single column's Delta only sees its p-adic content, so group by that
        S0 = _shell(L, q * M[0][0])
        if len(S0) > node_budget:
            raise CapacityError("tuple enumeration exceeded its node budget")
        val = np.where(np.any(S0 % p, axis=1), 0, np.where(np.any(S0 % q, axis=1), 1, 2))
        for v in range(3):
            hit = np.nonzero(val == v)[0]
            if len(hit):
                yield S0[hit[:1]].astype(np.int64)[:, :, None], np.array([len(hit)], dtype=np.int64)
        return
    S0, reps, sizes = _shell_orbits(L, q * M[0][0], use_orbits)
    if len(S0) > node_budget:
        raise CapacityError("tuple enumeration exceeded its node budget")
    if n == 1:
        yield S0[reps].astype(np.int64)[:, :, None], sizes
        return
    if n != 2:
        raise ValueError("degree must be 1 or 2")
    S1 = _shell(L, q * M[1][1])
    used = 0
    G = L.G
    for w, s in zip(S0[reps].astype(np.int64), sizes.tolist()):
        used += len(S1)
        if used > node_budget:
            raise CapacityError("tuple enumeration exceeded its node budget")
        sel = S1[(S1 @ (G @ w)) == q * M[0][1]].astype(np.int64)
        if len(sel):
            W = np.empty((len(sel), m, 2), dtype=np.int64)
            W[:, :, 0] = w
            W[:, :, 1] = sel
            yield W, np.full(len(sel), s, dtype=np.int64)


def ttilde_coefficient(L: Lattice, p: int, n: int, j: int, T, use_orbits: bool = True,
                       node_budget: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """Coefficient of theta(L)|T~_j(p^2) at T, by the sublattice expansion."""
    chi = L.chi_star(p)
    M = _check_index(T, n)
    tally: dict[int, int] = {}
    for W, wt in iter_tuples(L, p, M, use_orbits, node_budget):
        for mask, w in zip(delta_masks(W, p), wt.tolist()):
            tally[mask] = tally.get(mask, 0) + w
    return sum((c * ctilde(M, mask, p, L.k, n, j, chi) for mask, c in tally.items()), Fraction(0))


def tprime_coefficient(L: Lattice, p: int, n: int, j: int, T, **kw) -> Fraction:
    """Coefficient of theta(L)|T'_j(p^2) at T as sum_i u_i(j) T~_{j-i}."""
    return sum((Fraction(u_coeff(p, n, j, i)) * ttilde_coefficient(L, p, n, j - i, T, **kw)
                for i in range(j + 1)), Fraction(0))


# ---------------------------------------------------------------------------
# explicit Omega classes and Lambda positions

@dataclass(frozen=True)
class OmegaClass:
    """A sublattice Omega of p^-1 L of rank n, with a reduced basis.

    ``rep`` lists the reduced basis: d0 columns in p^-1 L minus L, then d1 in
    L minus pL, then d2 in pL.  ``span`` is the canonical (HNF) form of the
    same lattice and ``T`` the Gram of ``rep``.
    """
    parent: Lattice
    p: int
    n: int
    rep: SubframeBasis
    span: SubframeBasis
    d0: int
    d1: int
    d2: int
    T: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        assert self.d0 + self.d1 + self.d2 == self.n


@dataclass(frozen=True)
class LambdaPosition:
    omega: OmegaClass
    r0: int
    r2: int
    sub: SubframeBasis
    data: _LambdaData = field(repr=False, compare=False)


def _pdelta_basis(W: np.ndarray, p: int) -> list[list[int]]:
    """Row basis (HNF) of p*Delta = {c' in Z^n : W c' = 0 mod p^2}."""
    n = W.shape[1]
    q = p * p
    C = _residue_grid(n, p)
    ok = ~np.any((W @ C.T) % q, axis=0)
    rows = C[ok].tolist() + [[q * int(i == t) for t in range(n)] for i in range(n)]
    return arith.hnf_rows(rows)[:n]


def _reduced_basis(W: np.ndarray, p: int):
    """Change of basis Z (columns) putting W/p in reduced form, and the counts (d0, d1, d2)."""
    H = _pdelta_basis(W, p)
    D, P, _ = arith.smith_form(arith.transpose(H))
    Pinv = [[int(x) for x in row] for row in arith.inverse_frac(P)]
    a = [arith.valuation(D[t][t], p) - 1 for t in range(len(H))]
    order = sorted(range(len(a)), key=lambda t: -a[t])
    Z = np.array([[Pinv[i][t] for t in order] for i in range(len(H))], dtype=np.int64)
    return Z, a.count(1), a.count(0), a.count(-1)


def omega_classes_at(L: Lattice, p: int, n: int, T,
                     node_budget: int = DEFAULT_NODE_BUDGET) -> list[tuple[OmegaClass, int]]:
    """Sublattices Omega of p^-1 L with Gram T (up to GL_n(Z)), with the number of U spanning each."""
    M = _check_index(T, n)
    if arith.det_int([list(r) for r in M]) == 0:
        raise ValueError("unsupported input: omega classes need a nonsingular Fourier index")
    groups: dict[SubframeBasis, list] = {}
    for W, _ in iter_tuples(L, p, M, use_orbits=False, node_budget=node_budget):
        for w in W:
            span = SubframeBasis(L, w.tolist(), p)
            if span in groups:
                groups[span][1] += 1
            else:
                groups[span] = [w, 1]
    out = []
    for span, (w, count) in groups.items():
        Z, d0, d1, d2 = _reduced_basis(w, p)
        Wr = w @ Z
        Tr = tuple(map(tuple, (Z.T @ np.asarray(M, dtype=np.int64) @ Z).tolist()))
        rep = SubframeBasis(L, Wr.tolist(), p, canonical=False)
        out.append((OmegaClass(L, p, n, rep, span, d0, d1, d2, Tr), count))
    out.sort(key=lambda t: (t[0].d0, t[0].d1, t[0].span.key))
    return out


def lambda_positions(omega: OmegaClass, j: int) -> list[LambdaPosition]:
    """Lattices p Omega <= Lambda <= Delta with r0 + r2 <= j (coordinates of the reduced basis)."""
    p, n = omega.p, omega.n
    a = (1,) * omega.d0 + (0,) * omega.d1 + (-1,) * omega.d2
    dmask = _diagonal_delta_mask(a, p)
    Wr = np.array(omega.rep.num, dtype=np.int64)
    out = []
    for lam in lambda_lattices(n, p):
        if lam.mask & ~dmask or lam.r0 + lam.r2 > j:
            continue
        assert lam.r0 >= omega.d0 and lam.r2 <= omega.d2
        # Lambda = p^-1 H^T Z^n in Omega coordinates; Omega = W/p
        num = Wr @ np.array(lam.hnf, dtype=np.int64).T
        out.append(LambdaPosition(omega, lam.r0, lam.r2, SubframeBasis(omega.parent, num.tolist(), p * p), lam))
    return out


def ttilde_coefficient_explicit(L: Lattice, p: int, n: int, j: int, T,
                                node_budget: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """Same coefficient as :func:`ttilde_coefficient`, summed class by class."""
    chi = L.chi_star(p)
    tot = Fraction(0)
    for omega, count in omega_classes_at(L, p, n, T, node_budget):
        s = sum((lambda_term(omega.T, pos.data, p, L.k, n, j, chi) for pos in lambda_positions(omega, j)),
                Fraction(0))
        tot += count * s
    return tot


# ---------------------------------------------------------------------------
# neighbour form of T'_j

def thm53_hypotheses(k: int, n: int, j: int, chi: int) -> str | None:
    """None when the neighbour-sum identity applies, otherwise the failing condition."""
    if not 0 <= j <= n:
        return f"need 0 <= j <= n (got j = {j}, n = {n})"
    if chi == 1 and j > k:
        return f"chi = +1 needs j <= k (got j = {j}, k = {k})"
    if chi == -1 and j >= k and j > 0:
        return f"chi = -1 needs j < k (got j = {j}, k = {k})"
    return None


def rhs_thm53_table(L: Lattice, p: int, n: int, j: int, bound: int,
                    v_override: dict[int, Fraction] | None = None, method: str = "auto") -> CoeffTable:
    """sum_i v_i(j) * (sum of theta over the p^(j-i)-neighbours of L)."""
    chi = L.chi_star(p)
    why = thm53_hypotheses(L.k, n, j, chi)
    if why:
        raise ValueError(f"neighbour-sum identity does not apply: {why}")
    total = None
    for i in range(j + 1):
        v = Fraction(v_coeff(p, L.k, n, j, i, chi))
        if v_override and i in v_override:
            v = Fraction(v_override[i])
        if v == 0:
            continue
        t = neighbor_theta_sum(L, p, j - i, n, bound, method).scaled(v)
        total = t if total is None else total + t
    if total is None:
        total = CoeffTable(n, bound, {key_of(K): Fraction(0) for K in canonical_keys(n, bound)})
    return total


def tprime_table(L: Lattice, p: int, n: int, j: int, bound: int, **kw) -> CoeffTable:
    """T'_j coefficients through the sublattice expansion, on nonsingular and zero keys."""
    entries = {}
    for K in canonical_keys(n, bound):
        M = [list(r) for r in K]
        if arith.det_int(M) == 0 and any(x for r in M for x in r):
            continue
        entries[key_of(K)] = tprime_coefficient(L, p, n, j, K, **kw)
    return CoeffTable(n, bound, entries)


# ---------------------------------------------------------------------------
# genus eigenvalue check

@dataclass
class VerificationReport:
    lattice: Lattice
    p: int
    n: int
    j: int
    bound: int
    chi: int | None = None
    eigenvalue: Fraction | None = None
    case: str = ""
    classes: list[tuple[list[list[int]], int]] = field(default_factory=list)
    rows: list[tuple[tuple[int, ...], Fraction, Fraction]] = field(default_factory=list)
    verdict: str = "inconclusive"
    message: str = ""
    seconds: float = 0.0

    @property
    def first_mismatch(self):
        return next((r for r in self.rows if r[1] != r[2]), None)

    def to_dict(self) -> dict:
        return {
            "inputs": {"gram": [list(r) for r in self.lattice.gram], "p": self.p, "n": self.n, "j": self.j,
                       "bound": self.bound},
            "chi": self.chi,
            "eigenvalue": None if self.eigenvalue is None else _frac(self.eigenvalue),
            "case": self.case,
            "classes": [{"gram": g, "aut_order": o} for g, o in self.classes],
            "coefficients": [{"T": [list(r) for r in matrix_of(k)], "lhs": _frac(a), "rhs": _frac(b),
                              "match": a == b} for k, a, b in self.rows],
            "verdict": self.verdict,
            "message": self.message,
            "seconds": round(self.seconds, 3),
        }

    def to_json(self) -> str:
        d = self.to_dict()
        d.pop("seconds")  # keeps the JSON byte-identical across runs
        return json.dumps(d, sort_keys=True, indent=1)

    def to_text(self) -> str:
        lines = [f"lattice {[list(r) for r in self.lattice.gram]}  p={self.p} n={self.n} j={self.j} B={self.bound}",
                 f"chi = {self.chi}  eigenvalue = {self.eigenvalue}  case {self.case}",
                 f"{len(self.classes)} class(es), aut orders {[o for _, o in self.classes]}"]
        for k, a, b in self.rows:
            lines.append(f"  T={[list(r) for r in matrix_of(k)]!s:<22} lhs={_frac(a):>16} rhs={_frac(b):>16}"
                         f"  {'ok' if a == b else 'MISMATCH'}")
        lines.append(f"verdict: {self.verdict}" + (f" ({self.message})" if self.message else ""))
        return "\n".join(lines)


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def verify_eigenvalue(seed: Lattice, p: int, n: int, j: int, bound: int,
                      node_budget: int = DEFAULT_NODE_BUDGET, isometry_budget: int = 10 ** 7,
                      v_override: dict[int, Fraction] | None = None,
                      genus_prime: int | None = None) -> VerificationReport:
    """Check theta(gen L)|T'_j(p^2) = lambda_j * theta(gen L) coefficient by coefficient.

    When the neighbour-sum identity applies (case a) the left side is the
    weighted sum of neighbour tables.  Otherwise (case b, eigenvalue zero)
    it is assembled from the sublattice expansion on nonsingular and zero
    indices.  The genus is closed under neighbours at ``genus_prime``
    (default: the smallest prime not dividing the level).
    """
    t0 = time.perf_counter()
    rep = VerificationReport(seed, p, n, j, bound)
    try:
        chi = seed.chi_star(p)
        rep.chi = chi
        if not 0 <= j <= n:
            raise ValueError(f"need 0 <= j <= n (got j = {j}, n = {n})")
        rep.eigenvalue = Fraction(lambda_j(p, seed.k, n, j, chi))
        gp = genus_prime or smallest_good_prime(seed)
        gen = genus_classes(seed, gp, isometry_budget)
        rep.classes = [([list(r) for r in C.gram], o) for C, o in gen.classes]
        if thm53_hypotheses(seed.k, n, j, chi) is None:
            rep.case = "a"
            lhs = None
            for C, o in gen.classes:
                t = rhs_thm53_table(C, p, n, j, bound, v_override).scaled(Fraction(1, o))
                lhs = t if lhs is None else lhs + t
            rhs = genus_average_table(gen, n, bound).scaled(rep.eigenvalue)
        else:
            rep.case = "b"
            lhs = None
            for C, o in gen.classes:
                t = tprime_table(C, p, n, j, bound, node_budget=node_budget).scaled(Fraction(1, o))
                lhs = t if lhs is None else lhs + t
            rhs = CoeffTable(n, bound, {k: Fraction(0) for k in lhs.entries})
        for k in lhs.keys():
            rep.rows.append((k, lhs[k], rhs[k]))
        bad = rep.first_mismatch
        rep.verdict = "pass" if bad is None else "fail"
        if bad is not None:
            rep.message = f"first mismatch at T = {[list(r) for r in matrix_of(bad[0])]}"
    except (CapacityError, BudgetExceeded) as exc:
        rep.verdict = "inconclusive"
        rep.message = str(exc)
    rep.seconds = time.perf_counter() - t0
    return rep
