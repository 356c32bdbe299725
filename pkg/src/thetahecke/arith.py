"""Exact arithmetic helpers.

Integer and rational matrix normal forms, the Kronecker symbol, cyclotomic
integers in Q(zeta_p), and the q-analogue counting functions used by the
Hecke-operator formulas.  Everything here works with Python ints and
``fractions.Fraction``; nothing touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Matrix = list[list[int]]


class CapacityError(RuntimeError):
    """Raised when a brute-force enumeration would exceed its size limit."""


# ---------------------------------------------------------------------------
# elementary number theory

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    return [n for n in range(2, bound + 1) if is_prime(n)]


def valuation(n: int | Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    n = Fraction(n)
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def kronecker(a: int, b: int) -> int:
    """Kronecker symbol (a/b).

    >>> kronecker(2, 7), kronecker(-23, 2), kronecker(3, 5)
    (1, 1, -1)
    """
    if b == 0:
        raise ValueError("kronecker symbol needs b != 0")
    result = 1
    if b < 0:
        b = -b
        if a < 0:
            result = -result
    v = 0
    while b % 2 == 0:
        b //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol for odd positive b
    a %= b
    while a:
        while a % 2 == 0:
            a //= 2
            if b % 8 in (3, 5):
                result = -result
        a, b = b, a
        if a % 4 == 3 and b % 4 == 3:
            result = -result
        a %= b
    return result if b == 1 else 0


def inverse_mod(a: int, p: int) -> int:
    return pow(a % p, -1, p)


# ---------------------------------------------------------------------------
# exact matrices

def to_int_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[int(x) for x in row] for row in rows]


def transpose(M: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def det_int(M: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(map(int, row)) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def det_frac(M: Sequence[Sequence]) -> Fraction:
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    d = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            d = -d
        d *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
    return d


def inverse_frac(M: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        A[k], A[piv] = A[piv], A[k]
        pk = A[k][k]
        A[k] = [x / pk for x in A[k]]
        for i in range(n):
            if i != k and A[i][k] != 0:
                f = A[i][k]
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return [row[n:] for row in A]


def leading_minors(M: Sequence[Sequence[int]]) -> list[int]:
    return [det_int([row[:i] for row in M[:i]]) for i in range(1, len(M) + 1)]


def is_symmetric(M: Sequence[Sequence]) -> bool:
    n = len(M)
    return all(len(row) == n for row in M) and all(
        M[i][j] == M[j][i] for i in range(n) for j in range(i))


def is_even_sym(M: Sequence[Sequence[int]]) -> bool:
    return is_symmetric(M) and all(M[i][i] % 2 == 0 for i in range(len(M)))


def hnf_rows(M: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form of an integer matrix.

    Returns the nonzero rows in echelon form with positive pivots and the
    entries above each pivot reduced into ``[0, pivot)``.

    >>> hnf_rows([[2, 4], [3, 1]])
    [[1, 7], [0, 10]]
    """
    A = [list(map(int, row)) for row in M if any(row)]
    if not A:
        return []
    ncols = len(A[0])
    r = 0
    for col in range(ncols):
        if r == len(A):
            break
        while True:
            nz = [i for i in range(r, len(A)) if A[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][col]))
            A[r], A[piv] = A[piv], A[r]
            pr = A[r]
            others = [i for i in range(r + 1, len(A)) if A[i][col]]
            if not others:
                break
            for i in others:
                f = A[i][col] // pr[col]
                A[i] = [x - f * y for x, y in zip(A[i], pr)]
        if A[r][col] == 0:
            continue
        if A[r][col] < 0:
            A[r] = [-x for x in A[r]]
        pr = A[r]
        for i in range(r):
            f = A[i][col] // pr[col]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], pr)]
        r += 1
    return A[:r]


def hnf_cols(M: Sequence[Sequence[int]]) -> Matrix:
    """Column-style HNF: the column span of ``M`` as a canonical basis matrix."""
    H = hnf_rows(transpose(M))
    return transpose(H) if H else [[] for _ in M]


def smith_form(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form of a square integer matrix.

    Returns ``(D, P, Q)`` with ``P @ M @ Q == D`` diagonal, ``P`` and ``Q``
    unimodular and each diagonal entry dividing the next.
    """
    n = len(M)
    A = [list(map(int, row)) for row in M]
    P = identity(n)
    Q = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for R in (A, Q):
            for row in R:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst += f*row_src
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        P[dst] = [x + f * y for x, y in zip(P[dst], P[src])]

    def add_col(dst, src, f):
        for R in (A, Q):
            for row in R:
                row[dst] += f * row[src]

    for t in range(n):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if A[i][j]]
            if not nz:
                return A, P, Q
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            clean = True
            for i in range(t + 1, n):
                f = A[i][t] // A[t][t]
                if f:
                    add_row(i, t, -f)
                if A[i][t]:
                    clean = False
            for j in range(t + 1, n):
                f = A[t][j] // A[t][t]
                if f:
                    add_col(j, t, -f)
                if A[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            P[t] = [-x for x in P[t]]
    return A, P, Q


def snf_valuations(M: Sequence[Sequence], p: int) -> list[int]:
    """Sorted p-adic valuations of the invariant factors of a rational matrix.

    Works p-locally: elimination pivots on an entry of least valuation, which
    is legitimate because units of Z_(p) may be divided out.

    >>> snf_valuations([[Fraction(1, 3), 0, 0], [0, 1, 0], [0, 0, 3]], 3)
    [-1, 0, 1]
    """
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("snf_valuations needs a square matrix")
    vals = []
    for t in range(n):
        best = None
        for i in range(t, n):
            for j in range(t, n):
                if A[i][j] != 0:
                    v = valuation(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            raise ValueError("matrix is singular")
        v, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        piv = A[t][t]
        for i in range(t + 1, n):
            if A[i][t]:
                f = A[i][t] / piv
                A[i] = [x - f * y for x, y in zip(A[i], A[t])]
        for j in range(t + 1, n):
            A[t][j] = Fraction(0)
        vals.append(v)
    return sorted(vals)


# ---------------------------------------------------------------------------
# cyclotomic integers

class CycInt:
    """Element of Z[zeta_p] stored as a coefficient vector modulo all-ones.

    The canonical form has a zero in the last slot, so equality is equality
    of the stored tuples.
    """

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Sequence[int]):
        if len(coeffs) != p:
            raise ValueError("need exactly p coefficients")
        c = [int(x) for x in coeffs]
        last = c[-1]
        self.p = p
        self.coeffs = tuple(x - last for x in c)

    @classmethod
    def zeta(cls, p: int, e: int = 1) -> "CycInt":
        c = [0] * p
        c[e % p] = 1
        return cls(p, c)

    @classmethod
    def from_int(cls, p: int, n: int) -> "CycInt":
        c = [0] * p
        c[0] = n
        return cls(p, c)

    @classmethod
    def from_exponent_counts(cls, p: int, counts: Sequence[int]) -> "CycInt":
        """Sum of zeta^e with ``counts[e]`` copies of each exponent."""
        return cls(p, counts)

    def _coerce(self, other) -> "CycInt":
        if isinstance(other, CycInt):
            if other.p != self.p:
                raise ValueError("mixing different roots of unity")
            return other
        if isinstance(other, int):
            return CycInt.from_int(self.p, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.p, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.p, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.p
        out = [0] * p
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        out[(i + j) % p] += a * b
        return CycInt(p, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_int(self) -> int:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not a rational integer")
        return self.coeffs[0]

    def __repr__(self):
        return f"CycInt(p={self.p}, coeffs={list(self.coeffs)})"


# ---------------------------------------------------------------------------
# q-analogue counting functions

def _qpow(q: int, e: int):
    return q ** e if e >= 0 else Fraction(1, q ** (-e))


def _exact(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def beta(q: int, r: int, a: int):
    """Gaussian binomial: number of a-dim subspaces of F_q^r.

    Evaluated as the product (q^r-1)...(q^(r-a+1)-1) / (q^a-1)...(q-1), so a
    negative ``r`` gives the rational value of that product.

    >>> beta(3, 2, 1), beta(2, 4, 2), beta(5, 1, 2)
    (4, 35, 0)
    """
    if a < 0:
        return 0
    num = Fraction(1)
    den = 1
    for i in range(a):
        num *= _qpow(q, r - i) - 1
        den *= q ** (a - i) - 1
    return _exact(num / den)


def eta(q: int, r: int, a: int):
    """Ways to extend a rank-a matrix in F_q^{r x a} to an element of GL_r(F_q).

    The product over a <= i < r of (q^r - q^i); eta(q, r, 0) = |GL_r(F_q)|.

    >>> eta(2, 2, 0), eta(3, 2, 1)
    (6, 6)
    """
    out = 1
    for i in range(a, r):
        out *= q ** r - q ** i
    return out


def delta(q: int, m: int, r: int):
    out = Fraction(1)
    for i in range(r):
        out *= _qpow(q, m - i) + 1
    return _exact(out)


def mu(q: int, m: int, r: int):
    out = Fraction(1)
    for i in range(r):
        out *= _qpow(q, m - i) - 1
    return _exact(out)


def u_coeff(q: int, n: int, j: int, i: int):
    """Coefficient u_i(j) turning the T-tilde operators into T-prime ones."""
    return _exact((-1) ** i * _qpow(q, i * (i - 1) // 2) * Fraction(beta(q, n - j + i, i)))


def v_coeff(q: int, k: int, n: int, j: int, i: int, chi: int):
    """Coefficient v_i(j) of the neighbour sum over the p^(j-i)-neighbours."""
    if chi == 1:
        val = Fraction(beta(q, k - n + i - 1, i)) * delta(q, k - j + i - 1, i)
    elif chi == -1:
        val = Fraction(delta(q, k - n + i - 1, i)) * beta(q, k - j + i - 1, i)
    else:
        raise ValueError("chi must be +1 or -1")
    return _exact((-1) ** i * val)


def lambda_j(q: int, k: int, n: int, j: int, chi: int):
    """Eigenvalue of the genus theta series under T'_j.

    >>> lambda_j(2, 4, 1, 1, 1), lambda_j(3, 4, 2, 2, 1)
    (72, 68040)
    """
    if chi == 1 and j <= k:
        last = delta(q, k - 1, j)
    elif chi == -1 and j < k:
        last = mu(q, k - 1, j)
    else:
        return 0
    e = j * (k - n) + j * (j - 1) // 2
    return _exact(_qpow(q, e) * Fraction(beta(q, n, j)) * last)


def gcd_list(xs: Iterable[int]) -> int:
    g = 0
    for x in xs:
        g = gcd(g, int(x))
    return g
