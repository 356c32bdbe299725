from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetahecke.arith import CapacityError
from thetahecke.lattice import Lattice, SubframeBasis
from thetahecke.theta import (CoeffTable, canonical_keys, canonicalize_T, is_psd_even, key_of, rep_number,
                              short_vectors, theta_table)

import oracles
from test_lattice import A1A1, A4, D4, DET23_A, DET23_B, E8

SMALL = [A1A1, DET23_A, DET23_B, [[2, 1], [1, 4]], A4, D4]


def test_rep_number_examples():
    assert rep_number(Lattice(A1A1), [[0]]) == 1
    assert rep_number(Lattice(A1A1), [[2]]) == 4
    assert rep_number(Lattice(E8), [[2]]) == 240
    assert rep_number(Lattice(E8), [[0, 0], [0, 0]]) == 1


def test_e8_degree_one_series():
    t = theta_table(Lattice(E8), 1, 8)
    # 240 * sigma_3(t/2)
    assert [t[((s,),)] for s in range(0, 10, 2)] == [1, 240, 2160, 6720, 17520]


def test_e8_degree_two_frozen():
    # frozen from the box-enumeration oracle
    t = theta_table(Lattice(E8), 2, 6)
    assert t[[[2, 0], [0, 2]]] == 30240
    assert t[[[2, 1], [1, 2]]] == 13440
    assert t[[[2, 0], [0, 4]]] == 181440
    assert t[[[2, 1], [1, 4]]] == 138240


@pytest.mark.parametrize("G", SMALL)
@pytest.mark.parametrize("n", [1, 2])
def test_theta_table_matches_box_enumeration(G, n):
    B = 8 if n == 1 else 6
    t = theta_table(Lattice(G), n, B)
    brute = oracles.theta_brute(G, n, B)
    for K in canonical_keys(n, B):
        assert t[K] == brute.get(key_of(K), 0), K


@pytest.mark.parametrize("G", SMALL)
def test_degree_one_total_counts_all_short_vectors(G):
    t = theta_table(Lattice(G), 1, 10)
    X, N = oracles.box_vectors(G, 10)
    assert sum(t.entries.values()) == len(X)


@pytest.mark.parametrize("G", [A1A1, DET23_A, A4])
def test_degree_two_total_over_all_indices(G):
    # every (possibly non-canonical) index lands on its canonical key
    B = 6
    t = theta_table(Lattice(G), 2, B)
    brute = oracles.theta_brute(G, 2, B)
    total = 0
    for k, v in brute.items():
        if k[0] + k[3] <= B:
            assert t[[[k[0], k[1]], [k[2], k[3]]]] == v
            total += v
    X, N = oracles.box_vectors(G, B)
    assert total == sum(int((N <= B - a).sum()) for a in N.tolist())


def test_column_consistency():
    G = DET23_A
    brute = oracles.theta_brute(G, 2, 8)
    first = oracles.theta_brute(G, 1, 8)
    X, N = oracles.box_vectors(G, 8)
    for t in (2, 4):
        total = sum(v for k, v in brute.items() if k[0] == t and k[3] <= 8 - t)
        assert total == first[(t,)] * int((N <= 8 - t).sum())


def test_shortvectors_are_exact():
    X, N = short_vectors(E8, 4)
    G = np.array(E8)
    assert np.array_equal(np.einsum("ni,ij,nj->n", X, G, X), N)
    assert len(X) == 1 + 240 + 2160


def test_canonicalize_examples():
    assert canonicalize_T([[4]]) == ((4,),)
    assert canonicalize_T([[2, -1], [-1, 2]]) == ((2, 1), (1, 2))
    assert canonicalize_T([[4, 0], [0, 2]]) == ((2, 0), (0, 4))
    assert canonicalize_T([[2, 2], [2, 2]]) == ((2, 0), (0, 0))
    assert canonicalize_T([[4, 0, 0], [0, 2, 0], [0, 0, 6]]) == ((2, 0, 0), (0, 4, 0), (0, 0, 6))
    with pytest.raises(ValueError):
        canonicalize_T([[2, 1, 0], [1, 2, 0], [0, 0, 2]])
    with pytest.raises(ValueError):
        canonicalize_T([[1, 0], [0, 2]])
    assert not is_psd_even([[2, 3], [3, 2]])


def _brute_class(T, box=3):
    """All GL_2(Z) images of T with entries of U in [-box, box]."""
    out = set()
    for a in range(-box, box + 1):
        for b in range(-box, box + 1):
            for c in range(-box, box + 1):
                for d in range(-box, box + 1):
                    if abs(a * d - b * c) == 1:
                        U = np.array([[a, b], [c, d]])
                        out.add(tuple((U.T @ np.array(T) @ U).ravel().tolist()))
    return out


def test_canonical_keys_are_pairwise_inequivalent():
    keys = [K for K in canonical_keys(2, 10) if K[0][0] * K[1][1] - K[0][1] ** 2 > 0]
    for i, K in enumerate(keys):
        cls = _brute_class(K)
        for K2 in keys[i + 1:]:
            assert key_of(K2) not in cls


unimodular = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(
    lambda t: np.array([[1, t[0]], [0, 1]]) @ np.array([[1, 0], [t[1], 1]]))


@settings(max_examples=20, deadline=None)
@given(unimodular, st.sampled_from([[[2, 0], [0, 2]], [[2, 1], [1, 2]], [[2, 0], [0, 4]], [[4, 1], [1, 2]]]))
def test_rep_number_is_gl2_invariant(U, T):
    T = np.array(T)
    S = U.T @ T @ U
    L = Lattice(DET23_A)
    assert rep_number(L, S.tolist()) == rep_number(L, T.tolist())
    assert canonicalize_T(S.tolist()) == canonicalize_T(T.tolist())


def test_rep_number_on_subframe_scales_the_gram():
    L = Lattice(A1A1)
    K = SubframeBasis(L, [[1, 0], [0, 1]], 2)
    assert rep_number(K, [[2]]) == 4
    half = SubframeBasis(L, [[1, 1], [1, -1]], 2)   # (e1 +- e2), norm 4
    assert rep_number(half, [[4]]) == 4


def test_node_budget():
    with pytest.raises(CapacityError):
        rep_number(Lattice(E8), [[4, 0], [0, 4]], node_budget=1000)


def test_isometric_lattices_share_tables():
    a = theta_table(Lattice([[4, 1], [1, 6]]), 2, 8)
    b = theta_table(Lattice([[4, -1], [-1, 6]]), 2, 8)
    assert a == b


def test_table_serialization_round_trip():
    t = theta_table(Lattice(DET23_B), 2, 8).scaled(Fraction(1, 2))
    assert CoeffTable.from_csv(t.to_csv(), t.bound) == t
    assert CoeffTable.from_json(t.to_json()) == t
    assert t.to_csv() == CoeffTable.from_csv(t.to_csv(), t.bound).to_csv()
    assert theta_table(Lattice(E8), 1, 4).to_csv() == "t00,num,den\n0,1,1\n2,240,1\n4,2160,1\n"
