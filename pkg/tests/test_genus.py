from fractions import Fraction

import numpy as np
import pytest

from thetahecke.ffquad import FFQuadSpace, count_totally_isotropic
from thetahecke.genus import (BudgetExceeded, aut_order, automorphism_group, genus_average_table, genus_classes,
                              is_isometric, neighbor_count, neighbor_theta_sum, neighbors)
from thetahecke.lattice import Lattice, as_lattice, invariant_mults, is_even_integral
from thetahecke.theta import theta_table

import oracles
from test_lattice import A1A1, A4, D4, DET23_A, DET23_B, E8

DET7 = [[2, 1], [1, 4]]


def _hnf_key(K, p):
    """Row HNF of p*K in L-coordinates, the oracle's normal form."""
    from thetahecke import arith
    f = p // K.den
    rows = [[f * x for x in col] for col in zip(*K.num)]
    return tuple(tuple(r) for r in arith.hnf_rows(rows))


@pytest.mark.parametrize("G, p, r", [(A1A1, 3, 1), (DET23_A, 2, 1), (DET23_A, 3, 1), (DET23_B, 3, 1),
                                     (DET7, 2, 1), (A4, 2, 1), (D4, 3, 1), (D4, 3, 2)])
def test_neighbours_match_brute_force(G, p, r):
    L = Lattice(G)
    mine = {_hnf_key(K, p) for K in neighbors(L, p, r).members}
    brute = set(oracles.neighbors_brute(G, p, r))
    assert mine == brute
    assert len(neighbors(L, p, r)) == len(brute) == neighbor_count(L, p, r)


def test_neighbour_invariants_e8():
    L = Lattice(E8)
    N = neighbors(L, 2, 1)
    assert len(N) == 135 == oracles.isotropic_lines(E8, 2)
    for K in N.members[:20]:
        assert invariant_mults(K, 2) == {-1: 1, 0: 6, 1: 1}
        assert is_even_integral(K)
        assert as_lattice(K).det == 1
    assert len(neighbors(L, 2, 0)) == 1


def test_neighbours_at_bad_prime_rejected():
    with pytest.raises(ValueError):
        neighbors(Lattice(DET23_A), 23, 1)


def test_lift_count_per_subspace():
    L = Lattice(D4)
    V = FFQuadSpace.from_even_gram(D4, 3)
    assert len(neighbors(L, 3, 2)) == 3 * count_totally_isotropic(V, 2)


@pytest.mark.parametrize("G", [A1A1, DET23_A, DET23_B, DET7])
def test_aut_orders_match_brute_force(G):
    assert aut_order(Lattice(G)) == oracles.automorphisms_brute(G, box=3)


def test_aut_order_values():
    assert aut_order(Lattice(DET23_A)) == 4
    assert aut_order(Lattice(DET23_B)) == 2
    assert aut_order(Lattice(A1A1)) == 8
    assert aut_order(Lattice([[2, 1], [1, 2]])) == 12
    assert aut_order(Lattice(E8)) == 696729600
    for g in automorphism_group(Lattice(D4)).generators:
        g = np.array(g)
        assert np.array_equal(g.T @ np.array(D4) @ g, np.array(D4))


def test_isometry_examples():
    L = Lattice(DET23_B)
    W = is_isometric(L, L)
    assert W is not None
    W = np.array(is_isometric(L, Lattice([[4, -1], [-1, 6]])))
    assert np.array_equal(W.T @ np.array(DET23_B) @ W, np.array([[4, -1], [-1, 6]]))
    assert is_isometric(Lattice(DET23_A), L) is None
    with pytest.raises(BudgetExceeded):
        is_isometric(Lattice(E8), Lattice(E8), budget=3)


def test_det23_genus():
    G = genus_classes(Lattice(DET23_A), 2)
    grams = [[list(r) for r in C.gram] for C, _ in G.classes]
    assert len(grams) == 2
    # the proper classes are x^2+xy+6y^2 and 2x^2+-xy+3y^2; GL_2 merges the last two
    assert {(g[0][0], abs(g[0][1]), g[1][1]) for g in grams} == {(2, 1, 12), (4, 1, 6)}
    assert len(oracles.reduced_binary_forms(-23)) == 2
    assert [o for _, o in G.classes] == [4, 2]
    assert G.mass == Fraction(3, 4)
    assert G.certified
    # every neighbour of each class is one of the classes
    for C, _ in G.classes:
        for K in neighbors(C, 2, 1).members:
            N = as_lattice(K)
            assert any(is_isometric(N, R) is not None for R, _ in G.classes)


def test_genus_average_det23():
    G = genus_classes(Lattice(DET23_A), 2)
    t = genus_average_table(G, 1, 2)
    # only [[2,1],[1,12]] represents 2, by two vectors, and it has 4 automorphisms
    assert t[((2,),)] == Fraction(1, 2)
    assert t[((0,),)] == Fraction(3, 4)


def test_genus_of_e8_is_one_class():
    G = genus_classes(Lattice(E8), 2)
    assert len(G.classes) == 1 and G.classes[0][1] == 696729600
    assert G.neighbor_matrix == [[135]]
    assert genus_average_table(G, 1, 4) == theta_table(Lattice(E8), 1, 4).scaled(Fraction(1, 696729600))


def test_genus_json_is_stable():
    a = genus_classes(Lattice(DET23_A), 2).to_json()
    b = genus_classes(Lattice(DET23_B), 3).to_json()
    assert a == genus_classes(Lattice(DET23_A), 2).to_json()
    assert '"aut_order": 4' in a and '"aut_order": 4' in b


@pytest.mark.parametrize("G, p, r", [(A4, 2, 1), (A4, 3, 1), (D4, 3, 1), (D4, 3, 2), (DET7, 2, 1), (E8, 2, 1)])
@pytest.mark.parametrize("n", [1, 2])
def test_neighbour_sum_routes_agree(G, p, r, n):
    L = Lattice(G)
    B = 4 if G is E8 else 6
    assert neighbor_theta_sum(L, p, r, n, B, "direct") == neighbor_theta_sum(L, p, r, n, B, "classes")


def test_neighbour_sum_direct_against_rep_number():
    L = Lattice(DET23_A)
    total = None
    for K in neighbors(L, 3, 1).members:
        t = theta_table(K, 2, 6)
        total = t if total is None else total + t
    assert neighbor_theta_sum(L, 3, 1, 2, 6) == total


def test_class_route_refuses_multi_class_genus():
    with pytest.raises(ValueError):
        neighbor_theta_sum(Lattice(DET23_A), 3, 1, 1, 4, "classes")
