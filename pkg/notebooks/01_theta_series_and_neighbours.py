"""
Theta series and neighbours of E8
=================================

Counts lattice vectors by norm, then looks at the 2-neighbours of E8.
Run with ``python notebooks/01_theta_series_and_neighbours.py``.
"""

from pathlib import Path

import numpy as np

from thetahecke import Lattice
from thetahecke.genus import neighbors
from thetahecke.lattice import as_lattice, invariant_mults
from thetahecke.theta import theta_table

DATA = Path(__file__).resolve().parents[1] / "data"
E8 = Lattice.from_json(DATA / "e8.json")
print(E8.label, "rank", E8.m, "det", E8.det, "level", E8.level)

# Degree one: the number of vectors of each norm.  For E8 these are
# 240 * sigma_3(t/2), the weight-4 Eisenstein series.
t1 = theta_table(E8, 1, 8)
for key, value in t1.items():
    print(f"  norm {key[0]:>2}: {value}")

# Degree two: pairs of vectors with a prescribed 2x2 Gram matrix.  Keys are
# reduced forms [[a, b], [b, c]] with 0 <= 2b <= a <= c.
t2 = theta_table(E8, 2, 6)
for key, value in t2.items():
    print(f"  T = {key}: {value}")

# The 2-neighbours: one per isotropic line of E8/2E8.
N = neighbors(E8, 2, 1)
print(len(N), "neighbours at p = 2")
K = N.members[0]
print("invariant factors of the first one relative to E8:", invariant_mults(K, 2))

# E8 has class number one, so every neighbour is again E8.  Its Gram matrix
# after reduction has the same determinant and the same number of roots.
G = as_lattice(K)
print("neighbour det", G.det, "roots", int(theta_table(G, 1, 2)[((2,),)]))
print("Gram of the neighbour:\n", np.array(G.gram))
