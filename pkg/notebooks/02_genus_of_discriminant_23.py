"""
The genus of x^2 + xy + 6y^2
============================

Closes the genus under 2-neighbours and forms the weighted average of the
theta series.  The weights are 1/|O(L)|.
"""

from fractions import Fraction
from pathlib import Path

from thetahecke import Lattice
from thetahecke.genus import automorphism_group, genus_average_table, genus_classes
from thetahecke.theta import theta_table

DATA = Path(__file__).resolve().parents[1] / "data"
L = Lattice.from_json(DATA / "det23_a.json")

G = genus_classes(L, 2)
for C, order in G.classes:
    print("class", C.gram, "automorphisms", order)
print("mass", G.mass)
print("2-neighbour multiplicities", G.neighbor_matrix)

# x^2+xy+6y^2 has four automorphisms: +-1 and the reflection (x, y) -> (x+y, -y).
for g in automorphism_group(G.classes[0][0]).generators:
    print("  generator", g)

avg = genus_average_table(G, 1, 12)
for key, value in avg.items():
    print(f"  t = {key[0]:>2}: {value}")

# The average is a multiple of a weight-one Eisenstein series, so the ratio
# to the constant term only depends on t.  Single classes are not.
c0 = avg[((0,),)]
print("normalised:", [avg[((t,),)] / c0 for t in range(0, 13, 2)])
print("class 1 alone:", [theta_table(G.classes[0][0], 1, 12)[((t,),)] for t in range(0, 13, 2)])
assert G.mass == Fraction(3, 4)
