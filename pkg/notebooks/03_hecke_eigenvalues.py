"""
Hecke eigenvalues of genus theta series
=======================================

The operator T'_j(p^2) can be evaluated two ways: by summing over
sublattices of p^-1 L with fixed Gram matrix, or by summing theta series over
neighbours.  Both agree lattice by lattice, and on the genus average they
return lambda_j times the input.
"""

from pathlib import Path

from thetahecke import Lattice
from thetahecke.arith import lambda_j
from thetahecke.hecke import rhs_thm53_table, tprime_coefficient, verify_eigenvalue

DATA = Path(__file__).resolve().parents[1] / "data"
A4 = Lattice.from_json(DATA / "a4.json")
L = Lattice.from_json(DATA / "det23_a.json")

# Per lattice: A4 at p = 2 has chi = -1, a useful control.
p, n, j = 2, 1, 1
print("A4, chi*(2) =", A4.chi_star(p))
rhs = rhs_thm53_table(A4, p, n, j, 8)
for key, value in rhs.items():
    if key[0]:
        print(f"  T = {key}: sublattices {tprime_coefficient(A4, p, n, j, [list(key)])}  neighbours {value}")

# On the genus: the det-23 genus at p = 2 has eigenvalue 2.
print("lambda_1 =", lambda_j(2, 1, 1, 1, 1))
print(verify_eigenvalue(L, 2, 1, 1, 8).to_text())

# At p = 5 the character is -1 and j = k, so the genus average is killed.
print(verify_eigenvalue(L, 5, 1, 1, 8).to_text())
