"""Exact theta series, lattice neighbours and Hecke eigenvalue checks for even lattices."""

from .arith import CapacityError, beta, kronecker, lambda_j, u_coeff, v_coeff
from .ffquad import FFQuadSpace, alpha_j, count_totally_isotropic, thm45_closing_identity_check
from .genus import GenusDecomposition, aut_order, automorphism_group, genus_classes, is_isometric, neighbors
from .hecke import (OmegaClass, LambdaPosition, VerificationReport, lambda_positions, omega_classes_at,
                    rhs_thm53_table, tprime_coefficient, ttilde_coefficient, verify_eigenvalue)
from .lattice import Lattice, LatticeError, SubframeBasis
from .theta import CoeffTable, rep_number, theta_table

__version__ = "0.1.0"
