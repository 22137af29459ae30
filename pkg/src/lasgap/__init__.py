"""Lasserre-hierarchy relaxations and integrality-gap certificates for 0/1 problems."""
from .subsets import (
    CapacityError,
    DomainError,
    MomentVector,
    PseudoDistribution,
    alt_binomial_sum,
    enumerate_subsets,
    mobius_transform,
    zeta_transform,
)
from .moments import LinearConstraint, SymMatrix
from .psd import VerificationReport, exact_inertia, numeric_min_eigenvalue, verify_conditions

__version__ = "0.1.0"
