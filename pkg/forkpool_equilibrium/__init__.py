"""
ForkPool - Equilibrium Module

This module implements the equilibrium analysis of the pool-selection game:
vertex, interior and manifold equilibria in closed form, the cubic root
solver behind the two-pool case, Jacobian minor tests on the NSS manifold
and brute-force invasion checks.
"""

from .classifier import (
    classify,
    classify_equal_spec,
    is_fork_free,
    multi_pool_nss,
    ode_equilibrium,
    two_pool_conditions,
    two_pool_cubic_coefficients,
    two_pool_ess,
    two_pool_ess_limit,
)
from .cubic import cubic_real_roots, polynomial_value
from .result import EquilibriumResult
from .stability import (
    InvasionReport,
    JacobianMinors,
    basin_probe,
    default_invaders,
    finite_difference_jacobian,
    invasion_test,
    jacobian_minors,
    leading_minors,
    reduced_jacobian,
    sample_manifold_points,
)

__all__ = [
    'EquilibriumResult', 'cubic_real_roots', 'polynomial_value',
    'classify', 'classify_equal_spec', 'is_fork_free', 'multi_pool_nss', 'ode_equilibrium',
    'two_pool_conditions', 'two_pool_cubic_coefficients', 'two_pool_ess', 'two_pool_ess_limit',
    'InvasionReport', 'JacobianMinors', 'basin_probe', 'default_invaders', 'finite_difference_jacobian',
    'invasion_test', 'jacobian_minors', 'leading_minors', 'reduced_jacobian', 'sample_manifold_points',
]
