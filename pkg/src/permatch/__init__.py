"""Counting partial matchings through sums of subpermanents and subhafnians.

Exact counts come from a polynomial-oracle form of Ryser's inclusion-exclusion;
approximate counts and lower bounds come from the capacity of positive
hyperbolic polynomials.
"""
from .bounds import (EntropyCurveRow, RegularityProfile, dimer_density, entropy_curve,
                     expected_perm_m, expected_perm_m_fixed_J, fh, format_entropy_csv,
                     frtverv3_bound, ft_lower_bound, generalized_ft_bound, gh,
                     gurvits_schrijver_bound, h_K, matching_lower_bound, max_fh,
                     newton_amgm_bound, palrpc_bound, pressure_K)
from .capacity import (CapacityResult, ConvergenceError, PermBounds, approx_perm_m,
                       capacity_via_sinkhorn, log_capacity, p_kA_oracle, positivity_check,
                       sinkhorn_scale)
from .core import (BudgetExceeded, FormatError, RationalMatrix, SimpleGraph, SymmetricMatrix,
                   bipartite_to_symmetric, complete_bipartite, graph_to_adjacency,
                   is_doubly_stochastic, parse_graph, parse_matrix, subsets)
from .exact import (PolynomialOracle, brute_force_haf_m, brute_force_perm_m, check_real_rooted,
                    haf_m, matching_sequence, multilinear_sum, perm_m, ryser_coefficients,
                    signed_matching_polynomial)
from .random_regular import (exact_expectation_small, monte_carlo_expectation,
                             sample_configuration, sample_random_doubly_stochastic)
from .spectral import (classify_complete_multipartite, hyperbolicity_cross_check,
                       is_quadratic_hyperbolic, spectral_hyperbolic)

__version__ = "0.1.0"
