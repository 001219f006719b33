"""Gaussian random assignment field: simulation, exact enumeration, bounds.

The field assigns to every permutation ``u`` of ``{1..n}`` the normalized
cost ``n**-0.5 * sum_i c(i, u(i))`` of the corresponding assignment, where
the ``c(i, j)`` are independent standard Gaussian costs.  This package
computes the maximum and minimum of the field exactly, runs reproducible
Monte Carlo studies of their moments, enumerates near-maximal assignment
sets for small ``n``, and evaluates the matching closed-form bounds.
"""

from graf.bounds import (
    BoundsRow,
    NearMaxBound,
    bounds_row,
    chatterjee_bound,
    chatterjee_bound_exact,
    expected_max_iid_gaussian,
    greedy_lower_bound,
    nearmax_regime_threshold,
    nearmax_theorem_bound,
    trivial_upper_bound_expected_max,
    upper_bound_expected_max,
    variance_lower_bound,
)
from graf.combinatorics import (
    RencontresTable,
    alternating_tail_identity,
    ball_size,
    ball_size_upper_bound,
    derangement_count,
    log_factorial,
    mean_correlation,
    rencontres_count,
    rencontres_proportion,
)
from graf.enumerator import (
    BallSizeCheck,
    DimensionSummary,
    NearMaxReport,
    correlation_histogram_exact,
    dimension_study,
    enumerate_field,
    enumerated_field_mean,
    mean_correlation_exhaustive,
    near_maximal_set,
    nearmax_table,
    verify_ball_size,
)
from graf.field import (
    CostMatrix,
    FieldValue,
    Permutation,
    correlation,
    field_value,
    hamming_distance,
    identity_permutation,
    l2_distance,
    read_matrix_csv,
    sample_cost_matrix,
    write_matrix_csv,
)
from graf.montecarlo import (
    EstimateReport,
    FieldSample,
    RunningCovariance,
    RunningStats,
    StatSummary,
    SymmetryReport,
    derive_seed,
    estimate,
    ks_statistic,
    merge_stats,
    ratio_table,
    run_replication,
    symmetry_check,
)
from graf.solvers import (
    SolveResult,
    greedy_assignment,
    solve_max_bruteforce,
    solve_max_exact,
    solve_min_exact,
)

__version__ = "0.1.0"

__all__ = [
    "BallSizeCheck",
    "BoundsRow",
    "CostMatrix",
    "DimensionSummary",
    "EstimateReport",
    "FieldSample",
    "FieldValue",
    "NearMaxBound",
    "NearMaxReport",
    "Permutation",
    "RencontresTable",
    "RunningCovariance",
    "RunningStats",
    "SolveResult",
    "StatSummary",
    "SymmetryReport",
    "alternating_tail_identity",
    "ball_size",
    "ball_size_upper_bound",
    "bounds_row",
    "chatterjee_bound",
    "chatterjee_bound_exact",
    "correlation",
    "correlation_histogram_exact",
    "derangement_count",
    "derive_seed",
    "dimension_study",
    "enumerate_field",
    "enumerated_field_mean",
    "estimate",
    "expected_max_iid_gaussian",
    "field_value",
    "greedy_assignment",
    "greedy_lower_bound",
    "hamming_distance",
    "identity_permutation",
    "ks_statistic",
    "l2_distance",
    "log_factorial",
    "mean_correlation",
    "mean_correlation_exhaustive",
    "merge_stats",
    "near_maximal_set",
    "nearmax_regime_threshold",
    "nearmax_table",
    "nearmax_theorem_bound",
    "ratio_table",
    "read_matrix_csv",
    "rencontres_count",
    "rencontres_proportion",
    "run_replication",
    "sample_cost_matrix",
    "solve_max_bruteforce",
    "solve_max_exact",
    "solve_min_exact",
    "symmetry_check",
    "trivial_upper_bound_expected_max",
    "upper_bound_expected_max",
    "variance_lower_bound",
    "verify_ball_size",
    "write_matrix_csv",
]
