"""Optimal binary quantum detection by decision-operator and skew Gram methods."""

from .closedform import (
    ComparisonSpec,
    GusParameters,
    PositiveSum,
    Rank2Parameters,
    comparison_eigenvalues,
    comparison_pc,
    comparison_pe_equal_priors,
    gus_eigenvalues,
    gus_hl,
    gus_pc,
    gus_pc_orthogonal,
    gus_pc_pure,
    pure_bound,
    pure_eigenvalues,
    pure_skew_gram,
    quartic_rs,
    rank2_coefficients,
    rank2_coefficients_symbolic,
    rank2_positive_sum,
)
from .detection import (
    BinaryEnsemble,
    DetectionResult,
    GramPair,
    MeasurementReport,
    build_gram_pair,
    decision_operator,
    factor_ensemble,
    gram_pair_from_gram,
    helstrom_solve,
    is_gus,
    sgm_solve,
    verify_measurement,
)
from .errors import SkewGramError
from .linalg import (
    QuarticCoefficients,
    char_poly,
    general_eig_small,
    hermitian_eig,
    matrix_rank,
    solve_biquadratic,
    solve_quartic,
)
from .states import (
    CoherentSpec,
    DensityOperator,
    FactorSet,
    coherent_ket,
    displaced_thermal,
    extract_rank2_parameters,
    factor_density,
    pure_density,
)

__version__ = "0.1.0"
