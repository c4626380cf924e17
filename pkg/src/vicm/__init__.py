"""Score-based estimation for high-dimensional varying index coefficient models.

The model is y = sum_j z_j f_j(<x, beta_j>) + noise with unknown links f_j.
Multiplying the response by the entrywise score of the design and by the
(precision-adjusted) covariate isolates the rescaled coefficients in closed
form; sparse vectors, low-rank matrices and sparse matrices each reduce to
one soft-threshold step.  Heavy tails are handled by hard truncation or by a
logarithmically saturating matrix truncation, and heavy-tailed covariate
dependence by truncated-covariance precision plug-ins.
"""

from .core import (
    CoefficientMatrix,
    ConfigError,
    Dataset,
    ModelSpec,
    TuningParams,
    VicmError,
    center_covariates,
    read_dataset_csv,
    validate_dataset,
    write_dataset_csv,
)
from .estimators import (
    MatrixResult,
    SparseVectorResult,
    cross_moment_hard,
    cross_moment_soft,
    default_tuning,
    lowrank_estimate,
    normalize_direction,
    sparse_matrix_estimate,
    sparse_vector_estimate,
)
from .experiment import ExperimentConfig, ExperimentResult, emit_results, load_config, run_experiment
from .metrics import ErrorRecord, bootstrap_ci, cosine_distance, matrix_cosine_sum, matrix_error_vs_tilde, mu_oracle
from .precision import (
    PrecisionEstimate,
    clime,
    clime_default_gamma,
    hard_truncated_covariance,
    identity_precision,
    precision_inverse,
    soft_truncated_covariance,
    solve_column_lp,
)
from .score import ScoreSpec, score_matrix, score_scalar
from .shrinkage import (
    hard_truncate,
    phi,
    soft_threshold_singular,
    soft_threshold_vector,
    soft_truncate_matrix,
)
from .synth import (
    CopulaSpec,
    ParamGenSpec,
    derive_rng,
    gen_dataset,
    gen_parameters,
    link_eval,
    normal_quantile,
    sample_design,
    sample_z_copula,
    sample_z_independent,
    t_quantile,
)

__version__ = "0.1.0"
