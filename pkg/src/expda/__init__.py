"""Exponential discriminant analysis with inexact Krylov eigensolvers.

Supervised dimensionality reduction where the scatter matrices are replaced
by their matrix exponentials, which are always symmetric positive definite
and therefore immune to the small-sample-size problem. The dominant
eigenpairs of the exponential pencil are computed by restarted Krylov
methods whose matrix-exponential-vector products use closed-form low-rank
updates costing O((k + n) d) each; no d x d matrix is ever formed outside
the oracle-scale reference routines.
"""

from .analysis import (
    SpectrumSummary,
    SubspaceAngle,
    count_unit_eigs,
    criterion_bounds,
    distance_bound_check,
    eda_optimum,
    eig_bounds,
    lda_optimum,
    spectrum_summary,
    subspace_angle,
)
from .backend import DEFAULT_BACKEND, available_backends
from .densela import (
    DEFAULT_ORACLE_CAP,
    QRFactors,
    SVDFactors,
    SymEig,
    expm_sym,
    qr_skinny,
    svd_small,
    sym_eig,
)
from .eda import (
    METHODS,
    CriterionValue,
    ProjectionBasis,
    criterion,
    fit_arnoldi_eda,
    fit_classical_lda,
    fit_eda_dense,
    fit_lanczos_eda,
    fit_lda_pca,
    fit_method,
    orthonormalize,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DatasetError,
    DimensionError,
    ExpdaError,
    IngestError,
    OracleScaleError,
    SingularScatterError,
    SymmetryError,
)
from .expops import (
    ExponentialOperator,
    ScatterFactorization,
    apply_nonsym,
    apply_sqrt_inv_w,
    apply_sym,
    dense_operator,
    exp_factor_apply,
    preprocess,
)
from .ingest import (
    SyntheticSpec,
    export_csv,
    ingest_csv,
    ingest_image_dir,
    make_synthetic,
    read_pgm,
    standard_benchmark,
)
from .krylov import (
    KrylovDecomposition,
    MatvecOperator,
    RitzPair,
    expand,
    ritz_extract,
    solve_dominant,
    start,
)
from .recognize import EvaluationReport, SplitSpec, evaluate, nn_classify, split
from .scatter import LabeledDataset, ScatterPair, build_scatter, dense_scatter

__version__ = "0.1.0"
