"""Data-driven regularization by projection.

Learn a finite-rank surrogate of an unknown linear forward operator from
noisy training pairs and solve the inverse problem by least-squares
projection, by minimal Cameron-Martin-norm projection, or by MAP estimation.
"""

from .analysis import (
    ErrorDecomposition,
    LemmaReport,
    data_noise,
    lemma_check,
    noise_inject,
    proposition_check,
)
from .estimators import (
    BayesianProjection,
    LeastSquaresProjection,
    MAPEstimator,
    OperatorLearner,
    SampleGaussianPrior,
)
from .exceptions import (
    BadDimensionsError,
    DimensionMismatchError,
    EmptySetError,
    NoTruthError,
    NonFiniteError,
    NonPositiveAlphaError,
    NotInjectiveError,
    NumericalError,
    ProjregError,
    RankZeroError,
    TruncationTooLargeError,
    ValidationError,
)
from .linalg import (
    ThinSVD,
    hs_norm,
    pinv,
    pinv_tikhonov,
    smallest_singular,
    spectral_norm,
    thin_svd,
)
from .operator_learning import (
    LearnedOperator,
    collinearity_report,
    hs_deviation_bound_check,
    learn_centered,
    learn_uncentered,
    phi,
)
from .problems import (
    SyntheticProblem,
    example_images,
    make_collinear_images,
    make_smoothing_problem,
    sample_images,
)
from .solvers import Reconstruction, map_estimate, method1, method3, oracle_dls
from .training import (
    CenteredModel,
    TrainingSet,
    assemble,
    en_norm,
    rank_bounds_check,
    sample_stats,
)

__version__ = "0.1.0"
