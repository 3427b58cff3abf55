"""Randomized QLP decomposition toolkit.

Factors a dense matrix as ``A = Q L P'`` (orthonormal Q and P, lower
triangular L whose diagonal tracks the singular values) using only matrix
products and unpivoted QR, alongside the classical pivoted baselines, an
exact Jacobi SVD oracle, deterministic error-bound verification, synthetic
test-matrix generation, and approximation metrics.
"""

from .bounds import (
    BoundReport,
    OmegaSplit,
    check_value_bounds,
    check_angle_bounds,
    evaluate_bounds,
    omega_split,
    omega_split_from,
)
from .decompositions import (
    QlpBlocks,
    QlpFactors,
    flops_cpqr,
    flops_rand_qlp,
    pivoted_qlp,
    rand_qlp,
    rank_k_approx,
)
from .errors import (
    CapacityError,
    ContractError,
    ConvergenceError,
    NonFiniteError,
    NotApplicableError,
    ParameterError,
    ParseError,
    ShapeError,
    SingularSketchError,
)
from .estimators import JacobiSVD, PivotedQLP, RandQLP
from .kernels import (
    CpqrFactors,
    QrFactors,
    SvdFactors,
    cpqr,
    jacobi_svd,
    matmul,
    qr,
    spectral_norm,
)
from .matgen import (
    KINDS,
    SpectrumSpec,
    TestMatrix,
    build,
    matrix_market_read,
    random_orthogonal,
    sigma_profile,
)
from .matio import read_matrix, write_matrix
from .metrics import (
    ApproxErrorCurve,
    SvComparison,
    lowrank_error_curve,
    relative_error,
    subspace_distance,
    sv_compare,
    write_error_curve_csv,
    write_sv_comparison_csv,
)
from .rng import GaussianStream, gaussian_matrix

__version__ = "0.1.0"
