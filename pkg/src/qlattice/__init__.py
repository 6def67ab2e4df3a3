"""Markov kernels, q-B-splines and q-Laplace transforms on the two-sided q-lattice."""

from .lattice import (
    Config,
    ExtConfig,
    InfiniteEnumerationError,
    LatticePoint,
    QParams,
    DEFAULT_PARAMS,
    enumerate_interval,
    interlaces,
    interval_contains,
    parse_config,
    value,
)
from .qcalc import (
    QComplex,
    QPolynomial,
    NonConvergenceError,
    divided_difference,
    q_derivative,
    q_derivative_at_zero,
    q_factorial,
    q_integral,
    q_number,
    q_pochhammer,
    q_pochhammer_inf,
    vandermonde,
)
from .symfunc import (
    Partition,
    h_m,
    h_principal,
    normalized_schur,
    normalized_schur_inf,
    schur,
    schur_principal,
    schur_principal_inf,
)
from .kernels import (
    DiscreteMeasure,
    EvalPoints,
    eval_f_AZ,
    eval_f_Z,
    lambda_closed_N1,
    lambda_closed_NK,
    lambda_inf,
    lambda_inf_residue,
    link_measure,
    link_weight,
    moment_check,
    residue_orthogonality,
    telescope,
    verify_product_identity,
    verify_partial_delta_identity,
)
from .splines import hermite_genocchi, qbspline, qbspline_moment, vandermonde_ratio
from .transforms import Contour, DecayError, default_contour, inv_qlaplace, qlaplace
from .boundary import (
    CoherentFamily,
    boundary_moment_check,
    coherence_check,
    extreme_family,
    regular_limit,
)
from .sampler import (
    RngState,
    empirical_moment_test,
    sample_chain,
    sample_link,
    trajectory_lines,
)

__version__ = "0.1.0"
