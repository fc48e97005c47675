"""Matrix-coefficient oscillator problems reduced to holomorphic ODEs on
the unit disk: pencil partial fractions, disk-automorphism covariance,
Heun-type scalar data, and spectra by truncation and by a connection
determinant."""

from .covariance import (
    INFINITY,
    Su11Element,
    apply_transcript,
    chordal_distance,
    gauge_problem,
    gauge_unitary,
    inverse_transcript,
    is_infinity,
    mobius_apply,
    normalize_a,
    normalize_problem,
    standardize_p2,
    transform_ab,
    transform_problem,
)
from .errors import (
    ContinuationError,
    ContractViolation,
    ConvergenceError,
    DegeneratePencil,
    NotAnEigenvalueError,
    NotGenericError,
    PositivityError,
    RefinementError,
    ResonanceError,
    SchemaError,
    SimplePoleViolation,
    SolverError,
)
from .fuchsian import (
    FuchsianSystem,
    build_fuchsian,
    exponents_at,
    residue_at_infinity_formula,
    transform_fuchsian,
)
from .heun import (
    HeunParameters,
    RabiParameters,
    apparent_singularity_residual,
    beta_gamma_closed_forms,
    confluence_residuals,
    confluent_limit_params,
    heun_equation_4pt,
    heun_like_parameters,
    quantization_check,
    rabi_jc_map,
    standard_ncho_problem,
)
from .linalg import (
    adjugate_and_det,
    eigen_general_small,
    eigen_hermitian,
    is_hermitian,
    is_positive_definite,
    is_unitary,
    poly_roots,
)
from .pencil import (
    NchoProblem,
    IdentityReport,
    PencilDecomposition,
    PositivityCertificate,
    a123_from_ab,
    ab_from_a123,
    decompose_pencil,
    decompose_quadratic_pencil,
    mu_from_harmonic,
    positivity_margin,
    verify_pencil_identities,
)
from .spectral import (
    SpectrumResult,
    TruncatedOperator,
    build_truncated,
    confluence_sweep,
    connection_determinant,
    connection_polarizations,
    eigenfunction_profile,
    laguerre_mode,
    rabi_truncated_spectrum,
    refine_eigenvalue,
    spectrum_connection,
    spectrum_truncated,
)

__version__ = "0.1.0"
