"""Sobolev regularity verdicts for nonlocal elliptic corner problems.

The pipeline: describe the frozen model problem on a union of plane angles
(:mod:`~corner_pencil.config`), discretize its lambda-analytic operator
family (:mod:`~corner_pencil.pencil`), locate and classify the band spectrum
(:mod:`~corner_pencil.spectrum`), check tangential trace consistency
(:mod:`~corner_pencil.tangential`), and combine the evidence into a verdict
(:mod:`~corner_pencil.verdict`), independently corroborated by field
residuals and Sobolev probes (:mod:`~corner_pencil.verify`).
"""

from . import errors
from .config import (
    NonlocalTerm,
    OrbitConfig,
    SideId,
    ValidatedConfig,
    load_config,
    orbit_config,
    parse_config,
    side_tangent,
    transform_matrix,
    validate,
)
from .pencil import assemble, det_log, discretize, mellin_symbol, pencil_derivative
from .spectrum import (
    BandQuery,
    BandResult,
    EigenvalueRecord,
    classify,
    count_zeros,
    eigenbasis,
    has_associated,
    locate_eigenvalues,
    polynomial_degree_test,
)
from .tangential import (
    AdmissibleSet,
    ConsistencyReport,
    SampledTrace,
    SmoothTrace,
    TangentialSystem,
    admissible_vectors,
    check_condition4,
    check_condition4prime,
    consistency_check,
    constant_vector_consistency,
    graded_mesh,
    poly_trace,
    rhs_membership,
    tangential_system,
    zero_trace,
)
from .verdict import Verdict, decide, explain, parse_explanation
from .verify import (
    SingularField,
    nonlocal_bc_residual,
    pde_residual,
    sobolev_probe,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet",
    "BandQuery",
    "BandResult",
    "ConsistencyReport",
    "EigenvalueRecord",
    "NonlocalTerm",
    "OrbitConfig",
    "SampledTrace",
    "SideId",
    "SingularField",
    "SmoothTrace",
    "TangentialSystem",
    "ValidatedConfig",
    "Verdict",
    "admissible_vectors",
    "assemble",
    "check_condition4",
    "check_condition4prime",
    "classify",
    "consistency_check",
    "constant_vector_consistency",
    "count_zeros",
    "decide",
    "det_log",
    "discretize",
    "eigenbasis",
    "errors",
    "explain",
    "graded_mesh",
    "has_associated",
    "load_config",
    "locate_eigenvalues",
    "mellin_symbol",
    "nonlocal_bc_residual",
    "orbit_config",
    "parse_config",
    "parse_explanation",
    "pde_residual",
    "pencil_derivative",
    "poly_trace",
    "polynomial_degree_test",
    "rhs_membership",
    "side_tangent",
    "sobolev_probe",
    "tangential_system",
    "transform_matrix",
    "validate",
    "zero_trace",
]
