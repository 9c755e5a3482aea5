"""Numerical cross-validation of curvature constructions on fiber bundles.

The package checks, at sampled points and to stated tolerances, that the
different faces of connection curvature agree with each other: projection
commutators against coordinate formulas, iterated-jet commutators against
both, structure-equation curvature against its chart and section routes,
and the linear special case against the classical three-index formula.
Everything is driven either as a library or through the ``curvcheck`` CLI
on a JSON config.
"""

from .bundle import (
    BundlePatch,
    ChristoffelField,
    FiberBundleMorphism,
    ParallelMorphismReport,
    Section,
    TotalTangent,
    TotalVectorField,
    VerticalVector,
    covariant_derivative,
    curvature_coefficients,
    embed,
    horizontal_lift,
    is_parallel_morphism,
    lie_bracket,
    nijenhuis_curvature,
    project,
    pushforward,
)
from .errors import (
    ClosureViolation,
    ConfigSchemaError,
    CurvcheckError,
    DifferentiationUnsupported,
    DomainError,
    ExprSyntaxError,
    FiberMismatch,
    IndexOutOfRange,
    InternalDisagreement,
    IoError,
    NotVertical,
    SingularMatrix,
    UnknownIdentifier,
)
from .exprdsl import Expression, parse, unparse
from .lie import (
    AlgebraElement,
    GroupElement,
    MatrixLieAlgebra,
    adjoint,
    bracket,
    builtin_algebra,
    exp,
    fiber_quotient,
)
from .linear import (
    LinearChristoffel,
    LinearityReport,
    classical_curvature,
    expand_linear,
    linear_curvature_consistency,
    linearity_detect,
    reduced_covariant,
    scaling_morphism,
)
from .numcore import EvalPoint, evaluate, gradient, mixed_second, partial
from .principal import (
    CurvatureField,
    GaugePotential,
    PrincipalTangent,
    cartan_curvature,
    check_axiom,
    curvature_cross_check,
    exponential_chart_connection,
    omega_eval,
    theta_bch,
    theta_bch_verify,
    vtriv_principal,
)
from .prolong import (
    SecondJet,
    VerticalPairBase,
    affine_diff,
    commutator_curvature,
    pi,
    pushforward_second_jet,
    second_covariant,
    theta,
    vertical_connection,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # expressions and evaluation
    "Expression",
    "parse",
    "unparse",
    "EvalPoint",
    "evaluate",
    "gradient",
    "partial",
    "mixed_second",
    # bundles and connections
    "BundlePatch",
    "ChristoffelField",
    "Section",
    "TotalTangent",
    "TotalVectorField",
    "VerticalVector",
    "FiberBundleMorphism",
    "ParallelMorphismReport",
    "project",
    "embed",
    "horizontal_lift",
    "covariant_derivative",
    "lie_bracket",
    "nijenhuis_curvature",
    "curvature_coefficients",
    "pushforward",
    "is_parallel_morphism",
    # second jets
    "SecondJet",
    "VerticalPairBase",
    "theta",
    "pi",
    "affine_diff",
    "pushforward_second_jet",
    "vertical_connection",
    "second_covariant",
    "commutator_curvature",
    # Lie machinery
    "MatrixLieAlgebra",
    "AlgebraElement",
    "GroupElement",
    "bracket",
    "exp",
    "adjoint",
    "fiber_quotient",
    "builtin_algebra",
    # principal connections
    "GaugePotential",
    "PrincipalTangent",
    "CurvatureField",
    "omega_eval",
    "check_axiom",
    "vtriv_principal",
    "cartan_curvature",
    "exponential_chart_connection",
    "curvature_cross_check",
    "theta_bch",
    "theta_bch_verify",
    # linear connections
    "LinearChristoffel",
    "LinearityReport",
    "expand_linear",
    "classical_curvature",
    "reduced_covariant",
    "linearity_detect",
    "linear_curvature_consistency",
    "scaling_morphism",
    # errors
    "CurvcheckError",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "IndexOutOfRange",
    "DomainError",
    "InternalDisagreement",
    "FiberMismatch",
    "ClosureViolation",
    "SingularMatrix",
    "NotVertical",
    "DifferentiationUnsupported",
    "IoError",
    "ConfigSchemaError",
]
