"""Information geometry of finite exponential families.

Fisher metrics, Amari-Chentsov tensors, alpha-connections, curvature,
geodesics and transport; pre-Frobenius (WDVV) diagnostics; paracomplex
splittings; KL moment-matching fits.
"""
from .errors import (
    BadFace,
    BlowUp,
    DegeneratePlane,
    DimMismatch,
    EmptyTrace,
    EvalFailure,
    InfoGeomError,
    InvalidInput,
    IoError,
    IterLimit,
    NoDescent,
    NonAssociative,
    NotSemisimple,
    ParseError,
    RankError,
    SingularMetric,
    UnsupportedOrder,
    UsageError,
)
from .expfam import (
    ExponentialFamily,
    GaussianFamily,
    ProbVector,
    SampleSpace,
    ThetaPoint,
    canonical_to_prob,
    ceva_line,
    density,
    expectation,
    gaussian_expectation,
    gaussian_score,
    log_partition,
    mean_statistics,
    score_matrix,
    simplex_fields,
)
from .frobenius import (
    PreFrobeniusData,
    associativity_defect,
    circle_product,
    monge_ampere_density,
    potentiality_residual,
    semisimple_idempotents,
    structure_connection,
    structure_connection_residuals,
    structure_constants,
    wdvv_residual,
)
from .geometry import (
    ConnectionField,
    GeodesicPath,
    alpha_connection,
    amari_chentsov,
    bianchi_residual,
    curvature,
    fisher_metric,
    geodesic,
    levi_civita,
    logistic_flow,
    metric_compatibility_residual,
    parallel_transport,
    rk4_integrate,
    sectional_curvature,
    torsion,
)
from .learning import (
    IterationRecord,
    LearningTrace,
    fit_ahs,
    gws_correlator,
    kl_divergence,
    kl_gradient,
    kl_objective,
    trace_split_diagnostics,
)
from .paracomplex import (
    E_MINUS,
    E_PLUS,
    EPS,
    ParacomplexNumber,
    SplitVector,
    join,
    pc_mul,
    pc_norm,
    project_minus,
    project_plus,
    split,
)
from .tensors import MixedTensor12, SymTensor, finite_diff, lower_index, metric_inverse, raise_index

__version__ = "0.1.0"

__all__ = [
    "BadFace",
    "BlowUp",
    "ConnectionField",
    "DegeneratePlane",
    "DimMismatch",
    "EPS",
    "E_MINUS",
    "E_PLUS",
    "EmptyTrace",
    "EvalFailure",
    "ExponentialFamily",
    "GaussianFamily",
    "GeodesicPath",
    "InfoGeomError",
    "InvalidInput",
    "IoError",
    "IterLimit",
    "IterationRecord",
    "LearningTrace",
    "MixedTensor12",
    "NoDescent",
    "NonAssociative",
    "NotSemisimple",
    "ParacomplexNumber",
    "ParseError",
    "PreFrobeniusData",
    "ProbVector",
    "RankError",
    "SampleSpace",
    "SingularMetric",
    "SplitVector",
    "SymTensor",
    "ThetaPoint",
    "UnsupportedOrder",
    "UsageError",
    "alpha_connection",
    "amari_chentsov",
    "associativity_defect",
    "bianchi_residual",
    "canonical_to_prob",
    "ceva_line",
    "circle_product",
    "curvature",
    "density",
    "expectation",
    "finite_diff",
    "fisher_metric",
    "fit_ahs",
    "gaussian_expectation",
    "gaussian_score",
    "geodesic",
    "gws_correlator",
    "join",
    "kl_divergence",
    "kl_gradient",
    "kl_objective",
    "levi_civita",
    "log_partition",
    "logistic_flow",
    "lower_index",
    "mean_statistics",
    "metric_compatibility_residual",
    "metric_inverse",
    "monge_ampere_density",
    "parallel_transport",
    "pc_mul",
    "pc_norm",
    "potentiality_residual",
    "project_minus",
    "project_plus",
    "raise_index",
    "rk4_integrate",
    "score_matrix",
    "sectional_curvature",
    "semisimple_idempotents",
    "simplex_fields",
    "split",
    "structure_connection",
    "structure_connection_residuals",
    "structure_constants",
    "torsion",
    "trace_split_diagnostics",
    "wdvv_residual",
]
