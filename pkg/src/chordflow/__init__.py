"""Planar Gaussian chord Minkowski problem: curvature-flow solver and
independent verification suite for origin-symmetric convex bodies.
"""

from .errors import (
    ChordflowError,
    ConfigError,
    ConvexityViolation,
    DegenerateDenominator,
    InterpolationError,
    InvalidShape,
    NonConvergence,
    PointOutsideBody,
    QuadratureUnderflow,
    ShapeMismatch,
    StepSizeUnderflow,
    UnsupportedExponent,
)
from .support_geometry import (
    AngleGrid,
    BodyGeometry,
    SupportFunction,
    boundary_points,
    chord_from_point,
    compute_geometry,
    containment_margin,
    disk,
    ellipse,
    eval_derivatives,
    even_fourier_values,
    evenize,
    fourier_body,
    gauss_curvature,
    is_even,
    make_body,
    principal_radius,
    radial_function,
    validate_body,
)
from .gaussian_chord import (
    ChordParams,
    chord_integral,
    chord_integral_oracle,
    gaussian_volume,
    v_tilde_at,
    v_tilde_field,
)
from .flow_engine import (
    FlowConfig,
    FlowState,
    ProblemSpec,
    flow_rhs,
    phi,
    potential_field,
    run,
    step,
    tau_from_theta,
    theta,
)
from .diagnostics import (
    CSV_COLUMNS,
    BoundsReport,
    DiagnosticsRecord,
    FirstVariationResult,
    Lemma41Report,
    bounds_report,
    conservation_report,
    first_variation_check,
    lemma41_check,
    ma_residual,
    monotonicity_report,
    variation_ratio_survey,
)

__version__ = "0.1.0"
