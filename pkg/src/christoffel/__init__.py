"""Christoffel functions and parallel-section bounds on planar convex domains."""

from .alpha_ball import (
    AlphaBall,
    AlphaBallPoint,
    boundary_f,
    boundary_f_prime,
    boundary_height,
    christoffel_prediction,
    f_inverse,
    li_closed_form,
    nearest_boundary_point_exact,
)
from .bounds import (
    BoundEstimate,
    ConditionReport,
    check_conditions,
    lower_bound_shape,
    two_sided_report,
    upper_bound_shape,
)
from .errors import ChristoffelError, DomainSpecError
from .estimator import ChristoffelFunction
from .evaluator import (
    ChristoffelEvaluator,
    Evaluation,
    disk_reference_shape,
    evaluator_for_body,
    moments_for_body,
)
from .geometry import (
    AffineMap,
    ConvexBody,
    Ellipse,
    RayConfig,
    SectionProfile,
    alpha_ball_body,
    apply_affine,
    contains_ellipse,
    disk,
    from_spec,
    inscribed_ellipse,
    nearest_boundary_point,
    polygon_body,
    ray_config,
    ray_extent,
    section_lengths,
    section_profile,
)
from .moments import (
    GramMatrix,
    MomentTable,
    alpha_ball_moments,
    disk_moments,
    gram_matrix,
    quadrature_moments,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "AlphaBall",
    "AlphaBallPoint",
    "BoundEstimate",
    "ChristoffelError",
    "ChristoffelEvaluator",
    "ChristoffelFunction",
    "ConditionReport",
    "ConvexBody",
    "DomainSpecError",
    "Ellipse",
    "Evaluation",
    "GramMatrix",
    "MomentTable",
    "RayConfig",
    "SectionProfile",
    "alpha_ball_body",
    "alpha_ball_moments",
    "apply_affine",
    "boundary_f",
    "boundary_f_prime",
    "boundary_height",
    "check_conditions",
    "christoffel_prediction",
    "contains_ellipse",
    "disk",
    "disk_moments",
    "disk_reference_shape",
    "evaluator_for_body",
    "f_inverse",
    "from_spec",
    "gram_matrix",
    "inscribed_ellipse",
    "li_closed_form",
    "lower_bound_shape",
    "moments_for_body",
    "nearest_boundary_point",
    "nearest_boundary_point_exact",
    "polygon_body",
    "quadrature_moments",
    "ray_config",
    "ray_extent",
    "section_lengths",
    "section_profile",
    "two_sided_report",
    "upper_bound_shape",
]
