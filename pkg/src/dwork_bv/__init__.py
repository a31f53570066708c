"""p-adic zeta functions of complete intersections."""

from .complex import BVComplex, GradedElement
from .ffield import (
    EnumerationCeilingError,
    FieldError,
    VarietySpec,
    ZetaRecoveryError,
    count_points,
    exp_sum,
    make_field,
    point_counts,
    variety,
    zeta_from_counts,
)
from .frobenius import char_poly_psi_S, cohomology_H0, zeta_via_frobenius
from .padic import PrecisionContext, PrecisionError, choose_parameters, compute_gamma

__all__ = [
    "BVComplex",
    "EnumerationCeilingError",
    "FieldError",
    "GradedElement",
    "PrecisionContext",
    "PrecisionError",
    "VarietySpec",
    "ZetaRecoveryError",
    "char_poly_psi_S",
    "choose_parameters",
    "cohomology_H0",
    "compute_gamma",
    "count_points",
    "exp_sum",
    "make_field",
    "point_counts",
    "variety",
    "zeta_from_counts",
    "zeta_via_frobenius",
]
