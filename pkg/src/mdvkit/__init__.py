"""Minimal displacement vectors of nonexpansive maps: estimation and verification."""

from .displacement import (
    DisplacementEstimate,
    displacement_exact_affine,
    displacement_iterative,
    displacement_range_affine,
    membership_in_displacement_range,
    minimal_displacement,
)
from .errors import NumericalError, UnsupportedOperatorError, ValidationError
from .numeric import AffineSubspace, minkowski_sum_affine, orthonormal_range_basis
from .operators import (
    AffineMap,
    Composition,
    ConvexCombination,
    GradientStep,
    MonotoneAffine,
    Operator,
    ReflectedResolvent,
    Regularity,
    Resolvent,
    SetProjector,
    cocoercivity_modulus,
    flatten_to_affine,
    minimal_averagedness,
    spectral_norm,
)
from .sets import AffineSet, Ball, Box, ConvexSet, Halfspace, Singleton, full_space
from .verify import CheckReport, builtin_suite, run_randomized_suite, suite_passed

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "AffineSet",
    "AffineSubspace",
    "Ball",
    "Box",
    "CheckReport",
    "Composition",
    "ConvexCombination",
    "ConvexSet",
    "DisplacementEstimate",
    "GradientStep",
    "Halfspace",
    "MonotoneAffine",
    "NumericalError",
    "Operator",
    "ReflectedResolvent",
    "Regularity",
    "Resolvent",
    "SetProjector",
    "Singleton",
    "UnsupportedOperatorError",
    "ValidationError",
    "builtin_suite",
    "cocoercivity_modulus",
    "displacement_exact_affine",
    "displacement_iterative",
    "displacement_range_affine",
    "flatten_to_affine",
    "full_space",
    "membership_in_displacement_range",
    "minimal_averagedness",
    "minimal_displacement",
    "minkowski_sum_affine",
    "orthonormal_range_basis",
    "run_randomized_suite",
    "spectral_norm",
    "suite_passed",
    "__version__",
]
