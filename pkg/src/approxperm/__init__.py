"""Approximate encoded permutations: coset and carry-runway representations.

The package verifies deviation bounds exactly, checks the trace-distance
guarantee on pure states, simulates the reversible adder circuits bit by bit
and estimates the cost of long sequences of additions.
"""

from .aep import (
    DeviationReport,
    DomainError,
    EncodedPermutation,
    IncompatibleError,
    Leak,
    PermutationSpec,
    ResourceError,
    Value,
    compose,
    concatenate,
    densify,
    deviated_coset,
    deviation,
    encodings_of,
    first_piece_concat,
)
from .representations import (
    CosetParams,
    LayoutParams,
    RunwayParams,
    coset_aep,
    deviation_bound,
    make_coset_aep,
    make_modular_runway_aep,
    make_multi_runway_aep,
    make_runway_aep,
    runway_aep,
)

__all__ = [
    "CosetParams",
    "DeviationReport",
    "DomainError",
    "EncodedPermutation",
    "IncompatibleError",
    "LayoutParams",
    "Leak",
    "PermutationSpec",
    "ResourceError",
    "RunwayParams",
    "Value",
    "compose",
    "concatenate",
    "coset_aep",
    "densify",
    "deviated_coset",
    "deviation",
    "deviation_bound",
    "encodings_of",
    "first_piece_concat",
    "make_coset_aep",
    "make_modular_runway_aep",
    "make_multi_runway_aep",
    "make_runway_aep",
    "runway_aep",
]
__version__ = "0.1.0"
