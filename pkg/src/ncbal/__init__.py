"""Finite volume schemes for balance laws with a frozen geometric field.

Entropy-stable, well-balanced first-order schemes on polygonal meshes, with a
relative-entropy diagnostics layer that certifies nonlinear stability and
decay toward discrete stationary states.
"""

__version__ = "0.1.0"

from .models import (
    AdmissibilityError,
    LagrangianGas,
    PorousEuler,
    ShallowWater,
    StateBox,
    StationaryFamily,
    constant_Tp_family,
    hessian_bounds,
    hydrostatic_column_family,
    lake_at_rest_family,
    lake_level_from_volume,
    relative_entropy,
)

__all__ = [
    "AdmissibilityError",
    "LagrangianGas",
    "PorousEuler",
    "ShallowWater",
    "StateBox",
    "StationaryFamily",
    "constant_Tp_family",
    "hessian_bounds",
    "hydrostatic_column_family",
    "lake_at_rest_family",
    "lake_level_from_volume",
    "relative_entropy",
]
