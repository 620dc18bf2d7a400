"""Geodesic currents on the disk: Liouville boxes, finite laminations and earthquakes."""

from .currents import (
    IsometrySampler,
    LaminationCurrent,
    Pullback,
    Scaled,
    bonahon_residual,
    liouville_base,
    mcg_pushforward,
    sup_norm_estimate,
    uniform_discrepancy,
)
from .earthquakes import CircleMap, EarthquakeMap, build_earthquake, earthquake_path, normalize_fix_three
from .errors import ConfigError, GeometryError, LaminationError, NoConvergence, UnsupportedVariant
from .laminations import FamilySpec, FiniteLamination, Leaf, discretize_family, generic_box, lamination_box_mass
from .liouville import Q_STAR, Arc, Box, liouville_box, liouville_quad, solve_fourth_point
from .mobius import BoundaryPoint, Geodesic, MobiusMap, cross_ratio, hyperbolic_translation

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "BoundaryPoint",
    "Box",
    "CircleMap",
    "ConfigError",
    "EarthquakeMap",
    "FamilySpec",
    "FiniteLamination",
    "Geodesic",
    "GeometryError",
    "IsometrySampler",
    "LaminationCurrent",
    "LaminationError",
    "Leaf",
    "MobiusMap",
    "NoConvergence",
    "Pullback",
    "Q_STAR",
    "Scaled",
    "UnsupportedVariant",
    "bonahon_residual",
    "build_earthquake",
    "cross_ratio",
    "discretize_family",
    "earthquake_path",
    "generic_box",
    "hyperbolic_translation",
    "lamination_box_mass",
    "liouville_base",
    "liouville_box",
    "liouville_quad",
    "mcg_pushforward",
    "normalize_fix_three",
    "solve_fourth_point",
    "sup_norm_estimate",
    "uniform_discrepancy",
]
