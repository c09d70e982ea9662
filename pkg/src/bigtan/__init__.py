"""Vertical geometry of TM + T*M for Finsler structures, checked numerically with Taylor jets."""

from .bigtangent import BigTangentPoint, VerticalVector, vertical_metric
from .errors import (
    ArgumentError,
    BigTanError,
    ConfigError,
    DegenerateMetricError,
    SingularityError,
    SolverError,
    ZeroSectionError,
)
from .finsler import FinslerStructure
from .jets import Jet, JetContext
from .leafgeom import Leaf, LeafConnection
from .legendre import CartanDual, SolverSettings

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "BigTanError", "BigTangentPoint", "CartanDual", "ConfigError",
    "DegenerateMetricError", "FinslerStructure", "Jet", "JetContext", "Leaf", "LeafConnection",
    "SingularityError", "SolverError", "SolverSettings", "VerticalVector", "ZeroSectionError",
    "vertical_metric",
]
