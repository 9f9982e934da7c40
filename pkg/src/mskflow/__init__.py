"""Mullins-Sekerka interface evolution of polygonal curves by the charge simulation method."""

from .errors import (
    ConfigError,
    GeometryError,
    MskflowError,
    PlacementError,
    StepError,
    SurgeryError,
)
from .evolve import SimulationState, StepParams, initial_state, run, step
from .geometry import PolygonalCurve

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GeometryError", "MskflowError", "PlacementError", "StepError",
    "SurgeryError", "SimulationState", "StepParams", "initial_state", "run", "step",
    "PolygonalCurve", "__version__",
]
