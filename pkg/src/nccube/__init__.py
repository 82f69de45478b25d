"""Correlation-box classification, Bell and steering bounds, cube-algebra
coefficient calculus and finite-dimensional approximation of quantum boxes."""

from . import approx, bounds, boxes, cli, cube, linprog, matcore, npa, sdp, steering
from .bounds import BellFunctional
from .boxes import Box, QuantumRealization
from .cube import CubeElement, DualFunctional
from .steering import Assemblage, SteeringFunctional

__version__ = "0.1.0"

__all__ = [
    "approx", "bounds", "boxes", "cli", "cube", "linprog", "matcore", "npa",
    "sdp", "steering",
    "Assemblage", "BellFunctional", "Box", "CubeElement", "DualFunctional",
    "QuantumRealization", "SteeringFunctional",
    "__version__",
]
