"""Spectral simulation of the half-harmonic map heat flow on the unit circle."""

from .spectral import BoundaryField, GridSamples, MobiusParams
from .targets import CurveTarget, OutsideTubularNeighborhood, SphereTarget, TargetManifold, build_curve
from .flow import FlowConfig, FlowState, Trajectory, run
from .diagnostics import BubbleExtract, ConcentrationEvent, detect_concentration, extract_bubble

__all__ = [
    "BoundaryField", "GridSamples", "MobiusParams",
    "TargetManifold", "SphereTarget", "CurveTarget", "OutsideTubularNeighborhood", "build_curve",
    "FlowConfig", "FlowState", "Trajectory", "run",
    "ConcentrationEvent", "BubbleExtract", "detect_concentration", "extract_bubble",
]
__version__ = "0.1.0"
