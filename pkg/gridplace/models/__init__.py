"""
Domain models for gridplace.
Frozen dataclasses holding read-only numpy arrays.
"""

from gridplace.models.grid import AnglesSolution, Bus, GridModel, KronReduction, Line, OperatingPoint
from gridplace.models.spectrum import Spectrum, Weighting
from gridplace.models.response import FaultSpec, ModalDrive
from gridplace.models.sensitivity import InertiaForm, PerturbationParams, SusceptibilityReport
from gridplace.models.placement import Algorithm, PlacementResult, WeightingKind
from gridplace.models.trajectory import FiniteDifferenceEstimate, MeasureEstimate, Probe, ProbeKind, Trajectory

# Export all models for easy importing
__all__ = [
    "AnglesSolution",
    "Bus",
    "GridModel",
    "KronReduction",
    "Line",
    "OperatingPoint",
    "Spectrum",
    "Weighting",
    "FaultSpec",
    "ModalDrive",
    "InertiaForm",
    "PerturbationParams",
    "SusceptibilityReport",
    "Algorithm",
    "PlacementResult",
    "WeightingKind",
    "FiniteDifferenceEstimate",
    "MeasureEstimate",
    "Probe",
    "ProbeKind",
    "Trajectory",
]
