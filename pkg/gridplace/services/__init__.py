"""
Service layer for the numerical analysis.
Contains services for grids, spectra, responses, sensitivities, placement, the oracle and error handling.
"""

from .grid import GridService
from .spectral import SpectralService
from .response import ResponseService
from .sensitivity import SensitivityService
from .placement import PlacementService
from .oracle import OracleService
from .analysis import AnalysisService
from .error_handler import ErrorHandlerService

__all__ = [
    "GridService",
    "SpectralService",
    "ResponseService",
    "SensitivityService",
    "PlacementService",
    "OracleService",
    "AnalysisService",
    "ErrorHandlerService",
]
