"""
Test configuration and fixtures for gridplace.
Provides grid factories, service fixtures and common numerical helpers.
"""

import os

os.environ.setdefault("GRIDPLACE_ENVIRONMENT", "testing")
os.environ.setdefault("GRIDPLACE_THREADS", "2")

from typing import Any, Dict, Optional, Sequence  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from gridplace.config import Settings, get_settings  # noqa: E402
from gridplace.models.grid import GridModel  # noqa: E402
from gridplace.models.spectrum import Spectrum  # noqa: E402
from gridplace.services.analysis import AnalysisService  # noqa: E402
from gridplace.services.grid import GridService  # noqa: E402
from gridplace.services.oracle import OracleService  # noqa: E402
from gridplace.services.placement import PlacementService  # noqa: E402
from gridplace.services.response import ResponseService  # noqa: E402
from gridplace.services.sensitivity import SensitivityService  # noqa: E402
from gridplace.services.spectral import SpectralService  # noqa: E402
from gridplace.utils.fixtures import make_grid  # noqa: E402


# Test data factories
class GridFactory:
    """Factory for grid documents used across the test suite."""

    @staticmethod
    def bus(bus_id: str, power: float = 0.0, inertia: float = 1.0, damping: float = 1.0, is_generator: bool = True) -> dict:
        return {"id": bus_id, "power": power, "inertia": inertia, "damping": damping, "is_generator": is_generator}

    @staticmethod
    def line(source: str, target: str, susceptance: float = 1.0) -> dict:
        return {"from": source, "to": target, "susceptance": susceptance}

    @staticmethod
    def two_bus(
        power: float = 0.0,
        susceptance: float = 1.0,
        inertia: Sequence[float] = (1.0, 1.0),
        damping: Optional[Sequence[float]] = None,
    ) -> Dict[str, Any]:
        """Buses A, B joined by one line; damping defaults to inertia (gamma = 1)."""
        damping = inertia if damping is None else damping
        return {
            "base_mva": 100.0,
            "buses": [
                GridFactory.bus("A", power, inertia[0], damping[0]),
                GridFactory.bus("B", -power, inertia[1], damping[1]),
            ],
            "lines": [GridFactory.line("A", "B", susceptance)],
        }

    @staticmethod
    def path3(middle_inertia: float = 1.0) -> Dict[str, Any]:
        """A - B - C with unit susceptances."""
        return {
            "buses": [
                GridFactory.bus("A"),
                GridFactory.bus("B", inertia=middle_inertia, damping=middle_inertia, is_generator=False),
                GridFactory.bus("C"),
            ],
            "lines": [GridFactory.line("A", "B"), GridFactory.line("B", "C")],
        }

    @staticmethod
    def triangle() -> Dict[str, Any]:
        """Three buses with distinct susceptances, so the spectrum is non-degenerate."""
        return {
            "buses": [GridFactory.bus("1"), GridFactory.bus("2"), GridFactory.bus("3")],
            "lines": [
                GridFactory.line("1", "2", 1.0),
                GridFactory.line("2", "3", 1.5),
                GridFactory.line("1", "3", 2.0),
            ],
        }

    @staticmethod
    def disconnected() -> Dict[str, Any]:
        return {
            "buses": [GridFactory.bus(i) for i in "ABCD"],
            "lines": [GridFactory.line("A", "B"), GridFactory.line("C", "D")],
        }

    @staticmethod
    def synthetic(kind: str, n: int, jitter: float = 1e-3, seed: int = 0, **kwargs) -> Dict[str, Any]:
        kwargs.setdefault("damping", 1.0)
        return make_grid(kind, n, jitter=jitter, seed=seed, **kwargs)


def laplacian(matrix_rows) -> np.ndarray:
    return np.array(matrix_rows, dtype=float)


def grid_laplacian(grid: GridModel, service: Optional[GridService] = None) -> np.ndarray:
    """Operating-point Laplacian of a grid at its power flow solution."""
    service = service or GridService()
    return service.build_laplacian(grid, service.solve_power_flow(grid))


def unweighted_spectrum(grid: GridModel) -> Spectrum:
    return SpectralService().eigendecompose(grid_laplacian(grid))


# Settings and service fixtures
@pytest.fixture
def settings() -> Settings:
    """Process settings in testing mode."""
    return get_settings()


@pytest.fixture
def grid_service(settings: Settings) -> GridService:
    return GridService(settings)


@pytest.fixture
def spectral_service(settings: Settings) -> SpectralService:
    return SpectralService(settings)


@pytest.fixture
def response_service(settings: Settings) -> ResponseService:
    return ResponseService(settings)


@pytest.fixture
def sensitivity_service(settings: Settings) -> SensitivityService:
    return SensitivityService(settings)


@pytest.fixture
def placement_service(settings: Settings) -> PlacementService:
    return PlacementService(settings)


@pytest.fixture
def oracle_service(settings: Settings) -> OracleService:
    return OracleService(settings)


@pytest.fixture
def analysis_service(settings: Settings) -> AnalysisService:
    return AnalysisService(settings, threads=2)


# Grid fixtures
@pytest.fixture
def two_bus_grid(grid_service: GridService) -> GridModel:
    return grid_service.load_grid(GridFactory.two_bus())


@pytest.fixture
def two_bus_laplacian() -> np.ndarray:
    return laplacian([[1.0, -1.0], [-1.0, 1.0]])


@pytest.fixture
def two_bus_spectrum(spectral_service: SpectralService, two_bus_laplacian: np.ndarray) -> Spectrum:
    return spectral_service.eigendecompose(two_bus_laplacian)


@pytest.fixture
def ring10_grid(grid_service: GridService) -> GridModel:
    """Ten-bus ring with a small susceptance jitter lifting the symmetric degeneracies."""
    return grid_service.load_grid(GridFactory.synthetic("ring", 10, jitter=0.05, seed=3))


@pytest.fixture
def ring10_laplacian(ring10_grid: GridModel) -> np.ndarray:
    return grid_laplacian(ring10_grid)


@pytest.fixture
def ring10_spectrum(spectral_service: SpectralService, ring10_laplacian: np.ndarray) -> Spectrum:
    return spectral_service.eigendecompose(ring10_laplacian)


@pytest.fixture
def triangle_grid(grid_service: GridService) -> GridModel:
    return grid_service.load_grid(GridFactory.triangle())
