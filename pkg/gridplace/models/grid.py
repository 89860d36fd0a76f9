"""
Grid domain models.
Buses, lines and the connected network they form, plus power flow and operating-point results.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, NamedTuple, Tuple

import numpy as np


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Bus:
    """A network bus with its injection, inertia (MW s^2) and damping (MW s)."""

    id: str
    power: float = 0.0
    inertia: float = 0.0
    damping: float = 0.0
    is_generator: bool = False

    @property
    def damping_ratio(self) -> float:
        """gamma_i = d_i / m_i, infinite for inertialess buses with damping."""
        if self.inertia == 0:
            return 0.0 if self.damping == 0 else float("inf")
        return self.damping / self.inertia


@dataclass(frozen=True)
class Line:
    """A lossless line; susceptance in per unit."""

    source: str
    target: str
    susceptance: float

    @property
    def key(self) -> Tuple[str, str]:
        """Unordered pair key used to merge parallel lines."""
        return tuple(sorted((self.source, self.target)))


@dataclass(frozen=True)
class GridModel:
    """
    Connected lossless network.
    Construct through services.grid.load_grid or services.grid.build_grid, which check invariants.
    """

    buses: Tuple[Bus, ...]
    lines: Tuple[Line, ...]
    base_mva: float = 100.0
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {bus.id: position for position, bus in enumerate(self.buses)})

    def __repr__(self) -> str:
        return f"<GridModel(n={self.n}, lines={len(self.lines)})>"

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def bus_ids(self) -> Tuple[str, ...]:
        return tuple(bus.id for bus in self.buses)

    @property
    def power(self) -> np.ndarray:
        return _frozen([bus.power for bus in self.buses])

    @property
    def inertia(self) -> np.ndarray:
        return _frozen([bus.inertia for bus in self.buses])

    @property
    def damping(self) -> np.ndarray:
        return _frozen([bus.damping for bus in self.buses])

    @property
    def generators(self) -> np.ndarray:
        mask = np.array([bus.is_generator for bus in self.buses], dtype=bool)
        mask.setflags(write=False)
        return mask

    def susceptance_matrix(self) -> np.ndarray:
        """Symmetric N x N matrix of line susceptances B_ij, zero diagonal."""
        matrix = np.zeros((self.n, self.n))
        for line in self.lines:
            i, j = self.index[line.source], self.index[line.target]
            matrix[i, j] += line.susceptance
            matrix[j, i] += line.susceptance
        return matrix

    def with_buses(self, buses) -> "GridModel":
        """Copy with replaced buses, same topology."""
        return replace(self, buses=tuple(buses))

    def to_dict(self) -> dict:
        """Dictionary in the grid JSON layout."""
        return {
            "base_mva": self.base_mva,
            "buses": [
                {
                    "id": bus.id,
                    "power": bus.power,
                    "inertia": bus.inertia,
                    "damping": bus.damping,
                    "is_generator": bus.is_generator,
                }
                for bus in self.buses
            ],
            "lines": [
                {"from": line.source, "to": line.target, "susceptance": line.susceptance}
                for line in self.lines
            ],
        }


@dataclass(frozen=True)
class AnglesSolution:
    """Power flow angles in radians, zero-mean gauge."""

    theta: np.ndarray
    residual_norm: float
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen(self.theta))

    @classmethod
    def flat(cls, n: int) -> "AnglesSolution":
        """Zero-angle solution of a zero-injection grid."""
        return cls(theta=np.zeros(n), residual_norm=0.0)


class KronReduction(NamedTuple):
    """Reduced Laplacian and injections over the retained buses."""

    laplacian: np.ndarray
    injections: np.ndarray
    bus_ids: Tuple[str, ...]


@dataclass(frozen=True)
class OperatingPoint:
    """
    Linearized network seen by the dynamics: Laplacian at the power flow solution
    together with the per-bus parameters of the retained buses.
    """

    bus_ids: Tuple[str, ...]
    laplacian: np.ndarray
    inertia: np.ndarray
    damping: np.ndarray
    injections: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        for name in ("laplacian", "inertia", "damping", "injections"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        mask = np.array(self.generators, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "generators", mask)

    @property
    def n(self) -> int:
        return len(self.bus_ids)

    @property
    def damping_ratio(self) -> np.ndarray:
        return self.damping / self.inertia

    def position(self, bus_id: str) -> int:
        """0-based position of a bus id, ValueError if absent."""
        return self.bus_ids.index(bus_id)
