"""
Placement results.
"""

from dataclasses import dataclass
import enum
from typing import Optional, Tuple

import numpy as np


class Algorithm(str, enum.Enum):
    """Placement algorithm tag."""

    INERTIA = "inertia"
    DAMPING = "damping"
    COMBINED = "combined"


class WeightingKind(str, enum.Enum):
    """Fault weighting scheme eta_b of the vulnerability."""

    UNIFORM = "uniform"
    SQUARED = "squared"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class PlacementResult:
    """Optimized shapes r, a in {-1, 0, 1} with their predicted first-order effect."""

    r: np.ndarray
    a: np.ndarray
    objective_linear: float
    algorithm: Algorithm
    weighting: Optional[WeightingKind] = None
    iterations: int = 0

    def __post_init__(self):
        for name in ("r", "a"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def constraint_residuals(self) -> Tuple[float, float, float]:
        """(sum r, sum a, sum r*a)."""
        return float(self.r.sum()), float(self.a.sum()), float(np.dot(self.r, self.a))

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "weighting": self.weighting.value if self.weighting else None,
            "r": [int(x) for x in self.r],
            "a": [int(x) for x in self.a],
            "objective_linear": self.objective_linear,
            "residuals": list(self.constraint_residuals),
            "iterations": self.iterations,
        }
