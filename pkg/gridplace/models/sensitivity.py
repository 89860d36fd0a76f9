"""
Perturbation parameters and susceptibility results.
"""

from dataclasses import dataclass, field
import enum
from typing import Optional

import numpy as np

from gridplace.config import get_settings
from gridplace.models.response import FaultSpec
from gridplace.utils.exceptions import InvalidParameterError
from gridplace.utils.validators import ValidationUtils


class InertiaForm(str, enum.Enum):
    """Algebraically equivalent evaluations of the inertia susceptibility."""

    SIMPLIFIED = "simplified"
    PAIRWISE = "pairwise"
    EXPANDED = "expanded"


@dataclass(frozen=True)
class PerturbationParams:
    """
    Homogeneous baseline (m, gamma) with deviations
    m_i = m (1 + mu r_i) and gamma_i = gamma (1 + g a_i).
    """

    m: float
    gamma: float
    mu: float = 0.0
    g: float = 0.0
    r: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    n: Optional[int] = field(default=None)

    def __post_init__(self):
        ValidationUtils.validate_positive(self.m, "m")
        ValidationUtils.validate_positive(self.gamma, "gamma")
        ValidationUtils.validate_amplitude(self.mu, "mu")
        ValidationUtils.validate_amplitude(self.g, "g")

        size = self.n
        if size is None:
            for vector in (self.r, self.a):
                if vector is not None:
                    size = len(vector)
                    break
        if size is None:
            raise InvalidParameterError("n", "needs n or at least one shape vector")
        object.__setattr__(self, "n", int(size))

        tolerance = get_settings().shape_sum_tolerance
        for name in ("r", "a"):
            vector = getattr(self, name)
            vector = np.zeros(size) if vector is None else vector
            object.__setattr__(self, name, ValidationUtils.validate_shape_vector(vector, name, size, tolerance))

    @property
    def inertia(self) -> np.ndarray:
        """m_i = m (1 + mu r_i)."""
        return self.m * (1.0 + self.mu * self.r)

    @property
    def damping_ratio(self) -> np.ndarray:
        """gamma_i = gamma (1 + g a_i)."""
        return self.gamma * (1.0 + self.g * self.a)

    @property
    def damping(self) -> np.ndarray:
        """d_i = m_i gamma_i."""
        return self.inertia * self.damping_ratio

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "gamma": self.gamma,
            "mu": self.mu,
            "g": self.g,
            "r": self.r.tolist(),
            "a": self.a.tolist(),
        }


@dataclass(frozen=True)
class SusceptibilityReport:
    """rho_i = dM_b/dr_i and alpha_i = dM_b/da_i for one fault."""

    rho: np.ndarray
    alpha: np.ndarray
    alpha_term1: np.ndarray
    alpha_term2: np.ndarray
    fault: FaultSpec
    params: PerturbationParams
    include_zero_mode: bool = True

    def __post_init__(self):
        for name in ("rho", "alpha", "alpha_term1", "alpha_term2"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def term_ratio(self) -> float:
        """||term2||_1 / ||term1||_1 of the damping susceptibility."""
        denominator = float(np.abs(self.alpha_term1).sum())
        return float(np.abs(self.alpha_term2).sum()) / denominator if denominator else 0.0
