"""
Spectrum model: sorted eigenpairs of a (weighted) Laplacian.
"""

from dataclasses import dataclass, replace
import enum
from typing import Optional

import numpy as np
import pandas as pd

from gridplace.utils.exceptions import DegenerateSpectrumError


class Weighting(str, enum.Enum):
    """Which operator the spectrum belongs to."""

    UNWEIGHTED = "unweighted"
    INERTIA = "inertia"


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenvalues lambda_1 = 0 <= lambda_2 <= ... <= lambda_N and orthonormal eigenvectors.
    Row alpha of `vectors` is u_alpha; column i holds the components u_alpha,i.
    """

    values: np.ndarray
    vectors: np.ndarray
    weighting: Weighting = Weighting.UNWEIGHTED
    inertia: Optional[np.ndarray] = None
    min_gap: float = float("inf")
    degeneracy_threshold: float = 0.0
    zero_mode_index: int = 0

    def __post_init__(self):
        for name in ("values", "vectors", "inertia"):
            value = getattr(self, name)
            if value is not None:
                array = np.array(value, dtype=float)
                array.setflags(write=False)
                object.__setattr__(self, name, array)

    def __repr__(self) -> str:
        return f"<Spectrum(n={self.n}, weighting={self.weighting.value}, lambda_2={self.algebraic_connectivity:.4g})>"

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def degenerate(self) -> bool:
        """True when some gap between nonzero eigenvalues falls below the threshold."""
        return self.min_gap < self.degeneracy_threshold

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.values[1]) if self.n > 1 else 0.0

    @property
    def nonzero_values(self) -> np.ndarray:
        return self.values[1:]

    def require_nondegenerate(self) -> None:
        """Raise DegenerateSpectrumError for a flagged spectrum."""
        if self.degenerate:
            raise DegenerateSpectrumError(self.min_gap, self.degeneracy_threshold)

    def scaled(self, factor: float) -> "Spectrum":
        """Spectrum of factor * A, for factor > 0."""
        return replace(
            self,
            values=self.values * factor,
            min_gap=self.min_gap * factor,
            degeneracy_threshold=self.degeneracy_threshold * factor,
        )

    def to_frame(self, bus_ids=None) -> pd.DataFrame:
        """One row per mode: mode, eigenvalue, then eigenvector components."""
        labels = list(bus_ids) if bus_ids is not None else [str(i + 1) for i in range(self.n)]
        frame = pd.DataFrame(self.vectors, columns=[f"u_{label}" for label in labels])
        frame.insert(0, "eigenvalue", self.values)
        frame.insert(0, "mode", np.arange(1, self.n + 1))
        return frame

    def inertia_weighted(self, m: float) -> "Spectrum":
        """Spectrum of L_M = L/m for a homogeneous inertia m, from the spectrum of L."""
        return replace(
            self.scaled(1.0 / m),
            weighting=Weighting.INERTIA,
            inertia=np.full(self.n, float(m)),
        )
