"""
Oracle simulation results.
"""

from dataclasses import dataclass, field
import enum
from typing import Any, Dict

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class Trajectory:
    """
    Uniformly sampled solution of the linearized swing equations.
    Rows of omega and theta_dev are time samples, columns are buses.
    """

    times: np.ndarray
    omega: np.ndarray
    theta_dev: np.ndarray
    inertia: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("times", "omega", "theta_dev", "inertia"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def omega_sys(self) -> np.ndarray:
        """Inertia-weighted instantaneous average frequency."""
        return self.omega @ self.inertia / self.inertia.sum()

    def modal_velocities(self, spectrum) -> np.ndarray:
        """
        Project on the eigenbasis of L_M: xi_dot = U M^(1/2) omega.
        For a loss the result is the negative of the closed-form xi_dot of a +delta_p drive.
        """
        return (self.omega * np.sqrt(self.inertia)) @ spectrum.vectors.T

    def to_frame(self, bus_ids=None) -> pd.DataFrame:
        """Columns t, omega_<bus>..."""
        labels = list(bus_ids) if bus_ids is not None else [str(i + 1) for i in range(self.omega.shape[1])]
        frame = pd.DataFrame(self.omega, columns=[f"omega_{label}" for label in labels])
        frame.insert(0, "t", self.times)
        return frame


@dataclass(frozen=True)
class MeasureEstimate:
    """Quadrature value of the performance measure with a bound on the truncated tail."""

    value: float
    tail_bound: float
    horizon: float
    dt: float


class ProbeKind(str, enum.Enum):
    INERTIA = "inertia"
    DAMPING_RATIO = "damping_ratio"


@dataclass(frozen=True)
class Probe:
    """Finite-difference direction: the inertia or damping-ratio shape at one bus."""

    kind: ProbeKind
    bus: int

    @classmethod
    def parse(cls, text: str) -> "Probe":
        """Parse 'inertia@3' or 'damping_ratio@0'."""
        kind, _, bus = text.partition("@")
        return cls(ProbeKind(kind), int(bus))


@dataclass(frozen=True)
class FiniteDifferenceEstimate:
    """
    Central difference along e_i - (1 - e_i)/(N - 1).
    `value` is the matching component of the zero-sum projected gradient.
    """

    value: float
    directional: float
    step: float
    measure_plus: float
    measure_minus: float
