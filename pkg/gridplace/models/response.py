"""
Disturbance and modal drive models.
"""

from dataclasses import dataclass

import numpy as np

from gridplace.utils.exceptions import InvalidParameterError


@dataclass(frozen=True)
class FaultSpec:
    """Step power loss of magnitude delta_p (> 0 means loss) at bus position `bus`."""

    bus: int
    delta_p: float = 1.0

    def __post_init__(self):
        if int(self.bus) != self.bus or self.bus < 0:
            raise InvalidParameterError("bus", f"must be a non-negative position, got {self.bus}")
        if not np.isfinite(self.delta_p):
            raise InvalidParameterError("delta_p", "must be finite")

    def disturbance(self, n: int) -> np.ndarray:
        """Vector delta_P_i = delta_ib * delta_p."""
        vector = np.zeros(n)
        vector[self.bus] = self.delta_p
        return vector

    def injection_step(self, n: int) -> np.ndarray:
        """Physical change of the injections after the loss, -delta_ib * delta_p."""
        return -self.disturbance(n)


@dataclass(frozen=True)
class ModalDrive:
    """
    Projection of the disturbance on the modes, p_alpha = sum_i u_alpha,i dP_i / sqrt(m_i),
    and damped frequencies f_alpha = sqrt(4 lambda_alpha - gamma^2) (f_1 is stored as 0).
    """

    p: np.ndarray
    f: np.ndarray
    gamma: float

    def __post_init__(self):
        for name in ("p", "f"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def n(self) -> int:
        return self.p.size
