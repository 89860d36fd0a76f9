"""
Placement service: distribution of inertia and primary control.
Sorting solutions of the first-order linear programs and the orthogonalizing combined heuristic.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from gridplace.config import Settings, get_settings
from gridplace.models.placement import Algorithm, PlacementResult, WeightingKind
from gridplace.utils.exceptions import InvalidParameterError, MissingThresholdError, NoFeasiblePairError
from gridplace.utils.validators import ValidationUtils

logger = logging.getLogger(__name__)

# Relative size below which aggregated inertia susceptibilities count as vanishing
DEGENERATE_PLACEMENT_RATIO = 1e-8


class PlacementService:
    """
    Service for the placement algorithms.
    Each single-target placement minimizes sum_i c_i x_i subject to |x_i| <= 1 and sum_i x_i = 0.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def optimize_inertia(self, rho_agg) -> np.ndarray:
        """
        Optimal inertia shape: +1 on the Int[N/2] most negative rho, -1 on the Int[N/2] largest,
        0 on the median bus when N is odd. Ties are broken by ascending bus index.
        """
        return self._sorted_assignment(ValidationUtils.as_vector(rho_agg, "rho_agg"))

    def optimize_damping(self, alpha_agg) -> np.ndarray:
        """Optimal damping-ratio shape, same rule as optimize_inertia applied to alpha."""
        return self._sorted_assignment(ValidationUtils.as_vector(alpha_agg, "alpha_agg"))

    def optimize_combined(self, rho_agg, alpha_agg) -> PlacementResult:
        """
        Joint placement with the extra constraint sum_i r_i a_i = 0.

        Starts from the single-target optima, aligns the odd-N zeros, then repeatedly sends to (0, 0)
        the opposite-signed pair whose removal increases the linear objective least.

        Raises:
            NoFeasiblePairError: If no opposite-signed pair exists while sum r a != 0
        """
        rho = ValidationUtils.as_vector(rho_agg, "rho_agg")
        alpha = ValidationUtils.as_vector(alpha_agg, "alpha_agg", rho.size)
        n = rho.size
        if n < 2:
            raise InvalidParameterError("rho_agg", "combined placement needs at least two buses")

        r = self._sorted_assignment(rho)
        a = self._sorted_assignment(alpha)

        if n % 2 == 1:
            i_r0 = int(np.flatnonzero(r == 0)[0])
            i_a0 = int(np.flatnonzero(a == 0)[0])
            if i_r0 != i_a0:
                cost = r * rho[i_r0] + a * alpha[i_a0] - r * rho - a * alpha
                i_align = int(np.argmin(cost))
                r[i_r0], r[i_align] = r[i_align], r[i_r0]
                a[i_a0], a[i_align] = a[i_align], a[i_a0]
                logger.debug(f"Aligned zero entries at bus position {i_align}")

        iterations = 0
        while True:
            overlap = int(round(float(np.dot(r, a))))
            if overlap == 0:
                break
            candidates = np.flatnonzero(r * a == np.sign(overlap))
            pair = self._cheapest_pair(candidates, r, a, rho, alpha)
            if pair is None:
                raise NoFeasiblePairError(overlap, candidates.size)
            kind, i1, i2 = pair
            if kind == "a":
                a[[i1, i2]] = 0.0
            else:
                r[[i1, i2]] = 0.0
            iterations += 1
            logger.debug(f"Zeroed {kind}-pair ({i1}, {i2}); sum r a = {overlap} before")

        result = PlacementResult(
            r=r,
            a=a,
            objective_linear=float(rho @ r + alpha @ a),
            algorithm=Algorithm.COMBINED,
            iterations=iterations,
        )
        logger.info(f"Combined placement finished after {iterations} pair removals")
        return result

    def weight_scheme(
        self,
        kind: Union[WeightingKind, str],
        m0,
        m_thres: Optional[float] = None,
    ) -> np.ndarray:
        """
        Fault weights eta_b from the homogeneous measures M_b^(0).

        Args:
            kind: uniform (all ones), squared (M_b^(0)^2) or threshold (1 where M_b^(0) > m_thres)
            m0: Homogeneous measures over the fault buses
            m_thres: Threshold, required for the threshold scheme

        Raises:
            MissingThresholdError: If the threshold scheme is requested without m_thres
        """
        kind = WeightingKind(kind)
        m0 = ValidationUtils.as_vector(m0, "m0")
        if kind == WeightingKind.UNIFORM:
            return np.ones(m0.size)
        if kind == WeightingKind.SQUARED:
            return m0**2
        if m_thres is None:
            raise MissingThresholdError()
        return (m0 > m_thres).astype(float)

    def placement_for_target(
        self,
        target: Union[Algorithm, str],
        rho_agg,
        alpha_agg,
        weighting: Optional[WeightingKind] = None,
    ) -> PlacementResult:
        """Run the algorithm for one target and package its outcome."""
        target = Algorithm(target)
        rho = ValidationUtils.as_vector(rho_agg, "rho_agg")
        alpha = ValidationUtils.as_vector(alpha_agg, "alpha_agg", rho.size)

        if target == Algorithm.COMBINED:
            result = self.optimize_combined(rho, alpha)
            return PlacementResult(
                r=result.r,
                a=result.a,
                objective_linear=result.objective_linear,
                algorithm=target,
                weighting=weighting,
                iterations=result.iterations,
            )

        zeros = np.zeros(rho.size)
        if target == Algorithm.INERTIA:
            scale = max(float(np.max(np.abs(alpha))), float(np.max(np.abs(rho))), 1e-300)
            if float(np.max(np.abs(rho))) <= DEGENERATE_PLACEMENT_RATIO * scale:
                logger.warning("Aggregated inertia susceptibilities vanish: inertia placement is degenerate")
            r = self.optimize_inertia(rho)
            return PlacementResult(r=r, a=zeros, objective_linear=float(rho @ r), algorithm=target, weighting=weighting)

        a = self.optimize_damping(alpha)
        return PlacementResult(r=zeros, a=a, objective_linear=float(alpha @ a), algorithm=target, weighting=weighting)

    # Private helpers

    @staticmethod
    def _sorted_assignment(coefficients: np.ndarray) -> np.ndarray:
        """Stable ascending sort by (value, index); +1 on the first half, -1 on the last."""
        n = coefficients.size
        order = np.argsort(coefficients, kind="stable")
        half = n // 2
        shape = np.zeros(n)
        shape[order[:half]] = 1.0
        shape[order[n - half:]] = -1.0
        return shape

    @staticmethod
    def _cheapest_pair(
        candidates: np.ndarray,
        r: np.ndarray,
        a: np.ndarray,
        rho: np.ndarray,
        alpha: np.ndarray,
    ) -> Optional[Tuple[str, int, int]]:
        """Opposite-signed pair in the candidate set with the smallest objective increase."""
        best = None
        for position, i1 in enumerate(candidates):
            for i2 in candidates[position + 1:]:
                for kind, x, c in (("a", a, alpha), ("r", r, rho)):
                    if x[i1] != -x[i2]:
                        continue
                    increase = -(c[i1] * x[i1] + c[i2] * x[i2])
                    # a-pairs sort before r-pairs on equal increase
                    key = (increase, 0 if kind == "a" else 1, int(i1), int(i2))
                    if best is None or key < best[0]:
                        best = (key, kind, int(i1), int(i2))
        return None if best is None else best[1:]
