"""
Sensitivity service: first-order susceptibilities of the performance measure.
Inertia susceptibilities rho_i, damping susceptibilities alpha_i and the vulnerability with its gradients.
"""

from dataclasses import replace
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from gridplace.config import Settings, get_settings
from gridplace.models.response import FaultSpec
from gridplace.models.sensitivity import InertiaForm, PerturbationParams, SusceptibilityReport
from gridplace.models.spectrum import Spectrum, Weighting
from gridplace.utils.concurrency import map_parallel
from gridplace.utils.exceptions import InvalidParameterError, OverdampedModeError
from gridplace.utils.validators import ValidationUtils

logger = logging.getLogger(__name__)


class SensitivityService:
    """
    Service for susceptibilities at a homogeneous baseline (m, gamma).
    Inertia susceptibilities use the spectrum of L, damping susceptibilities the spectrum of L_M = L/m.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def inertia_susceptibility(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        fault: FaultSpec,
        form: InertiaForm = InertiaForm.SIMPLIFIED,
    ) -> np.ndarray:
        """
        rho_i = dM_b/dr_i = -(mu dP^2 / (gamma N)) sum_{alpha>1} u_alpha,b u_alpha,i / lambda_alpha.

        Args:
            spectrum: Spectrum of the unweighted Laplacian (an L_M spectrum is rescaled by m)
            params: Baseline and amplitudes
            fault: Fault location and magnitude
            form: Evaluate the closed form, the pairwise double sum or the raw expanded derivative

        Returns:
            Vector rho over all buses

        Raises:
            DegenerateSpectrumError: If the spectrum is flagged degenerate
        """
        spectrum = self._unweighted(spectrum, params)
        spectrum.require_nondegenerate()
        bus = ValidationUtils.validate_bus_index(fault.bus, spectrum.n)
        u = spectrum.vectors
        lam = spectrum.values
        scale = params.mu * fault.delta_p**2 / params.gamma

        if form == InertiaForm.SIMPLIFIED:
            return -scale / spectrum.n * ((u[1:, bus] / lam[1:]) @ u[1:])

        gaps = lam[:, None] - lam[None, :]
        np.fill_diagonal(gaps, np.inf)
        outer = u[:, bus][:, None] * u[:, bus][None, :]
        outer[0, :] = 0.0

        if form == InertiaForm.PAIRWISE:
            return -scale * self._pair_sum(u, outer / gaps)

        inverse = np.zeros_like(lam)
        inverse[1:] = 1.0 / lam[1:]
        weights = outer * (inverse[:, None] - 2.0 / gaps)
        np.fill_diagonal(weights, 0.0)
        slow = np.sum(u[1:, bus] ** 2 / lam[1:])
        diagonal = np.sum((u[1:] ** 2) * (u[1:, bus] ** 2 / lam[1:])[:, None], axis=0)
        kronecker = np.zeros(spectrum.n)
        kronecker[bus] = slow
        return 0.5 * scale * (self._pair_sum(u, weights) - kronecker + diagonal)

    def damping_susceptibility_terms(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        fault: FaultSpec,
        include_zero_mode: Optional[bool] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Both terms of alpha_i = dM_b/da_i, spectrum of L_M at the baseline:
        term1 = -(g dP^2 / (2 gamma m_b)) sum_{alpha>1} u_alpha,i^2 u_alpha,b^2 / lambda_alpha
        term2 = -(g dP^2 / (2 gamma m_b)) 4 gamma^2 sum_{alpha>1, beta != alpha} u_a,i u_a,b u_b,i u_b,b / D_ab
        with D_ab = (lambda_a - lambda_b)^2 + 2 gamma^2 (lambda_a + lambda_b).

        Raises:
            DegenerateSpectrumError: If the spectrum is flagged degenerate
            OverdampedModeError: If 4 lambda_alpha <= gamma^2 for some alpha > 1
        """
        spectrum = self._weighted(spectrum, params)
        spectrum.require_nondegenerate()
        include_zero_mode = self.settings.include_zero_mode if include_zero_mode is None else include_zero_mode
        bus = ValidationUtils.validate_bus_index(fault.bus, spectrum.n)
        gamma = params.gamma
        lam = spectrum.values
        u = spectrum.vectors

        overdamped = np.flatnonzero(4.0 * lam[1:] <= gamma**2)
        if overdamped.size:
            raise OverdampedModeError((overdamped + 2).tolist())

        prefactor = -params.g * fault.delta_p**2 / (2.0 * gamma * params.m)
        term1 = prefactor * np.sum(u[1:] ** 2 * (u[1:, bus] ** 2 / lam[1:])[:, None], axis=0)

        denominator = (lam[:, None] - lam[None, :]) ** 2 + 2.0 * gamma**2 * (lam[:, None] + lam[None, :])
        np.fill_diagonal(denominator, np.inf)
        weights = u[:, bus][:, None] * u[:, bus][None, :] / denominator
        weights[0, :] = 0.0
        if not include_zero_mode:
            weights[:, 0] = 0.0
        term2 = prefactor * 4.0 * gamma**2 * self._pair_sum(u, weights)
        return term1, term2

    def damping_susceptibility(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        fault: FaultSpec,
        include_zero_mode: Optional[bool] = None,
    ) -> np.ndarray:
        """alpha_i = dM_b/da_i, the sum of both terms."""
        term1, term2 = self.damping_susceptibility_terms(spectrum, params, fault, include_zero_mode)
        return term1 + term2

    def susceptibility_report(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        fault: FaultSpec,
        include_zero_mode: Optional[bool] = None,
    ) -> SusceptibilityReport:
        """rho and alpha for one fault, with the damping terms kept apart."""
        include_zero_mode = self.settings.include_zero_mode if include_zero_mode is None else include_zero_mode
        rho = self.inertia_susceptibility(spectrum, params, fault)
        term1, term2 = self.damping_susceptibility_terms(spectrum, params, fault, include_zero_mode)
        return SusceptibilityReport(
            rho=rho,
            alpha=term1 + term2,
            alpha_term1=term1,
            alpha_term2=term2,
            fault=fault,
            params=params,
            include_zero_mode=include_zero_mode,
        )

    def susceptibility_sweep(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        buses: Iterable[int],
        delta_p=1.0,
        include_zero_mode: Optional[bool] = None,
        threads: Optional[int] = None,
    ) -> List[SusceptibilityReport]:
        """Susceptibility reports for a fault at each bus, evaluated in parallel."""
        buses = list(buses)
        magnitudes = np.broadcast_to(np.asarray(delta_p, dtype=float), (len(buses),))
        faults = [FaultSpec(bus=int(bus), delta_p=float(dp)) for bus, dp in zip(buses, magnitudes)]
        reports = map_parallel(
            lambda fault: self.susceptibility_report(spectrum, params, fault, include_zero_mode),
            faults,
            threads,
        )
        logger.info(f"Computed susceptibilities for {len(reports)} fault locations")
        return reports

    @staticmethod
    def aggregate_susceptibilities(
        reports: Sequence[SusceptibilityReport],
        eta=None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """rho_agg,i = sum_b eta_b rho_i(b) and alpha_agg,i = sum_b eta_b alpha_i(b)."""
        if not reports:
            raise InvalidParameterError("reports", "at least one fault is required")
        eta = np.ones(len(reports)) if eta is None else ValidationUtils.validate_weights(eta, "eta", len(reports))
        rho = np.sum([weight * report.rho for weight, report in zip(eta, reports)], axis=0)
        alpha = np.sum([weight * report.alpha for weight, report in zip(eta, reports)], axis=0)
        return rho, alpha

    @staticmethod
    def vulnerability(measures, eta, delta_p=None) -> float:
        """
        V = sum_b eta_b M_b over the fault buses.
        When delta_p is given the measures are unit-loss values and are scaled by delta_p_b^2.
        """
        measures = ValidationUtils.as_vector(measures, "measures")
        eta = ValidationUtils.validate_weights(eta, "eta", measures.size)
        if delta_p is not None:
            delta_p = np.broadcast_to(np.asarray(delta_p, dtype=float), measures.shape)
            measures = measures * delta_p**2
        return float(np.dot(eta, measures))

    def vulnerability_gradients(
        self,
        spectrum: Spectrum,
        params: PerturbationParams,
        eta=None,
        fault_buses: Optional[Sequence[int]] = None,
        delta_p: float = 1.0,
        include_zero_mode: Optional[bool] = None,
        threads: Optional[int] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        (dV/dr, dV/da).

        With unit weights over every bus the closed forms apply: dV/dr = 0 and
        dV/da_i = -g dP^2 sum_{alpha>1} u_alpha,i^2 / (2 gamma lambda_alpha), spectrum of L.
        Otherwise the per-fault susceptibilities are summed with weights eta.
        """
        spectrum = self._unweighted(spectrum, params)
        buses = list(range(spectrum.n)) if fault_buses is None else list(fault_buses)
        uniform = eta is None or np.allclose(np.asarray(eta, dtype=float), 1.0)
        if uniform and sorted(buses) == list(range(spectrum.n)):
            # Invariant under rotations inside degenerate eigenspaces
            slow = np.sum(spectrum.vectors[1:] ** 2 / spectrum.nonzero_values[:, None], axis=0)
            return np.zeros(spectrum.n), -params.g * delta_p**2 * slow / (2.0 * params.gamma)

        reports = self.susceptibility_sweep(spectrum, params, buses, delta_p, include_zero_mode, threads)
        return self.aggregate_susceptibilities(reports, eta)

    @staticmethod
    def inertia_perturbation(laplacian: np.ndarray, params: PerturbationParams) -> np.ndarray:
        """First-order change of L_M under m_i = m (1 + mu r_i): -(mu / 2m)(R L + L R)."""
        laplacian = np.asarray(laplacian, dtype=float)
        shape = params.r[:, None] + params.r[None, :]
        return -params.mu / (2.0 * params.m) * shape * laplacian

    # Private helpers

    @staticmethod
    def _pair_sum(u: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """sum_{alpha, beta} weights_ab u_a,i u_b,i for every bus i."""
        return np.einsum("ai,ab,bi->i", u, weights, u)

    @staticmethod
    def _unweighted(spectrum: Spectrum, params: PerturbationParams) -> Spectrum:
        if spectrum.weighting == Weighting.UNWEIGHTED:
            return spectrum
        return replace(spectrum.scaled(params.m), weighting=Weighting.UNWEIGHTED, inertia=None)

    @staticmethod
    def _weighted(spectrum: Spectrum, params: PerturbationParams) -> Spectrum:
        if spectrum.weighting == Weighting.INERTIA:
            return spectrum
        return spectrum.inertia_weighted(params.m)
