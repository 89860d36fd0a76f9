"""
Response service: closed-form modal trajectories and the performance measure.
Covers the homogeneous, inertia-homogeneous and first-order damping-perturbed cases.
"""

import logging
from typing import Optional, Union

import numpy as np

from gridplace.config import Settings, get_settings
from gridplace.models.response import FaultSpec, ModalDrive
from gridplace.models.spectrum import Spectrum
from gridplace.services.spectral import SpectralService
from gridplace.utils.exceptions import InvalidParameterError, OverdampedModeError
from gridplace.utils.validators import ValidationUtils

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]


class ResponseService:
    """
    Service for modal dynamics after a step power loss.
    Modal amplitudes follow xi = U M^(1/2) delta_theta with U the eigenvectors of L_M.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def modal_drive(self, spectrum: Spectrum, inertia, gamma: float, fault: FaultSpec) -> ModalDrive:
        """
        Project the disturbance on the modes.

        Args:
            spectrum: Spectrum of L_M
            inertia: Inertia vector m_i
            gamma: Homogeneous damping ratio in 1/s
            fault: Location and magnitude of the loss

        Returns:
            ModalDrive with p_alpha and f_alpha

        Raises:
            OverdampedModeError: If 4 lambda_alpha <= gamma^2 for some alpha > 1
        """
        gamma = ValidationUtils.validate_positive(gamma, "gamma")
        inertia = ValidationUtils.as_vector(inertia, "inertia", spectrum.n)
        if np.any(inertia <= 0):
            raise InvalidParameterError("inertia", "modal drive needs strictly positive inertia")
        ValidationUtils.validate_bus_index(fault.bus, spectrum.n)

        p = spectrum.vectors @ (fault.disturbance(spectrum.n) / np.sqrt(inertia))
        f = np.zeros(spectrum.n)
        discriminant = 4.0 * spectrum.nonzero_values - gamma**2
        overdamped = np.flatnonzero(discriminant <= 0)
        if overdamped.size:
            raise OverdampedModeError((overdamped + 2).tolist())
        f[1:] = np.sqrt(discriminant)
        return ModalDrive(p=p, f=f, gamma=gamma)

    def homogeneous_modal_velocity(self, drive: ModalDrive, gamma: float, t: TimeLike) -> np.ndarray:
        """
        xi_dot_alpha(t) = (2 p_alpha / f_alpha) exp(-gamma t / 2) sin(f_alpha t / 2) for alpha > 1.
        The zero-mode column is 0. Scalar t gives shape (N,), a vector of times gives (T, N).
        """
        times = self._times(t)
        velocity = np.zeros((times.size, drive.n))
        envelope = np.exp(-0.5 * gamma * times)[:, None]
        f = drive.f[1:]
        velocity[:, 1:] = (2.0 * drive.p[1:] / f) * envelope * np.sin(0.5 * f * times[:, None])
        return velocity[0] if np.ndim(t) == 0 else velocity

    def measure_closed_form(self, spectrum: Spectrum, inertia_b: float, gamma: float, fault: FaultSpec) -> float:
        """M_b = delta_p^2 / (2 gamma m_b) sum_{alpha>1} u_alpha,b^2 / lambda_alpha, spectrum of L_M."""
        inertia_b = ValidationUtils.validate_positive(inertia_b, "inertia_b")
        gamma = ValidationUtils.validate_positive(gamma, "gamma")
        bus = ValidationUtils.validate_bus_index(fault.bus, spectrum.n)
        weight = float(np.sum(spectrum.vectors[1:, bus] ** 2 / spectrum.nonzero_values))
        return fault.delta_p**2 / (2.0 * gamma * inertia_b) * weight

    def measure_homogeneous(self, spectrum: Spectrum, gamma: float, fault: FaultSpec) -> float:
        """M_b^(0) = delta_p^2 / (2 gamma) sum_{alpha>1} u_alpha,b^2 / lambda_alpha, spectrum of L."""
        return self.measure_closed_form(spectrum, 1.0, gamma, fault)

    def measure_graph_form(self, spectrum: Spectrum, gamma: float, fault: FaultSpec) -> float:
        """M_b^(0) through resistance centrality: delta_p^2 / (2 gamma) (1/C_b - Kf_1 / N^2)."""
        spectral = SpectralService(self.settings)
        gamma = ValidationUtils.validate_positive(gamma, "gamma")
        centrality = spectral.centrality(spectrum, fault.bus)
        kirchhoff = spectral.kirchhoff_index(spectrum, 1)
        return fault.delta_p**2 / (2.0 * gamma) * (1.0 / centrality - kirchhoff / spectrum.n**2)

    def measures_all(self, spectrum: Spectrum, inertia, gamma: float, delta_p=1.0) -> np.ndarray:
        """
        M_b for a fault at every bus at once.

        Args:
            spectrum: Spectrum of L_M, or of L with inertia set to ones
            inertia: Inertia vector m_b used in the prefactor
            gamma: Homogeneous damping ratio
            delta_p: Scalar or per-bus loss magnitude
        """
        gamma = ValidationUtils.validate_positive(gamma, "gamma")
        inertia = ValidationUtils.as_vector(inertia, "inertia", spectrum.n)
        delta_p = np.broadcast_to(np.asarray(delta_p, dtype=float), (spectrum.n,))
        weights = np.sum(spectrum.vectors[1:] ** 2 / spectrum.nonzero_values[:, None], axis=0)
        return delta_p**2 / (2.0 * gamma * inertia) * weights

    def perturbed_modal_velocity(
        self,
        spectrum: Spectrum,
        gamma: float,
        g: float,
        a,
        drive: ModalDrive,
        t: TimeLike,
        include_zero_mode: Optional[bool] = None,
    ) -> np.ndarray:
        """
        Modal velocities to first order in g for damping ratios gamma_i = gamma (1 + g a_i).

        With V_ab = sum_i a_i u_a,i u_b,i, y_b = exp(-gamma t/2)(c_b - gamma s_b / f_b) and y_1 = exp(-gamma t),
        xi_dot_a = xi_dot_a^(0) + g gamma [ V_aa p_a exp(-gamma t/2)((2 gamma/f_a^3 - t/f_a) s_a - gamma t c_a/f_a^2)
                                           + sum_{b != a} V_ab p_b (y_a - y_b) / (lambda_a - lambda_b) ].

        Raises:
            DegenerateSpectrumError: If the spectrum is flagged degenerate
        """
        spectrum.require_nondegenerate()
        include_zero_mode = self._zero_mode_flag(include_zero_mode)
        g = ValidationUtils.validate_amplitude(g, "g")
        coupling = self._coupling(spectrum, a)

        times = self._times(t)
        base = self.homogeneous_modal_velocity(drive, gamma, times)
        if g == 0.0:
            return base[0] if np.ndim(t) == 0 else base

        lam = spectrum.values
        f = drive.f[1:]
        phase = 0.5 * f * times[:, None]
        sine, cosine = np.sin(phase), np.cos(phase)
        envelope = np.exp(-0.5 * gamma * times)[:, None]
        tt = times[:, None]

        # Impulse-response velocities of every mode
        y = np.empty((times.size, spectrum.n))
        y[:, 0] = np.exp(-gamma * times)
        y[:, 1:] = envelope * (cosine - gamma * sine / f)

        gaps = lam[:, None] - lam[None, :]
        np.fill_diagonal(gaps, np.inf)
        kernel = coupling * drive.p[None, :] / gaps
        if not include_zero_mode:
            kernel[:, 0] = 0.0
        cross = kernel.sum(axis=1)[None, :] * y - y @ kernel.T

        diagonal = np.zeros_like(base)
        diagonal[:, 1:] = (
            np.diag(coupling)[1:]
            * drive.p[1:]
            * envelope
            * ((2.0 * gamma / f**3 - tt / f) * sine - gamma * tt * cosine / f**2)
        )

        velocity = base + g * gamma * (diagonal + cross)
        velocity[:, 0] = 0.0
        return velocity[0] if np.ndim(t) == 0 else velocity

    def modal_energy_integral(
        self,
        spectrum: Spectrum,
        gamma: float,
        g: float,
        a,
        drive: ModalDrive,
        include_zero_mode: Optional[bool] = None,
    ) -> np.ndarray:
        """
        Integral of xi_dot_alpha^2 over [0, inf) to first order in g, zero for the zero mode:
        p_a^2 (1 - g V_aa) / (2 gamma lambda_a) - 2 g gamma sum_{b != a} V_ab p_a p_b / D_ab,
        D_ab = (lambda_a - lambda_b)^2 + 2 gamma^2 (lambda_a + lambda_b).
        """
        spectrum.require_nondegenerate()
        include_zero_mode = self._zero_mode_flag(include_zero_mode)
        g = ValidationUtils.validate_amplitude(g, "g")
        gamma = ValidationUtils.validate_positive(gamma, "gamma")
        coupling = self._coupling(spectrum, a)
        lam = spectrum.values
        p = drive.p

        energy = np.zeros(spectrum.n)
        energy[1:] = p[1:] ** 2 * (1.0 - g * np.diag(coupling)[1:]) / (2.0 * gamma * lam[1:])

        denominator = (lam[:, None] - lam[None, :]) ** 2 + 2.0 * gamma**2 * (lam[:, None] + lam[None, :])
        np.fill_diagonal(denominator, np.inf)
        denominator[0, :] = np.inf
        cross = coupling * p[:, None] * p[None, :] / denominator
        if not include_zero_mode:
            cross[:, 0] = 0.0
        energy -= 2.0 * g * gamma * cross.sum(axis=1)
        return energy

    # Private helpers

    def _zero_mode_flag(self, include_zero_mode: Optional[bool]) -> bool:
        return self.settings.include_zero_mode if include_zero_mode is None else bool(include_zero_mode)

    def _coupling(self, spectrum: Spectrum, a) -> np.ndarray:
        """V_ab = sum_i a_i u_a,i u_b,i for a zero-sum shape a."""
        a = ValidationUtils.validate_shape_vector(a, "a", spectrum.n, self.settings.shape_sum_tolerance)
        return (spectrum.vectors * a[None, :]) @ spectrum.vectors.T

    @staticmethod
    def _times(t: TimeLike) -> np.ndarray:
        times = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(times < 0):
            raise InvalidParameterError("t", "times must be >= 0")
        return times
