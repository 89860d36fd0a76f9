"""
Spectral service: eigendecomposition of (inertia-weighted) Laplacians.
Derives resistance distances, centralities, Kirchhoff indices and first-order eigenpair corrections.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from gridplace.config import Settings, get_settings
from gridplace.models.spectrum import Spectrum, Weighting
from gridplace.utils.exceptions import (
    InvalidParameterError,
    MissingZeroModeError,
    MultipleZeroModesError,
    NotSymmetricError,
    ZeroInertiaError,
)
from gridplace.utils.validators import ValidationUtils

logger = logging.getLogger(__name__)

# Components below this magnitude are skipped by the sign convention
SIGN_THRESHOLD = 1e-10


class SpectralService:
    """
    Service for Laplacian spectra and the graph quantities they determine.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def weighted_laplacian(self, laplacian: np.ndarray, inertia) -> np.ndarray:
        """
        Inertia-weighted Laplacian M^(-1/2) L M^(-1/2).

        Raises:
            ZeroInertiaError: If some inertia is not strictly positive
        """
        laplacian = np.asarray(laplacian, dtype=float)
        inertia = ValidationUtils.as_vector(inertia, "inertia", laplacian.shape[0])
        bad = np.flatnonzero(inertia <= 0)
        if bad.size:
            raise ZeroInertiaError(bad.tolist())
        scale = 1.0 / np.sqrt(inertia)
        return scale[:, None] * laplacian * scale[None, :]

    def eigendecompose(self, matrix: np.ndarray, inertia=None) -> Spectrum:
        """
        Sorted eigenpairs of a symmetric Laplacian-like matrix.

        Args:
            matrix: Symmetric N x N matrix with a one-dimensional null space
            inertia: Inertia vector when matrix is M^(-1/2) L M^(-1/2)

        Returns:
            Spectrum with lambda_1 snapped to 0, analytic zero mode and sign-fixed eigenvectors

        Raises:
            NotSymmetricError: If |A - A^T| exceeds the symmetry tolerance
            MultipleZeroModesError: If more than one eigenvalue vanishes
            MissingZeroModeError: If no eigenvalue vanishes
        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidParameterError("matrix", f"expected a square matrix, got shape {matrix.shape}")
        n = matrix.shape[0]
        scale = max(1.0, float(np.max(np.abs(matrix)))) if n else 1.0
        asymmetry = float(np.max(np.abs(matrix - matrix.T))) if n else 0.0
        if asymmetry > self.settings.symmetry_tolerance * scale:
            raise NotSymmetricError(asymmetry)
        matrix = 0.5 * (matrix + matrix.T)

        weighting = Weighting.UNWEIGHTED
        if inertia is not None:
            inertia = ValidationUtils.as_vector(inertia, "inertia", n)
            weighting = Weighting.INERTIA

        if n == 1:
            return Spectrum(values=np.zeros(1), vectors=np.ones((1, 1)), weighting=weighting, inertia=inertia)

        values, columns = scipy.linalg.eigh(matrix)
        vectors = columns.T.copy()
        largest = float(values[-1])
        cutoff = self.settings.zero_mode_tolerance * max(largest, 0.0)

        if largest <= 0:
            raise MultipleZeroModesError(n)
        zero_count = int(np.sum(np.abs(values) <= cutoff))
        if zero_count > 1:
            raise MultipleZeroModesError(zero_count)
        if zero_count == 0:
            raise MissingZeroModeError(float(values[0]))
        values[0] = 0.0

        zero_mode = self._analytic_zero_mode(matrix, inertia)
        if zero_mode is not None:
            vectors[0] = zero_mode
        for row in vectors:
            significant = np.flatnonzero(np.abs(row) > SIGN_THRESHOLD)
            if significant.size and row[significant[0]] < 0:
                row *= -1.0

        gaps = np.diff(values[1:])
        min_gap = float(gaps.min()) if gaps.size else float("inf")
        threshold = self.settings.degeneracy_tolerance * largest
        spectrum = Spectrum(
            values=values,
            vectors=vectors,
            weighting=weighting,
            inertia=inertia,
            min_gap=min_gap,
            degeneracy_threshold=threshold,
        )
        if spectrum.degenerate:
            logger.warning(f"Degenerate spectrum: min gap {min_gap:.3e} below {threshold:.3e}")
        logger.debug(f"Eigendecomposed {n} x {n} matrix, lambda_2 = {spectrum.algebraic_connectivity:.6g}")
        return spectrum

    def resistance_distance(self, spectrum: Spectrum, i: int, j: int) -> float:
        """Omega_ij = sum_{alpha>1} (u_alpha,i - u_alpha,j)^2 / lambda_alpha."""
        i = ValidationUtils.validate_bus_index(i, spectrum.n)
        j = ValidationUtils.validate_bus_index(j, spectrum.n)
        if i == j:
            return 0.0
        difference = spectrum.vectors[1:, i] - spectrum.vectors[1:, j]
        return float(np.sum(difference**2 / spectrum.nonzero_values))

    def resistance_matrix(self, spectrum: Spectrum) -> np.ndarray:
        """All pairwise resistance distances from the spectral pseudo-inverse."""
        pseudo_inverse = self.pseudo_inverse(spectrum)
        diagonal = np.diag(pseudo_inverse)
        omega = diagonal[:, None] + diagonal[None, :] - 2.0 * pseudo_inverse
        np.fill_diagonal(omega, 0.0)
        return omega

    @staticmethod
    def pseudo_inverse(spectrum: Spectrum) -> np.ndarray:
        """L^+ = sum_{alpha>1} u_alpha u_alpha^T / lambda_alpha."""
        modes = spectrum.vectors[1:]
        return (modes.T / spectrum.nonzero_values) @ modes

    def resistance_distance_pinv(self, laplacian: np.ndarray, i: int, j: int) -> float:
        """Omega_ij = L+_ii + L+_jj - 2 L+_ij via scipy's Hermitian pseudo-inverse."""
        laplacian = np.asarray(laplacian, dtype=float)
        i = ValidationUtils.validate_bus_index(i, laplacian.shape[0])
        j = ValidationUtils.validate_bus_index(j, laplacian.shape[0])
        pseudo_inverse = scipy.linalg.pinvh(laplacian)
        return float(pseudo_inverse[i, i] + pseudo_inverse[j, j] - 2.0 * pseudo_inverse[i, j])

    def centrality(self, spectrum: Spectrum, j: int) -> float:
        """Resistance centrality C_j = N / sum_i Omega_ij."""
        j = ValidationUtils.validate_bus_index(j, spectrum.n)
        if spectrum.n < 2:
            raise InvalidParameterError("spectrum", "centrality needs at least two buses")
        differences = spectrum.vectors[1:, :] - spectrum.vectors[1:, j][:, None]
        total = float(np.sum(differences**2 / spectrum.nonzero_values[:, None]))
        return spectrum.n / total

    def kirchhoff_index(self, spectrum: Spectrum, p: int = 1) -> float:
        """Generalized Kirchhoff index Kf_p = N sum_{alpha>1} lambda_alpha^(-p)."""
        if isinstance(p, bool) or int(p) != p or p < 1:
            raise InvalidParameterError("p", f"must be a positive integer, got {p}")
        return float(spectrum.n * np.sum(spectrum.nonzero_values ** (-int(p))))

    @staticmethod
    def slow_mode_amplitude(spectrum: Spectrum) -> np.ndarray:
        """Per-bus sum_{alpha>1} u_alpha,i^2 / lambda_alpha (the diagonal of L^+)."""
        return np.sum(spectrum.vectors[1:] ** 2 / spectrum.nonzero_values[:, None], axis=0)

    def first_order_eigenpairs(self, spectrum: Spectrum, perturbation: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        First-order corrections of the eigenpairs under A -> A + V, for a symmetric V.

        Returns:
            (delta_values, delta_vectors) with delta_values_alpha = u_alpha V u_alpha and
            delta_vectors[alpha] = sum_{beta != alpha} (u_beta V u_alpha) / (lambda_alpha - lambda_beta) u_beta

        Raises:
            DegenerateSpectrumError: If the spectrum is flagged degenerate
        """
        spectrum.require_nondegenerate()
        perturbation = np.asarray(perturbation, dtype=float)
        if perturbation.shape != (spectrum.n, spectrum.n):
            raise InvalidParameterError("perturbation", f"expected shape {(spectrum.n, spectrum.n)}")
        modal = spectrum.vectors @ perturbation @ spectrum.vectors.T
        gaps = spectrum.values[:, None] - spectrum.values[None, :]
        np.fill_diagonal(gaps, np.inf)
        coefficients = modal / gaps
        return np.diag(modal).copy(), coefficients @ spectrum.vectors

    # Private helpers

    @staticmethod
    def _analytic_zero_mode(matrix: np.ndarray, inertia: Optional[np.ndarray]) -> Optional[np.ndarray]:
        """sqrt(m)/sqrt(sum m) for L_M, 1/sqrt(N) for zero-row-sum matrices, else None."""
        n = matrix.shape[0]
        if inertia is not None:
            candidate = np.sqrt(inertia) / np.sqrt(inertia.sum())
        else:
            candidate = np.full(n, 1.0 / np.sqrt(n))
        tolerance = 1e-8 * max(1.0, float(np.max(np.abs(matrix))))
        if float(np.max(np.abs(matrix @ candidate))) <= tolerance:
            return candidate
        return None
