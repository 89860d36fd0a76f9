"""
Tests for the response service: modal drive, homogeneous and damping-perturbed trajectories, and the measure.
"""

import numpy as np
import pytest

from gridplace.models.response import FaultSpec
from gridplace.services.oracle import OracleService
from gridplace.services.response import ResponseService
from gridplace.services.spectral import SpectralService
from gridplace.utils.exceptions import (
    DegenerateSpectrumError,
    InvalidParameterError,
    OverdampedModeError,
    UnknownBusError,
)
from tests.conftest import grid_laplacian, laplacian

TRIANGLE_SHAPE = np.array([0.6, -0.2, -0.4])


class TestModalDrive:
    """Test the projection of the disturbance on the modes."""

    def test_two_bus(self, response_service: ResponseService, two_bus_spectrum):
        """Test p_2 = 1/sqrt(2) and f_2 = sqrt(7) for lambda_2 = 2, gamma = 1."""
        drive = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))

        assert drive.p[1] == pytest.approx(1.0 / np.sqrt(2.0))
        assert drive.f[1] == pytest.approx(np.sqrt(7.0))
        assert drive.f[0] == 0.0

    def test_zero_loss(self, response_service: ResponseService, ring10_spectrum):
        """Test that delta_p = 0 gives a zero drive."""
        drive = response_service.modal_drive(ring10_spectrum, np.ones(10), 1.0, FaultSpec(4, 0.0))

        assert np.all(drive.p == 0.0)

    def test_inertia_scaling(self, response_service: ResponseService, two_bus_spectrum):
        """Test the 1/sqrt(m_b) factor of the drive."""
        unit = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(1))
        heavy = response_service.modal_drive(two_bus_spectrum, [1.0, 4.0], 1.0, FaultSpec(1))

        assert heavy.p == pytest.approx(unit.p / 2.0)

    def test_overdamped(self, response_service: ResponseService, two_bus_spectrum):
        """Test that 4 lambda_2 <= gamma^2 is refused and names the mode."""
        with pytest.raises(OverdampedModeError, match=r"\[2\]"):
            response_service.modal_drive(two_bus_spectrum, np.ones(2), 3.0, FaultSpec(0))

    def test_unknown_bus(self, response_service: ResponseService, two_bus_spectrum):
        """Test a fault position outside the grid."""
        with pytest.raises(UnknownBusError):
            response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(5))

    def test_invalid_gamma(self, response_service: ResponseService, two_bus_spectrum):
        """Test that gamma must be positive."""
        with pytest.raises(InvalidParameterError, match="gamma"):
            response_service.modal_drive(two_bus_spectrum, np.ones(2), 0.0, FaultSpec(0))

    def test_negative_bus_rejected(self):
        """Test the fault position precondition."""
        with pytest.raises(InvalidParameterError, match="bus"):
            FaultSpec(-1)


class TestHomogeneousModalVelocity:
    """Test xi_dot in the homogeneous case."""

    @pytest.fixture
    def two_bus_drive(self, response_service: ResponseService, two_bus_spectrum):
        return response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))

    def test_starts_at_rest(self, response_service: ResponseService, two_bus_drive):
        """Test xi_dot(0) = 0."""
        assert np.all(response_service.homogeneous_modal_velocity(two_bus_drive, 1.0, 0.0) == 0.0)

    def test_two_bus_value(self, response_service: ResponseService, two_bus_drive):
        """Test direct substitution at t = 1."""
        expected = 2.0 / np.sqrt(2.0) / np.sqrt(7.0) * np.exp(-0.5) * np.sin(np.sqrt(7.0) / 2.0)

        velocity = response_service.homogeneous_modal_velocity(two_bus_drive, 1.0, 1.0)

        assert velocity[1] == pytest.approx(expected, rel=1e-12)
        assert velocity[0] == 0.0

    def test_decays(self, response_service: ResponseService, two_bus_drive):
        """Test the exponential envelope."""
        velocity = response_service.homogeneous_modal_velocity(two_bus_drive, 1.0, 60.0)

        assert np.max(np.abs(velocity)) < 1e-12

    def test_vector_times(self, response_service: ResponseService, two_bus_drive):
        """Test that a vector of times gives one row per time."""
        times = np.linspace(0.0, 5.0, 11)

        velocity = response_service.homogeneous_modal_velocity(two_bus_drive, 1.0, times)

        assert velocity.shape == (11, 2)
        assert velocity[4] == pytest.approx(response_service.homogeneous_modal_velocity(two_bus_drive, 1.0, times[4]))


class TestMeasure:
    """Test the closed-form performance measure."""

    def test_two_bus(self, response_service: ResponseService, two_bus_spectrum):
        """Test M_1 = 0.125 for m = 1, gamma = 1, delta_p = 1."""
        assert response_service.measure_closed_form(two_bus_spectrum, 1.0, 1.0, FaultSpec(0)) == pytest.approx(0.125)

    def test_quadratic_in_loss(self, response_service: ResponseService, ring10_spectrum):
        """Test that doubling delta_p quadruples M_b."""
        single = response_service.measure_closed_form(ring10_spectrum, 1.0, 0.5, FaultSpec(3, 1.0))
        double = response_service.measure_closed_form(ring10_spectrum, 1.0, 0.5, FaultSpec(3, 2.0))

        assert double == pytest.approx(4.0 * single)

    def test_homogeneous_matches_unit_inertia(self, response_service: ResponseService, ring10_spectrum):
        """Test that the homogeneous form coincides with the closed form at m = 1."""
        for bus in range(10):
            fault = FaultSpec(bus)
            assert response_service.measure_homogeneous(ring10_spectrum, 1.0, fault) == response_service.measure_closed_form(
                ring10_spectrum, 1.0, 1.0, fault
            )

    def test_graph_form(self, response_service: ResponseService, two_bus_spectrum, ring10_spectrum):
        """Test the resistance-centrality route: 0.5 (0.5 - 0.25) on two buses and agreement on the ring."""
        assert response_service.measure_graph_form(two_bus_spectrum, 1.0, FaultSpec(0)) == pytest.approx(0.125)
        for bus in range(10):
            spectral = response_service.measure_homogeneous(ring10_spectrum, 0.7, FaultSpec(bus))
            graph = response_service.measure_graph_form(ring10_spectrum, 0.7, FaultSpec(bus))
            assert graph == pytest.approx(spectral, rel=1e-10)

    def test_homogeneous_inertia_scaling(
        self, response_service: ResponseService, spectral_service: SpectralService, ring10_laplacian, ring10_spectrum
    ):
        """Test that a uniform m gives M_b = M_b^(0) / m through the spectrum of L/m."""
        weighted = spectral_service.eigendecompose(
            spectral_service.weighted_laplacian(ring10_laplacian, np.full(10, 2.0)), inertia=np.full(10, 2.0)
        )

        closed = response_service.measure_closed_form(weighted, 2.0, 1.0, FaultSpec(6))
        homogeneous = response_service.measure_homogeneous(ring10_spectrum, 1.0, FaultSpec(6))

        assert closed == pytest.approx(homogeneous / 2.0, rel=1e-10)

    def test_measures_all(self, response_service: ResponseService, ring10_spectrum):
        """Test the vectorized measure against the per-bus closed form."""
        inertia = np.ones(10)
        measures = response_service.measures_all(ring10_spectrum, inertia, 1.0, delta_p=1.5)

        for bus in range(10):
            single = response_service.measure_closed_form(ring10_spectrum, 1.0, 1.0, FaultSpec(bus, 1.5))
            assert measures[bus] == pytest.approx(single, rel=1e-12)

    def test_energy_sum_matches_closed_form(
        self, response_service: ResponseService, spectral_service: SpectralService, ring10_laplacian
    ):
        """Test that the unperturbed modal energies add up to M_b with inhomogeneous inertia."""
        inertia = np.linspace(1.0, 2.0, 10)
        spectrum = spectral_service.eigendecompose(
            spectral_service.weighted_laplacian(ring10_laplacian, inertia), inertia=inertia
        )
        fault = FaultSpec(2)
        drive = response_service.modal_drive(spectrum, inertia, 0.5, fault)

        energies = response_service.modal_energy_integral(spectrum, 0.5, 0.0, np.zeros(10), drive)

        closed = response_service.measure_closed_form(spectrum, inertia[2], 0.5, fault)
        assert energies.sum() == pytest.approx(closed, rel=1e-12)


class TestPerturbedModalVelocity:
    """Test the first-order damping-perturbed trajectories."""

    @pytest.fixture
    def triangle_spectrum(self, spectral_service: SpectralService, triangle_grid):
        return spectral_service.eigendecompose(grid_laplacian(triangle_grid))

    def test_zero_amplitude(self, response_service: ResponseService, triangle_spectrum):
        """Test that g = 0 reduces to the homogeneous trajectory."""
        drive = response_service.modal_drive(triangle_spectrum, np.ones(3), 1.0, FaultSpec(0))
        times = np.linspace(0.0, 8.0, 33)

        perturbed = response_service.perturbed_modal_velocity(triangle_spectrum, 1.0, 0.0, TRIANGLE_SHAPE, drive, times)

        assert np.array_equal(perturbed, response_service.homogeneous_modal_velocity(drive, 1.0, times))

    def test_zero_shape(self, response_service: ResponseService, triangle_spectrum):
        """Test that a = 0 reduces to the homogeneous trajectory."""
        drive = response_service.modal_drive(triangle_spectrum, np.ones(3), 1.0, FaultSpec(1))
        times = np.linspace(0.0, 8.0, 33)

        perturbed = response_service.perturbed_modal_velocity(triangle_spectrum, 1.0, 0.3, np.zeros(3), drive, times)

        assert perturbed == pytest.approx(response_service.homogeneous_modal_velocity(drive, 1.0, times), abs=1e-15)

    def test_starts_at_rest(self, response_service: ResponseService, triangle_spectrum):
        """Test xi_dot(0) = 0 for any perturbation."""
        drive = response_service.modal_drive(triangle_spectrum, np.ones(3), 1.0, FaultSpec(2))

        velocity = response_service.perturbed_modal_velocity(triangle_spectrum, 1.0, 0.5, TRIANGLE_SHAPE, drive, 0.0)

        assert velocity == pytest.approx(np.zeros(3), abs=1e-15)

    def test_shape_must_balance(self, response_service: ResponseService, triangle_spectrum):
        """Test the zero-sum precondition on a."""
        drive = response_service.modal_drive(triangle_spectrum, np.ones(3), 1.0, FaultSpec(0))

        with pytest.raises(InvalidParameterError, match="sum to zero"):
            response_service.perturbed_modal_velocity(triangle_spectrum, 1.0, 0.1, [0.5, 0.5, 0.0], drive, 1.0)

    def test_amplitude_bound(self, response_service: ResponseService, triangle_spectrum):
        """Test |g| < 1."""
        drive = response_service.modal_drive(triangle_spectrum, np.ones(3), 1.0, FaultSpec(0))

        with pytest.raises(InvalidParameterError, match="g"):
            response_service.perturbed_modal_velocity(triangle_spectrum, 1.0, 1.0, TRIANGLE_SHAPE, drive, 1.0)

    def test_degenerate_refused(self, response_service: ResponseService, spectral_service: SpectralService):
        """Test that a degenerate spectrum is refused."""
        spectrum = spectral_service.eigendecompose(
            laplacian([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
        )
        drive = response_service.modal_drive(spectrum, np.ones(3), 1.0, FaultSpec(0))

        with pytest.raises(DegenerateSpectrumError):
            response_service.perturbed_modal_velocity(spectrum, 1.0, 0.1, TRIANGLE_SHAPE, drive, 1.0)

    @pytest.mark.slow
    @pytest.mark.oracle
    def test_second_order_error(
        self, response_service: ResponseService, oracle_service: OracleService, triangle_grid, triangle_spectrum
    ):
        """Test that halving g cuts the deviation from the integrated modal velocities about fourfold."""
        matrix = grid_laplacian(triangle_grid)
        inertia = np.ones(3)
        fault = FaultSpec(0)
        drive = response_service.modal_drive(triangle_spectrum, inertia, 1.0, fault)

        errors = []
        for g in (0.1, 0.05):
            damping = inertia * (1.0 + g * TRIANGLE_SHAPE)
            trajectory = oracle_service.integrate_swing(matrix, inertia, damping, fault, dt=1e-3, horizon=15.0)
            # The loss enters the oracle with a minus sign
            integrated = -trajectory.modal_velocities(triangle_spectrum)
            predicted = response_service.perturbed_modal_velocity(
                triangle_spectrum, 1.0, g, TRIANGLE_SHAPE, drive, trajectory.times
            )
            errors.append(np.max(np.abs(integrated[:, 1:] - predicted[:, 1:])))

        assert errors[0] / errors[1] > 3.0


class TestModalEnergyIntegral:
    """Test the first-order modal energies."""

    def test_unperturbed(self, response_service: ResponseService, ring10_spectrum):
        """Test p_a^2 / (2 gamma lambda_a) at g = 0."""
        drive = response_service.modal_drive(ring10_spectrum, np.ones(10), 0.8, FaultSpec(5))

        energies = response_service.modal_energy_integral(ring10_spectrum, 0.8, 0.0, np.zeros(10), drive)

        assert energies[0] == 0.0
        expected = drive.p[1:] ** 2 / (2.0 * 0.8 * ring10_spectrum.values[1:])
        assert energies[1:] == pytest.approx(expected, rel=1e-12)

    def test_two_bus_without_zero_mode(self, response_service: ResponseService, two_bus_spectrum):
        """Test that V_22 = 0 leaves the mode-2 energy unchanged when mode 1 is not coupled."""
        drive = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))

        energies = response_service.modal_energy_integral(
            two_bus_spectrum, 1.0, 0.1, [1.0, -1.0], drive, include_zero_mode=False
        )

        assert energies[1] == pytest.approx(0.125)

    def test_two_bus_with_zero_mode(self, response_service: ResponseService, two_bus_spectrum):
        """Test the coupling to mode 1: -2 g gamma V_21 p_2 p_1 / (lambda_2^2 + 2 gamma^2 lambda_2)."""
        drive = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))

        energies = response_service.modal_energy_integral(
            two_bus_spectrum, 1.0, 0.1, [1.0, -1.0], drive, include_zero_mode=True
        )

        assert energies[1] == pytest.approx(0.125 - 0.0125)

    def test_default_couples_zero_mode(self, response_service: ResponseService, two_bus_spectrum):
        """Test that the zero mode is coupled unless disabled."""
        drive = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))

        default = response_service.modal_energy_integral(two_bus_spectrum, 1.0, 0.1, [1.0, -1.0], drive)

        assert default[1] == pytest.approx(0.1125)

    @pytest.mark.slow
    @pytest.mark.oracle
    def test_against_oracle(
        self, response_service: ResponseService, oracle_service: OracleService, spectral_service: SpectralService, triangle_grid
    ):
        """Test that the summed first-order energies track the integrated measure to second order."""
        matrix = grid_laplacian(triangle_grid)
        spectrum = spectral_service.eigendecompose(matrix)
        inertia = np.ones(3)
        fault = FaultSpec(1)
        drive = response_service.modal_drive(spectrum, inertia, 1.0, fault)

        errors = []
        for g in (0.1, 0.05):
            damping = inertia * (1.0 + g * TRIANGLE_SHAPE)
            oracle = oracle_service.oracle_measure(matrix, inertia, damping, fault, dt=1e-3)
            predicted = response_service.modal_energy_integral(spectrum, 1.0, g, TRIANGLE_SHAPE, drive).sum()
            errors.append(abs(oracle.value - predicted))

        assert errors[0] / errors[1] > 3.0

    @pytest.mark.slow
    @pytest.mark.oracle
    def test_zero_mode_coupling_matches_oracle(
        self, response_service: ResponseService, oracle_service: OracleService, two_bus_laplacian, two_bus_spectrum
    ):
        """Test that coupling mode 1 brings the two-bus energy closer to the integrated measure."""
        g = 0.05
        drive = response_service.modal_drive(two_bus_spectrum, np.ones(2), 1.0, FaultSpec(0))
        oracle = oracle_service.oracle_measure(two_bus_laplacian, np.ones(2), [1.0 + g, 1.0 - g], FaultSpec(0), dt=1e-3)

        coupled = response_service.modal_energy_integral(two_bus_spectrum, 1.0, g, [1.0, -1.0], drive, True)[1]
        uncoupled = response_service.modal_energy_integral(two_bus_spectrum, 1.0, g, [1.0, -1.0], drive, False)[1]

        assert abs(oracle.value - coupled) < abs(oracle.value - uncoupled)
