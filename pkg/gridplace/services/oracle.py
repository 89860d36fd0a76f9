"""
Oracle service: direct integration of the linearized swing equations.
Provides the quadrature of the performance measure and a finite-difference harness for the susceptibilities.
"""

from dataclasses import replace
import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg

from gridplace.config import Settings, get_settings
from gridplace.models.response import FaultSpec
from gridplace.models.sensitivity import PerturbationParams
from gridplace.models.trajectory import FiniteDifferenceEstimate, MeasureEstimate, Probe, ProbeKind, Trajectory
from gridplace.utils.exceptions import (
    HorizonTooShortError,
    InvalidParameterError,
    StepTooLargeError,
    ZeroInertiaError,
)
from gridplace.utils.validators import ValidationUtils

logger = logging.getLogger(__name__)

# Share of the horizon inspected by the tail criterion
TAIL_FRACTION = 0.1

# Propagator powers precomputed per block, and the cap on their total entries
MAX_BLOCK = 64
BLOCK_BUDGET = 1 << 22


class OracleService:
    """
    Service for time-domain ground truth.
    The state (delta_theta, omega) is integrated directly, without modal coordinates.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def integrate_swing(
        self,
        laplacian: np.ndarray,
        inertia,
        damping,
        fault: FaultSpec,
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> Trajectory:
        """
        Classical RK4 with constant step for M omega_dot + D omega = delta_P - L delta_theta,
        delta_P_i = -delta_ib delta_p for t >= 0, starting at rest.

        Args:
            laplacian: Operating-point Laplacian
            inertia: Inertia vector m_i > 0
            damping: Damping vector d_i >= 0
            fault: Fault location and magnitude
            dt: Step in seconds, resolution-based default when omitted
            horizon: Final time, 20 / gamma_min by default

        Returns:
            Trajectory sampled every dt

        Raises:
            StepTooLargeError: If dt > 0.1 / sqrt(lambda_max(L) / m_min)
        """
        laplacian, inertia, damping = self._system(laplacian, inertia, damping)
        n = inertia.size
        bus = ValidationUtils.validate_bus_index(fault.bus, n)
        dt = self._resolve_step(laplacian, inertia, damping, dt)
        horizon = self.default_horizon(inertia, damping) if horizon is None else ValidationUtils.validate_positive(horizon, "horizon")

        start = Trajectory(
            times=[0.0],
            omega=np.zeros((1, n)),
            theta_dev=np.zeros((1, n)),
            inertia=inertia,
            meta={
                "integrator": "rk4",
                "dt": dt,
                "horizon": 0.0,
                "gamma_min": float(np.min(damping / inertia)),
                "fault_bus": bus,
                "delta_p": fault.delta_p,
            },
        )
        return self._extend(start, laplacian, damping, horizon)

    def measure_numeric(self, trajectory: Trajectory, inertia=None) -> MeasureEstimate:
        """
        Trapezoidal quadrature of sum_i m_i (omega_i - omega_sys)^2 with a bound on the truncated tail.

        Raises:
            HorizonTooShortError: If the integrand over the last tenth of the horizon exceeds
                the tail tolerance relative to its peak
        """
        inertia = trajectory.inertia if inertia is None else ValidationUtils.as_vector(inertia, "inertia", trajectory.omega.shape[1])
        integrand = self._integrand(trajectory.omega[:, :, None], inertia)[:, 0]
        return self._estimate(integrand, trajectory.times, trajectory.meta.get("gamma_min"))

    def simulate(
        self,
        laplacian: np.ndarray,
        inertia,
        damping,
        fault: FaultSpec,
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> Tuple[Trajectory, MeasureEstimate]:
        """
        Integrate and measure, doubling the horizon until the tail criterion holds.
        Each doubling continues from the last state.

        Raises:
            HorizonTooShortError: If the criterion still fails after the allowed doublings
        """
        laplacian, inertia, damping = self._system(laplacian, inertia, damping)
        trajectory = self.integrate_swing(laplacian, inertia, damping, fault, dt, horizon)
        doublings = 0
        while True:
            try:
                return trajectory, self.measure_numeric(trajectory)
            except HorizonTooShortError as e:
                if doublings == self.settings.oracle_max_doublings:
                    raise
                logger.debug(f"{e.detail}; doubling horizon")
                doublings += 1
                trajectory = self._extend(trajectory, laplacian, damping, 2.0 * trajectory.horizon)

    def oracle_measure(
        self,
        laplacian: np.ndarray,
        inertia,
        damping,
        fault: FaultSpec,
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> MeasureEstimate:
        """Numerical M_b with horizon auto-extension."""
        return self.oracle_measures(laplacian, inertia, damping, [fault], dt, horizon)[0]

    def oracle_measures(
        self,
        laplacian: np.ndarray,
        inertia,
        damping,
        faults: Sequence[FaultSpec],
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> List[MeasureEstimate]:
        """
        Numerical M_b for several faults on the same system.

        The faults are integrated together as the columns of one state matrix and only the
        integrand is kept. All faults share one horizon, doubled from the last state until
        every column passes the tail criterion.

        Raises:
            HorizonTooShortError: If some fault still fails after the allowed doublings
        """
        laplacian, inertia, damping = self._system(laplacian, inertia, damping)
        n = inertia.size
        if not faults:
            return []
        for fault in faults:
            ValidationUtils.validate_bus_index(fault.bus, n)
        dt = self._resolve_step(laplacian, inertia, damping, dt)
        horizon = self.default_horizon(inertia, damping) if horizon is None else ValidationUtils.validate_positive(horizon, "horizon")
        gamma_min = float(np.min(damping / inertia))

        propagator, drive = self._propagator(laplacian, inertia, damping, dt)
        offset = drive @ self._forcing(inertia, faults)
        state = np.zeros(offset.shape)
        pieces = [np.zeros((1, len(faults)))]
        done = 0
        doublings = 0
        while True:
            steps = self._step_count(horizon, dt)
            for block in self._blocks(propagator, offset, state, steps - done):
                pieces.append(self._integrand(block[:, n:, :], inertia))
                state = block[-1]
            done = steps
            integrand = np.concatenate(pieces)
            times = dt * np.arange(done + 1)
            try:
                return [self._estimate(integrand[:, column], times, gamma_min) for column in range(len(faults))]
            except HorizonTooShortError as e:
                if doublings == self.settings.oracle_max_doublings:
                    raise
                logger.debug(f"{e.detail}; doubling horizon for {len(faults)} stacked faults")
                doublings += 1
                horizon *= 2.0

    @staticmethod
    def perturbed_system(params: PerturbationParams) -> Tuple[np.ndarray, np.ndarray]:
        """(m_i, d_i) for m_i = m (1 + mu r_i), gamma_i = gamma (1 + g a_i), d_i = m_i gamma_i."""
        return params.inertia, params.damping

    def finite_difference(
        self,
        laplacian: np.ndarray,
        params: PerturbationParams,
        fault: FaultSpec,
        probe: Probe,
        step: Optional[float] = None,
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> FiniteDifferenceEstimate:
        """
        Central difference of the oracle measure along e_i - (1 - e_i)/(N - 1) in the r or a shape.
        The perturbed bus is compensated uniformly by all others so the shape keeps summing to zero.
        `value` is the directional derivative times (N - 1)/N, the bus-i component of the
        zero-sum projected gradient.

        Args:
            laplacian: Operating-point Laplacian
            params: Baseline, amplitudes and current shapes
            fault: Fault location and magnitude
            probe: Which shape and which bus
            step: Shape step epsilon
            dt: Common integrator step of both probes
            horizon: Initial horizon of both probes
        """
        laplacian = np.asarray(laplacian, dtype=float)
        n = params.n
        if n < 2:
            raise InvalidParameterError("params", "finite differences need at least two buses")
        bus = ValidationUtils.validate_bus_index(probe.bus, n)
        step = ValidationUtils.validate_positive(self.settings.fd_step if step is None else step, "step")

        direction = np.full(n, -1.0 / (n - 1))
        direction[bus] = 1.0

        def system(sign: float) -> Tuple[np.ndarray, np.ndarray]:
            if probe.kind == ProbeKind.INERTIA:
                inertia = params.m * (1.0 + params.mu * (params.r + sign * step * direction))
                return inertia, inertia * params.damping_ratio
            ratio = params.gamma * (1.0 + params.g * (params.a + sign * step * direction))
            return params.inertia, params.inertia * ratio

        base_inertia, base_damping = self.perturbed_system(params)
        dt = self.default_step(laplacian, base_inertia, base_damping) if dt is None else dt
        horizon = self.default_horizon(base_inertia, base_damping) if horizon is None else horizon

        plus_inertia, plus_damping = system(+1.0)
        plus = self.oracle_measure(laplacian, plus_inertia, plus_damping, fault, dt, horizon)
        minus_inertia, minus_damping = system(-1.0)
        minus = self.oracle_measure(laplacian, minus_inertia, minus_damping, fault, dt, plus.horizon)

        directional = (plus.value - minus.value) / (2.0 * step)
        logger.debug(f"Finite difference {probe.kind.value}@{bus}: {directional:.6e} along the compensated direction")
        return FiniteDifferenceEstimate(
            value=directional * (n - 1) / n,
            directional=directional,
            step=step,
            measure_plus=plus.value,
            measure_minus=minus.value,
        )

    def default_step(self, laplacian: np.ndarray, inertia, damping) -> float:
        """min(max_dt, 0.05 * 2 pi / f_max) capped by the resolution limit."""
        laplacian, inertia, damping = self._system(laplacian, inertia, damping)
        scale = 1.0 / np.sqrt(inertia)
        weighted = scale[:, None] * laplacian * scale[None, :]
        largest = float(scipy.linalg.eigvalsh(weighted)[-1]) if inertia.size > 1 else 0.0
        gamma_min = float(np.min(damping / inertia))
        f_max = np.sqrt(max(4.0 * largest - gamma_min**2, 0.0))
        candidates = [self.settings.oracle_max_dt, self._step_limit(laplacian, inertia)]
        if f_max > 0:
            candidates.append(0.05 * 2.0 * np.pi / f_max)
        return float(min(candidates))

    def default_horizon(self, inertia, damping) -> float:
        """oracle_horizon_factor / gamma_min."""
        ratio = np.asarray(damping, dtype=float) / np.asarray(inertia, dtype=float)
        gamma_min = float(np.min(ratio))
        if gamma_min <= 0:
            raise InvalidParameterError("damping", "every bus needs d_i > 0 for a default horizon")
        return self.settings.oracle_horizon_factor / gamma_min

    # Private helpers

    @staticmethod
    def _system(laplacian, inertia, damping) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        laplacian = np.asarray(laplacian, dtype=float)
        n = laplacian.shape[0]
        inertia = ValidationUtils.as_vector(inertia, "inertia", n)
        damping = ValidationUtils.as_vector(damping, "damping", n)
        bad = np.flatnonzero(inertia <= 0)
        if bad.size:
            raise ZeroInertiaError(bad.tolist())
        if np.any(damping < 0):
            raise InvalidParameterError("damping", "entries must be >= 0")
        return laplacian, inertia, damping

    @staticmethod
    def _step_limit(laplacian: np.ndarray, inertia: np.ndarray) -> float:
        largest = float(scipy.linalg.eigvalsh(laplacian)[-1]) if laplacian.shape[0] > 1 else 0.0
        if largest <= 0:
            return float("inf")
        return 0.1 / np.sqrt(largest / float(np.min(inertia)))

    def _resolve_step(self, laplacian: np.ndarray, inertia: np.ndarray, damping: np.ndarray, dt: Optional[float]) -> float:
        if dt is None:
            return self.default_step(laplacian, inertia, damping)
        dt = ValidationUtils.validate_positive(dt, "dt")
        limit = self._step_limit(laplacian, inertia)
        if dt > limit:
            raise StepTooLargeError(dt, limit)
        return dt

    @staticmethod
    def _step_count(horizon: float, dt: float) -> int:
        return int(np.ceil(horizon / dt - 1e-9))

    @staticmethod
    def _propagator(laplacian: np.ndarray, inertia: np.ndarray, damping: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        One RK4 step of x_dot = A x + b is x -> P x + Q b, with P the degree-4 Taylor
        polynomial of exp(dt A) and Q = dt (I + dt A/2 + (dt A)^2/6 + (dt A)^3/24).
        """
        n = inertia.size
        system = np.zeros((2 * n, 2 * n))
        system[:n, n:] = np.eye(n)
        system[n:, :n] = -laplacian / inertia[:, None]
        system[n:, n:] = -np.diag(damping / inertia)

        ha = dt * system
        ha2 = ha @ ha
        ha3 = ha2 @ ha
        identity = np.eye(2 * n)
        propagator = identity + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 @ ha / 24.0
        drive = dt * (identity + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0)
        return propagator, drive

    @staticmethod
    def _forcing(inertia: np.ndarray, faults: Sequence[FaultSpec]) -> np.ndarray:
        """Right-hand side b of every fault, one column each."""
        n = inertia.size
        forcing = np.zeros((2 * n, len(faults)))
        for column, fault in enumerate(faults):
            forcing[n + fault.bus, column] = -fault.delta_p / inertia[fault.bus]
        return forcing

    @staticmethod
    def _blocks(propagator: np.ndarray, offset: np.ndarray, state: np.ndarray, steps: int) -> Iterator[np.ndarray]:
        """
        Yield the next `steps` states after `state` in blocks of shape (count, 2n, faults).
        Inside a block x_(k+j) = P^j x_k + sum_(i<j) P^i c, with the powers computed once.
        """
        if steps <= 0:
            return
        size = propagator.shape[0]
        block = int(max(1, min(MAX_BLOCK, steps, BLOCK_BUDGET // (size * size))))
        powers = np.empty((block, size, size))
        drifts = np.empty((block,) + offset.shape)
        powers[0] = propagator
        drifts[0] = offset
        for j in range(1, block):
            powers[j] = propagator @ powers[j - 1]
            drifts[j] = propagator @ drifts[j - 1] + offset

        done = 0
        while done < steps:
            count = min(block, steps - done)
            states = powers[:count] @ state + drifts[:count]
            yield states
            state = states[-1]
            done += count

    def _extend(self, trajectory: Trajectory, laplacian: np.ndarray, damping: np.ndarray, horizon: float) -> Trajectory:
        """Continue a single-fault trajectory from its last sample up to `horizon`."""
        inertia = trajectory.inertia
        n = inertia.size
        dt = trajectory.meta["dt"]
        fault = FaultSpec(trajectory.meta["fault_bus"], trajectory.meta["delta_p"])
        done = trajectory.times.size - 1
        steps = self._step_count(horizon, dt)

        propagator, drive = self._propagator(laplacian, inertia, damping, dt)
        offset = drive @ self._forcing(inertia, [fault])
        state = np.concatenate([trajectory.theta_dev[-1], trajectory.omega[-1]])[:, None]
        states = [np.concatenate([trajectory.theta_dev, trajectory.omega], axis=1)]
        for block in self._blocks(propagator, offset, state, steps - done):
            states.append(block[:, :, 0])
        states = np.concatenate(states)
        times = dt * np.arange(states.shape[0])

        logger.debug(f"Integrated {steps - done} steps of dt={dt:.3e} s for a fault at bus position {fault.bus}")
        return replace(
            trajectory,
            times=times,
            omega=states[:, n:],
            theta_dev=states[:, :n],
            meta={**trajectory.meta, "horizon": float(times[-1])},
        )

    @staticmethod
    def _integrand(omega: np.ndarray, inertia: np.ndarray) -> np.ndarray:
        """sum_i m_i (omega_i - omega_sys)^2 for omega of shape (samples, n, faults)."""
        average = np.einsum("sik,i->sk", omega, inertia / inertia.sum())
        deviation = omega - average[:, None, :]
        return np.einsum("sik,i->sk", deviation**2, inertia)

    def _estimate(self, integrand: np.ndarray, times: np.ndarray, gamma_min: Optional[float]) -> MeasureEstimate:
        horizon = float(times[-1])
        dt = float(times[1] - times[0]) if times.size > 1 else 0.0
        peak = float(np.max(integrand)) if integrand.size else 0.0
        if peak == 0.0:
            return MeasureEstimate(value=0.0, tail_bound=0.0, horizon=horizon, dt=dt)

        tail_start = int(np.floor((1.0 - TAIL_FRACTION) * (integrand.size - 1)))
        tail = float(np.max(integrand[tail_start:]))
        ratio = tail / peak
        if ratio > self.settings.oracle_tail_tolerance:
            raise HorizonTooShortError(horizon, ratio)

        # The integrand envelope decays at least like exp(-gamma_min t)
        decay = gamma_min or 1.0 / max(horizon, 1e-300)
        value = float(scipy.integrate.trapezoid(integrand, times))
        return MeasureEstimate(value=value, tail_bound=tail / decay, horizon=horizon, dt=dt)
