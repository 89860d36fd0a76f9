"""
Analysis service orchestrating the pipeline behind each command.
Grid -> operating point -> spectra -> measures, susceptibilities, placements and oracle checks.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from gridplace.config import Settings, get_settings
from gridplace.models.grid import AnglesSolution, GridModel, OperatingPoint
from gridplace.models.placement import Algorithm, PlacementResult, WeightingKind
from gridplace.models.response import FaultSpec
from gridplace.models.sensitivity import PerturbationParams, SusceptibilityReport
from gridplace.models.spectrum import Spectrum
from gridplace.models.trajectory import Trajectory
from gridplace.schemas.report import (
    CurvePoint,
    MeasureReport,
    MeasureRow,
    PlacementDocument,
    SimulationSidecar,
    ValidationReport,
    VulnerabilityReport,
)
from gridplace.services.grid import GridService
from gridplace.services.oracle import OracleService
from gridplace.services.placement import PlacementService
from gridplace.services.response import ResponseService
from gridplace.services.sensitivity import SensitivityService
from gridplace.services.spectral import SpectralService
from gridplace.utils.concurrency import map_parallel
from gridplace.utils.exceptions import DimensionMismatchError, InvalidParameterError, UnknownBusError

logger = logging.getLogger(__name__)

# Relative spread tolerated before parameters count as inhomogeneous
HOMOGENEITY_RTOL = 1e-9


class AnalysisService:
    """
    Service composing the numerical services into the command pipelines.
    """

    def __init__(self, settings: Optional[Settings] = None, threads: Optional[int] = None):
        self.settings = settings or get_settings()
        self.threads = threads
        self.grid_service = GridService(self.settings)
        self.spectral = SpectralService(self.settings)
        self.response = ResponseService(self.settings)
        self.sensitivity = SensitivityService(self.settings)
        self.placement = PlacementService(self.settings)
        self.oracle = OracleService(self.settings)

    # Preparation

    def prepare(
        self,
        grid: GridModel,
        homogenize: bool = False,
        kron: bool = False,
        angles: Optional[AnglesSolution] = None,
    ) -> OperatingPoint:
        """Optionally homogenize, solve the power flow and linearize."""
        if homogenize:
            grid = self.grid_service.homogenize(grid)
        return self.grid_service.operating_point(grid, angles, kron=kron)

    def baseline(self, op: OperatingPoint, gamma: Optional[float] = None) -> Tuple[float, float]:
        """
        Homogeneous (m, gamma) of an operating point.

        Raises:
            InvalidParameterError: If inertia varies, or damping ratios vary and no gamma is given
        """
        inertia = np.asarray(op.inertia)
        if not np.allclose(inertia, inertia[0], rtol=HOMOGENEITY_RTOL, atol=0.0):
            raise InvalidParameterError("inertia", "inertia is not homogeneous; use --homogenize")
        return float(inertia[0]), self.resolve_gamma(op, gamma)

    def resolve_gamma(self, op: OperatingPoint, gamma: Optional[float] = None) -> float:
        """Explicit gamma, or the common damping ratio of the operating point."""
        if gamma is not None:
            if gamma <= 0:
                raise InvalidParameterError("gamma", f"must be > 0, got {gamma}")
            return float(gamma)
        if np.any(np.asarray(op.inertia) <= 0):
            raise InvalidParameterError("inertia", "all buses need inertia > 0; use --kron")
        ratios = np.asarray(op.damping_ratio)
        if not np.allclose(ratios, ratios[0], rtol=HOMOGENEITY_RTOL, atol=0.0):
            raise InvalidParameterError("gamma", "damping ratios are not homogeneous; pass --gamma or use --homogenize")
        if ratios[0] <= 0:
            raise InvalidParameterError("gamma", "damping ratio must be > 0")
        return float(ratios[0])

    def resolve_buses(self, op: OperatingPoint, bus_ids: Optional[Sequence[str]] = None) -> List[int]:
        """Positions of the requested buses, or of every generator."""
        if bus_ids:
            positions = []
            for bus_id in bus_ids:
                if bus_id not in op.bus_ids:
                    raise UnknownBusError(bus_id)
                positions.append(op.position(bus_id))
            return positions
        generators = np.flatnonzero(op.generators).tolist()
        if not generators:
            raise InvalidParameterError("buses", "grid has no generator buses")
        return generators

    # Commands

    def validate(self, grid: GridModel, kron: bool = False) -> ValidationReport:
        """Power flow and spectral diagnostics."""
        angles = self.grid_service.solve_power_flow(grid)
        op = self.grid_service.operating_point(grid, angles, kron=kron)
        spectrum = self.spectral.eigendecompose(op.laplacian)
        differences = [
            abs(angles.theta[grid.index[line.source]] - angles.theta[grid.index[line.target]]) for line in grid.lines
        ]
        return ValidationReport(
            settings=self._settings_echo(),
            n=grid.n,
            lines=len(grid.lines),
            generators=int(np.sum(grid.generators)),
            connected=True,
            algebraic_connectivity=spectrum.algebraic_connectivity,
            degenerate=spectrum.degenerate,
            min_gap=spectrum.min_gap if np.isfinite(spectrum.min_gap) else -1.0,
            max_angle_difference=float(max(differences, default=0.0)),
            power_flow_iterations=angles.iterations,
        )

    def power_flow_frame(self, grid: GridModel) -> pd.DataFrame:
        angles = self.grid_service.solve_power_flow(grid)
        return pd.DataFrame({"bus": grid.bus_ids, "power": grid.power, "theta": angles.theta})

    def spectrum(self, op: OperatingPoint, weighted: bool = False) -> Spectrum:
        """Spectrum of L, or of L_M when weighted."""
        if weighted:
            matrix = self.spectral.weighted_laplacian(op.laplacian, op.inertia)
            return self.spectral.eigendecompose(matrix, inertia=op.inertia)
        return self.spectral.eigendecompose(op.laplacian)

    def measure(
        self,
        op: OperatingPoint,
        gamma: Optional[float] = None,
        delta_p: float = 1.0,
        bus_ids: Optional[Sequence[str]] = None,
        method: str = "closed",
        dt: Optional[float] = None,
    ) -> MeasureReport:
        """
        M_b per fault bus, sorted ascending.
        The closed form assumes a homogeneous damping ratio; the oracle uses d_i = gamma m_i.
        """
        gamma = self.resolve_gamma(op, gamma)
        positions = self.resolve_buses(op, bus_ids)
        spectrum = self.spectrum(op, weighted=True)
        damping = gamma * np.asarray(op.inertia)

        closed = {}
        if method in ("closed", "both"):
            for position in positions:
                fault = FaultSpec(position, delta_p)
                closed[position] = self.response.measure_closed_form(spectrum, op.inertia[position], gamma, fault)

        numeric = {}
        if method in ("oracle", "both"):
            faults = [FaultSpec(position, delta_p) for position in positions]
            estimates = self.oracle.oracle_measures(op.laplacian, op.inertia, damping, faults, dt)
            numeric = {position: estimate.value for position, estimate in zip(positions, estimates)}

        rows = []
        for position in positions:
            value = closed[position] if position in closed else numeric[position]
            oracle = numeric[position] if method == "both" else None
            discrepancy = None
            if oracle is not None:
                discrepancy = abs(value - oracle) / abs(value) if value else abs(oracle)
            rows.append(
                MeasureRow(
                    bus=op.bus_ids[position],
                    delta_p=delta_p,
                    measure=value,
                    method=method,
                    oracle=oracle,
                    discrepancy=discrepancy,
                )
            )
        rows.sort(key=lambda row: (row.measure, row.bus))
        logger.info(f"Measured {len(rows)} fault locations with method {method}")
        return MeasureReport(settings=self._settings_echo(), gamma=gamma, rows=rows)

    def sensitivities(
        self,
        op: OperatingPoint,
        mu: float,
        g: float,
        gamma: Optional[float] = None,
        delta_p: float = 1.0,
        bus_ids: Optional[Sequence[str]] = None,
        include_zero_mode: Optional[bool] = None,
    ) -> Tuple[List[SusceptibilityReport], pd.DataFrame, pd.DataFrame]:
        """
        Susceptibilities for every fault bus, as reports plus the per-fault and aggregate tables.
        """
        m, gamma = self.baseline(op, gamma)
        params = PerturbationParams(m=m, gamma=gamma, mu=mu, g=g, n=op.n)
        spectrum = self.spectrum(op)
        positions = self.resolve_buses(op, bus_ids)
        reports = self.sensitivity.susceptibility_sweep(
            spectrum, params, positions, delta_p, include_zero_mode, self.threads
        )

        rows = []
        for report in reports:
            for i, bus_id in enumerate(op.bus_ids):
                rows.append(
                    {
                        "fault_bus": op.bus_ids[report.fault.bus],
                        "bus": bus_id,
                        "rho": report.rho[i],
                        "alpha_term1": report.alpha_term1[i],
                        "alpha_term2": report.alpha_term2[i],
                        "alpha": report.alpha[i],
                    }
                )
        gradient_r, gradient_a = self.sensitivity.aggregate_susceptibilities(reports)
        aggregate = pd.DataFrame({"bus": op.bus_ids, "dV_dr": gradient_r, "dV_da": gradient_a})
        return reports, pd.DataFrame(rows), aggregate

    def optimize(
        self,
        op: OperatingPoint,
        target: str,
        weighting: str = "uniform",
        m_thres: Optional[float] = None,
        mu: float = 0.1,
        g: float = 0.1,
        gamma: Optional[float] = None,
        delta_p: float = 1.0,
        include_zero_mode: Optional[bool] = None,
    ) -> Tuple[PlacementResult, pd.DataFrame]:
        """Aggregate the susceptibilities with the chosen weights and place."""
        m, gamma = self.baseline(op, gamma)
        params = PerturbationParams(m=m, gamma=gamma, mu=mu, g=g, n=op.n)
        spectrum = self.spectrum(op)
        positions = self.resolve_buses(op)

        eta = self._weights(spectrum, gamma, positions, weighting, m_thres, delta_p)
        reports = self.sensitivity.susceptibility_sweep(
            spectrum, params, positions, delta_p, include_zero_mode, self.threads
        )
        rho_agg, alpha_agg = self.sensitivity.aggregate_susceptibilities(reports, eta)
        result = self.placement.placement_for_target(target, rho_agg, alpha_agg, WeightingKind(weighting))

        frame = pd.DataFrame(
            {"bus": op.bus_ids, "rho_agg": rho_agg, "alpha_agg": alpha_agg, "r": result.r, "a": result.a}
        )
        logger.info(f"Placement {result.algorithm.value} with {weighting} weighting: objective {result.objective_linear:.6e}")
        return result, frame

    def report_vulnerability(
        self,
        op: OperatingPoint,
        placement: PlacementDocument,
        mu: float,
        g: float,
        gamma: Optional[float] = None,
        delta_p: float = 1.0,
        weighting: Optional[str] = None,
        m_thres: Optional[float] = None,
        per_fault: bool = False,
        dt: Optional[float] = None,
        include_zero_mode: Optional[bool] = None,
    ) -> VulnerabilityReport:
        """
        Oracle-evaluated M_b before and after applying a placement at amplitudes (mu, g).

        Raises:
            DimensionMismatchError: If the placement does not match the grid size
        """
        if len(placement.r) != op.n:
            raise DimensionMismatchError("placement", op.n, len(placement.r))
        if placement.bus_ids and tuple(placement.bus_ids) != tuple(op.bus_ids):
            raise InvalidParameterError("placement", "bus ids differ from the grid")

        m, gamma = self.baseline(op, gamma)
        positions = self.resolve_buses(op)
        weighting = weighting or placement.weighting or WeightingKind.UNIFORM.value
        spectrum = self.spectrum(op)
        eta = self._weights(spectrum, gamma, positions, weighting, m_thres, delta_p)

        homogeneous = PerturbationParams(m=m, gamma=gamma, n=op.n)
        applied = PerturbationParams(m=m, gamma=gamma, mu=mu, g=g, r=placement.r, a=placement.a)
        before = self._oracle_measures(op, homogeneous, positions, delta_p, dt)
        after = self._oracle_measures(op, applied, positions, delta_p, dt)

        total_before = self.sensitivity.vulnerability(before, eta)
        total_after = self.sensitivity.vulnerability(after, eta)
        strongest = int(np.argmax(before))

        per_fault_curve = None
        if per_fault:
            per_fault_curve = sorted(
                self._per_fault_best(op, spectrum, m, gamma, mu, g, positions, delta_p, placement, dt, include_zero_mode)
            )

        return VulnerabilityReport(
            settings=self._settings_echo(),
            mu=mu,
            g=g,
            weighting=weighting,
            curve_before=sorted(before.tolist()),
            curve_after=sorted(after.tolist()),
            per_fault=[
                CurvePoint(bus=op.bus_ids[position], before=float(b), after=float(a))
                for position, b, a in zip(positions, before, after)
            ],
            vulnerability_before=total_before,
            vulnerability_after=total_after,
            reduction_percent=self._percent(total_before, total_after),
            strongest_fault_reduction_percent=self._percent(before[strongest], after[strongest]),
            per_fault_best_curve=per_fault_curve,
        )

    def simulate(
        self,
        op: OperatingPoint,
        bus_id: str,
        delta_p: float = 1.0,
        gamma: Optional[float] = None,
        dt: Optional[float] = None,
        horizon: Optional[float] = None,
    ) -> Tuple[Trajectory, SimulationSidecar]:
        """
        Oracle trajectory for one fault. Uses the grid's own damping unless gamma is given.
        """
        position = self.resolve_buses(op, [bus_id])[0]
        damping = np.asarray(op.damping) if gamma is None else gamma * np.asarray(op.inertia)
        trajectory, estimate = self.oracle.simulate(op.laplacian, op.inertia, damping, FaultSpec(position, delta_p), dt, horizon)
        sidecar = SimulationSidecar(
            settings=self._settings_echo(),
            fault_bus=bus_id,
            delta_p=delta_p,
            dt=trajectory.dt,
            horizon=trajectory.horizon,
            samples=trajectory.times.size,
            measure=estimate.value,
            tail_bound=estimate.tail_bound,
        )
        return trajectory, sidecar

    def modal_frame(self, op: OperatingPoint, bus_id: str, gamma: float, times: np.ndarray, delta_p: float = 1.0) -> pd.DataFrame:
        """Closed-form modal velocities xi_dot_2 ... xi_dot_N at the given times."""
        position = self.resolve_buses(op, [bus_id])[0]
        spectrum = self.spectrum(op, weighted=True)
        drive = self.response.modal_drive(spectrum, op.inertia, gamma, FaultSpec(position, delta_p))
        velocity = self.response.homogeneous_modal_velocity(drive, gamma, times)
        frame = pd.DataFrame(velocity[:, 1:], columns=[f"xi_dot_{alpha}" for alpha in range(2, op.n + 1)])
        frame.insert(0, "t", times)
        return frame

    # Private helpers

    def _weights(
        self,
        spectrum: Spectrum,
        gamma: float,
        positions: Sequence[int],
        weighting: str,
        m_thres: Optional[float],
        delta_p: float,
    ) -> np.ndarray:
        m0 = self.response.measures_all(spectrum, np.ones(spectrum.n), gamma, delta_p)[list(positions)]
        return self.placement.weight_scheme(weighting, m0, m_thres)

    def _oracle_measures(
        self,
        op: OperatingPoint,
        params: PerturbationParams,
        positions: Sequence[int],
        delta_p: float,
        dt: Optional[float],
    ) -> np.ndarray:
        inertia, damping = self.oracle.perturbed_system(params)
        faults = [FaultSpec(position, delta_p) for position in positions]
        estimates = self.oracle.oracle_measures(op.laplacian, inertia, damping, faults, dt)
        return np.array([estimate.value for estimate in estimates])

    def _per_fault_best(
        self,
        op: OperatingPoint,
        spectrum: Spectrum,
        m: float,
        gamma: float,
        mu: float,
        g: float,
        positions: Sequence[int],
        delta_p: float,
        placement: PlacementDocument,
        dt: Optional[float],
        include_zero_mode: Optional[bool],
    ) -> List[float]:
        """M_b when the placement of the same target is optimized for fault b alone."""
        params = PerturbationParams(m=m, gamma=gamma, mu=mu, g=g, n=op.n)
        target = Algorithm(placement.algorithm)

        def evaluate(position: int) -> float:
            report = self.sensitivity.susceptibility_report(spectrum, params, FaultSpec(position, delta_p), include_zero_mode)
            result = self.placement.placement_for_target(target, report.rho, report.alpha)
            applied = PerturbationParams(m=m, gamma=gamma, mu=mu, g=g, r=result.r, a=result.a)
            inertia, damping = self.oracle.perturbed_system(applied)
            return self.oracle.oracle_measure(op.laplacian, inertia, damping, FaultSpec(position, delta_p), dt).value

        return map_parallel(evaluate, positions, self.threads)

    def _settings_echo(self) -> Dict[str, float]:
        keys = (
            "power_flow_tolerance",
            "zero_mode_tolerance",
            "degeneracy_tolerance",
            "oracle_max_dt",
            "oracle_horizon_factor",
            "oracle_tail_tolerance",
            "fd_step",
        )
        return {key: float(getattr(self.settings, key)) for key in keys}

    @staticmethod
    def _percent(before: float, after: float) -> float:
        return 100.0 * (before - after) / before if before else 0.0
