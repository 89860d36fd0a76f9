"""
Grid service: loading, validation and preprocessing of lossless networks.
Solves the sine power flow, builds the operating-point Laplacian, Kron-reduces and homogenizes.
"""

from fractions import Fraction
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError as PydanticValidationError
import scipy.linalg

from gridplace.config import Settings, get_settings
from gridplace.models.grid import AnglesSolution, Bus, GridModel, KronReduction, Line, OperatingPoint
from gridplace.schemas.grid import GridDocument
from gridplace.services.error_handler import ErrorHandlerService
from gridplace.utils.exceptions import (
    DisconnectedGridError,
    DuplicateBusError,
    GridParseError,
    InvalidParameterError,
    NoConvergenceError,
    SingularEliminationBlockError,
    UnbalancedInjectionError,
    UnknownBusError,
    UnstableBranchError,
    ZeroInertiaError,
)

logger = logging.getLogger(__name__)

GridSource = Union[str, Path, Dict[str, Any], GridDocument]

# Condition number above which the eliminated block counts as singular
SINGULAR_CONDITION = 1e12


class GridService:
    """
    Service for grid construction and static preprocessing.
    Every returned GridModel is connected, has unique bus ids and balanced injections.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def load_grid(self, source: GridSource) -> GridModel:
        """
        Load and validate a grid from JSON text, a file path, a dict or a parsed document.

        Args:
            source: Grid JSON text, path to a JSON file, mapping or GridDocument

        Returns:
            Validated GridModel

        Raises:
            GridParseError: If the document is malformed or violates the schema
            DuplicateBusError: If a bus id repeats
            DisconnectedGridError: If the network has several components
            UnbalancedInjectionError: If |sum P| exceeds the rebalancing tolerance
        """
        document = self._parse(source)
        return self.build_grid(document)

    def build_grid(self, document: GridDocument) -> GridModel:
        """
        Turn a schema-valid document into a GridModel, checking the network invariants.
        Parallel lines are merged by summing susceptances.
        """
        buses = []
        seen = set()
        for entry in document.buses:
            if entry.id in seen:
                raise DuplicateBusError(entry.id)
            seen.add(entry.id)
            buses.append(
                Bus(
                    id=entry.id,
                    power=entry.power,
                    inertia=entry.inertia,
                    damping=entry.damping,
                    is_generator=entry.is_generator,
                )
            )

        merged: Dict[tuple, Line] = {}
        for entry in document.lines:
            for endpoint in (entry.source, entry.target):
                if endpoint not in seen:
                    raise UnknownBusError(endpoint)
            line = Line(entry.source, entry.target, entry.susceptance)
            if line.key in merged:
                previous = merged[line.key]
                logger.warning(f"Merging parallel lines between {line.key[0]} and {line.key[1]}")
                line = Line(previous.source, previous.target, previous.susceptance + line.susceptance)
            merged[line.key] = line

        graph = nx.Graph()
        graph.add_nodes_from(bus.id for bus in buses)
        graph.add_edges_from(line.key for line in merged.values())
        components = nx.number_connected_components(graph)
        if components > 1:
            raise DisconnectedGridError(components)

        buses = self._balance(buses)
        grid = GridModel(buses=tuple(buses), lines=tuple(merged.values()), base_mva=document.base_mva)
        logger.info(f"Grid loaded: {grid.n} buses, {len(grid.lines)} lines")
        return grid

    def solve_power_flow(
        self,
        grid: GridModel,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
    ) -> AnglesSolution:
        """
        Solve P_i = sum_j B_ij sin(theta_i - theta_j) by damped Newton iteration from flat angles.

        Args:
            grid: Validated grid
            tol: Bound on the max power mismatch
            max_iter: Iteration cap

        Returns:
            Zero-mean angles on the stable branch

        Raises:
            NoConvergenceError: If the mismatch stays above tol after max_iter iterations
            UnstableBranchError: If some line carries |dtheta| >= pi/2 at the solution
        """
        tol = self.settings.power_flow_tolerance if tol is None else tol
        max_iter = self.settings.power_flow_max_iter if max_iter is None else max_iter
        if tol <= 0:
            raise InvalidParameterError("tol", f"must be > 0, got {tol}")

        power = np.array(grid.power)
        if not np.any(power):
            return AnglesSolution.flat(grid.n)

        susceptance = grid.susceptance_matrix()
        theta = np.zeros(grid.n)
        residual = self._mismatch(susceptance, power, theta)
        norm = float(np.max(np.abs(residual)))

        for iteration in range(1, max_iter + 1):
            jacobian = self._laplacian(susceptance, theta)
            step = scipy.linalg.lstsq(jacobian, residual)[0]
            step -= step.mean()

            # Backtracking on the max-norm mismatch
            scale = 1.0
            while True:
                candidate = theta + scale * step
                candidate_residual = self._mismatch(susceptance, power, candidate)
                candidate_norm = float(np.max(np.abs(candidate_residual)))
                if candidate_norm < (1.0 - 1e-4 * scale) * norm or scale < 1.0 / 1024:
                    break
                scale /= 2.0

            theta, residual, norm = candidate, candidate_residual, candidate_norm
            logger.debug(f"Power flow iteration {iteration}: mismatch {norm:.3e}, step scale {scale}")

            if norm <= tol:
                theta -= theta.mean()
                self._check_stable_branch(grid, theta)
                return AnglesSolution(theta=theta, residual_norm=norm, iterations=iteration)

        raise NoConvergenceError(max_iter, norm)

    def build_laplacian(self, grid: GridModel, angles: AnglesSolution) -> np.ndarray:
        """
        Operating-point Laplacian L_ij = -B_ij cos(theta_i - theta_j), zero row sums.
        """
        return self._laplacian(grid.susceptance_matrix(), np.asarray(angles.theta))

    def kron_reduce(
        self,
        grid: GridModel,
        angles: AnglesSolution,
        retained: Iterable[str],
    ) -> KronReduction:
        """
        Eliminate every bus not in `retained` through the Schur complement.

        Args:
            grid: Validated grid
            angles: Power flow solution on grid
            retained: Bus ids to keep; grid order is preserved

        Returns:
            KronReduction with the reduced Laplacian and injections

        Raises:
            UnknownBusError: If a retained id is not in the grid
            SingularEliminationBlockError: If L_ee is singular
        """
        keep = set(retained)
        if not keep:
            raise InvalidParameterError("retained", "at least one bus must be retained")
        for bus_id in keep:
            if bus_id not in grid.index:
                raise UnknownBusError(bus_id)

        laplacian = self.build_laplacian(grid, angles)
        power = np.array(grid.power)
        kept = [i for i, bus in enumerate(grid.buses) if bus.id in keep]
        dropped = [i for i, bus in enumerate(grid.buses) if bus.id not in keep]
        bus_ids = tuple(grid.buses[i].id for i in kept)

        if not dropped:
            return KronReduction(laplacian=laplacian, injections=power, bus_ids=bus_ids)

        l_rr = laplacian[np.ix_(kept, kept)]
        l_re = laplacian[np.ix_(kept, dropped)]
        l_ee = laplacian[np.ix_(dropped, dropped)]
        condition = float(np.linalg.cond(l_ee))
        if not np.isfinite(condition) or condition > SINGULAR_CONDITION:
            raise SingularEliminationBlockError(condition)

        solved = scipy.linalg.solve(l_ee, np.column_stack([l_re.T, power[dropped]]), assume_a="sym")
        reduced = l_rr - l_re @ solved[:, :-1]
        reduced = 0.5 * (reduced + reduced.T)
        # Restore exact zero row sums lost to rounding
        np.fill_diagonal(reduced, 0.0)
        np.fill_diagonal(reduced, -reduced.sum(axis=1))
        injections = power[kept] - l_re @ solved[:, -1]

        logger.info(f"Kron reduction eliminated {len(dropped)} buses, {len(kept)} retained")
        return KronReduction(laplacian=reduced, injections=injections, bus_ids=bus_ids)

    def homogenize(self, grid: GridModel) -> GridModel:
        """
        Assign the mean inertia and mean damping of the input to every bus.

        Totals are conserved bit for bit as correctly rounded sums (math.fsum) of the
        stored values: every bus gets the correctly rounded mean except the last, which
        absorbs the rounding residual of the others.
        """
        inertia = [bus.inertia for bus in grid.buses]
        damping = [bus.damping for bus in grid.buses]
        if len(set(inertia)) == 1 and len(set(damping)) == 1:
            return grid

        spread_inertia = self._spread(inertia)
        spread_damping = self._spread(damping)
        mean_inertia, mean_damping = spread_inertia[0], spread_damping[0]
        buses = [
            Bus(
                id=bus.id,
                power=bus.power,
                inertia=m,
                damping=d,
                is_generator=bus.is_generator,
            )
            for bus, m, d in zip(grid.buses, spread_inertia, spread_damping)
        ]
        logger.info(f"Homogenized grid: m = {mean_inertia:.6g}, d = {mean_damping:.6g}")
        return grid.with_buses(buses)

    def operating_point(
        self,
        grid: GridModel,
        angles: Optional[AnglesSolution] = None,
        kron: bool = False,
    ) -> OperatingPoint:
        """
        Linearize the grid at its power flow solution.

        Args:
            grid: Validated grid
            angles: Power flow solution, solved here when omitted
            kron: Eliminate inertialess buses first

        Returns:
            OperatingPoint over all buses, or over the inertial buses when kron is set
        """
        angles = angles or self.solve_power_flow(grid)
        if kron:
            return self.reduce_inertialess(grid, angles)

        return OperatingPoint(
            bus_ids=grid.bus_ids,
            laplacian=self.build_laplacian(grid, angles),
            inertia=grid.inertia,
            damping=grid.damping,
            injections=grid.power,
            generators=grid.generators,
        )

    def reduce_inertialess(self, grid: GridModel, angles: AnglesSolution) -> OperatingPoint:
        """Kron-reduce away every bus with zero inertia."""
        retained = [bus for bus in grid.buses if bus.inertia > 0]
        if not retained:
            raise ZeroInertiaError(range(grid.n))

        dropped_damping = sum(bus.damping for bus in grid.buses if bus.inertia == 0)
        if dropped_damping > 0:
            logger.warning(f"Damping {dropped_damping:.4g} MW s at inertialess buses is dropped by the reduction")

        reduction = self.kron_reduce(grid, angles, [bus.id for bus in retained])
        return OperatingPoint(
            bus_ids=reduction.bus_ids,
            laplacian=reduction.laplacian,
            inertia=[bus.inertia for bus in retained],
            damping=[bus.damping for bus in retained],
            injections=reduction.injections,
            generators=[bus.is_generator for bus in retained],
        )

    # Private helpers

    @staticmethod
    def _spread(values: List[float]) -> List[float]:
        """Mean on every entry, last entry corrected until math.fsum matches the input total."""
        if len(set(values)) == 1:
            return list(values)
        n = len(values)
        total = math.fsum(values)
        mean = float(sum(Fraction(x) for x in values) / n)
        spread = [mean] * n
        spread[-1] = float(Fraction(total) - (n - 1) * Fraction(mean))
        while math.fsum(spread) != total:
            spread[-1] = float(np.nextafter(spread[-1], -np.inf if math.fsum(spread) > total else np.inf))
        return spread

    def _parse(self, source: GridSource) -> GridDocument:
        """Parse any supported source into a GridDocument."""
        if isinstance(source, GridDocument):
            return source
        try:
            if isinstance(source, dict):
                return GridDocument.model_validate(source)
            if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
                path = Path(source)
                try:
                    text = path.read_text(encoding="utf-8")
                except OSError as e:
                    raise GridParseError(f"cannot read {path}: {e.strerror or e}")
            else:
                text = str(source)
            return GridDocument.model_validate(json.loads(text))
        except json.JSONDecodeError as e:
            raise GridParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
        except PydanticValidationError as e:
            details = ErrorHandlerService.validation_details(e)
            raise GridParseError(f"{len(details)} schema violation(s)", details)

    def _balance(self, buses):
        """Accept, rebalance or reject the injection imbalance."""
        imbalance = float(sum(bus.power for bus in buses))
        if abs(imbalance) <= self.settings.balance_tolerance:
            return buses
        if abs(imbalance) > self.settings.rebalance_tolerance:
            raise UnbalancedInjectionError(imbalance, self.settings.rebalance_tolerance)

        shift = imbalance / len(buses)
        logger.warning(f"Rebalancing injections: sum P = {imbalance:.3e} spread over {len(buses)} buses")
        return [
            Bus(
                id=bus.id,
                power=bus.power - shift,
                inertia=bus.inertia,
                damping=bus.damping,
                is_generator=bus.is_generator,
            )
            for bus in buses
        ]

    @staticmethod
    def _laplacian(susceptance: np.ndarray, theta: np.ndarray) -> np.ndarray:
        weights = susceptance * np.cos(theta[:, None] - theta[None, :])
        np.fill_diagonal(weights, 0.0)
        return np.diag(weights.sum(axis=1)) - weights

    @staticmethod
    def _mismatch(susceptance: np.ndarray, power: np.ndarray, theta: np.ndarray) -> np.ndarray:
        flows = susceptance * np.sin(theta[:, None] - theta[None, :])
        return power - flows.sum(axis=1)

    @staticmethod
    def _check_stable_branch(grid: GridModel, theta: np.ndarray) -> None:
        for line in grid.lines:
            angle = abs(theta[grid.index[line.source]] - theta[grid.index[line.target]])
            if angle >= np.pi / 2:
                raise UnstableBranchError(f"{line.source}-{line.target}", float(angle))
