"""
Custom exception classes for gridplace.
Every failure carries a stable error code and the process exit code the CLI reports.
"""

from typing import Any, Dict, Iterable, List, Optional


EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class GridPlaceError(Exception):
    """Base exception class."""

    exit_code: int = EXIT_NUMERICAL_ERROR

    def __init__(
        self,
        detail: str,
        error_code: Optional[str] = None,
        details: Optional[List[Dict[str, Any]]] = None,
    ):
        super().__init__(detail)
        self.detail = detail
        self.error_code = error_code or "GRIDPLACE_ERROR"
        self.details = details or []


class UserInputError(GridPlaceError):
    """Invalid input supplied by the user (exit code 2)."""

    exit_code = EXIT_USER_ERROR


class NumericalError(GridPlaceError):
    """Numerical failure of an otherwise valid computation (exit code 3)."""

    exit_code = EXIT_NUMERICAL_ERROR


# Grid input errors
class GridParseError(UserInputError):
    """Grid document could not be parsed."""

    def __init__(self, detail: str, details: Optional[List[Dict[str, Any]]] = None):
        super().__init__(f"Grid parse error: {detail}", "PARSE_ERROR", details)


class DuplicateBusError(UserInputError):
    """Bus identifier appears more than once."""

    def __init__(self, bus_id: str):
        super().__init__(f"Bus with identifier '{bus_id}' already exists", "DUPLICATE_BUS")
        self.bus_id = bus_id


class DisconnectedGridError(UserInputError):
    """Underlying graph has more than one component."""

    def __init__(self, components: int):
        super().__init__(f"Grid is disconnected ({components} components)", "DISCONNECTED_GRID")
        self.components = components


class UnbalancedInjectionError(UserInputError):
    """Power injections do not sum to zero."""

    def __init__(self, imbalance: float, tolerance: float):
        super().__init__(
            f"Power injections unbalanced: sum P = {imbalance:.3e} exceeds {tolerance:.1e}",
            "UNBALANCED_INJECTIONS",
        )
        self.imbalance = imbalance


class UnknownBusError(UserInputError):
    """Referenced bus does not exist."""

    def __init__(self, bus: Any):
        super().__init__(f"Bus not found with ID: {bus}", "UNKNOWN_BUS")
        self.bus = bus


class DimensionMismatchError(UserInputError):
    """Vector or matrix sizes disagree."""

    def __init__(self, what: str, expected: int, actual: int):
        super().__init__(f"{what} has size {actual}, expected {expected}", "DIMENSION_MISMATCH")


class MissingThresholdError(UserInputError):
    """Threshold weighting requested without a threshold value."""

    def __init__(self):
        super().__init__("Threshold weighting requires m_thres", "MISSING_THRESHOLD")


class ZeroInertiaError(UserInputError):
    """Inertia weighting requires strictly positive inertia."""

    def __init__(self, buses: Iterable[int]):
        buses = list(buses)
        super().__init__(f"Non-positive inertia at bus positions {buses}", "ZERO_INERTIA")
        self.buses = buses


class NotSymmetricError(UserInputError):
    """Matrix is not symmetric within tolerance."""

    def __init__(self, asymmetry: float):
        super().__init__(f"Matrix is not symmetric (max |A - A^T| = {asymmetry:.3e})", "NOT_SYMMETRIC")


class InvalidParameterError(UserInputError):
    """Parameter outside its documented range."""

    def __init__(self, name: str, detail: str):
        super().__init__(f"Invalid parameter '{name}': {detail}", "INVALID_PARAMETER")
        self.name = name


class StepTooLargeError(UserInputError):
    """Integrator step does not resolve the fastest mode."""

    def __init__(self, dt: float, limit: float):
        super().__init__(f"Step dt={dt:.3e} s exceeds resolution limit {limit:.3e} s", "STEP_TOO_LARGE")


# Numerical failures
class NoConvergenceError(NumericalError):
    """Iterative solver exceeded its iteration budget."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Power flow did not converge in {iterations} iterations (mismatch {residual:.3e})",
            "NO_CONVERGENCE",
        )
        self.iterations = iterations
        self.residual = residual


class UnstableBranchError(NumericalError):
    """Solution lies outside the stable branch |dtheta| < pi/2."""

    def __init__(self, line: str, angle: float):
        super().__init__(f"Line {line} has angle difference {angle:.4f} rad >= pi/2", "UNSTABLE_BRANCH")


class SingularEliminationBlockError(NumericalError):
    """Schur complement block of eliminated buses is singular."""

    def __init__(self, condition: float):
        super().__init__(f"Elimination block is singular (condition number {condition:.3e})", "SINGULAR_ELIMINATION_BLOCK")


class MultipleZeroModesError(NumericalError):
    """More than one vanishing eigenvalue, the graph is disconnected."""

    def __init__(self, count: int):
        super().__init__(f"Spectrum has {count} zero modes; graph is disconnected", "MULTIPLE_ZERO_MODES")


class MissingZeroModeError(NumericalError):
    """Smallest eigenvalue is not zero, the matrix is not a Laplacian."""

    def __init__(self, smallest: float):
        super().__init__(f"Smallest eigenvalue {smallest:.3e} is not a zero mode", "MISSING_ZERO_MODE")


class OverdampedModeError(NumericalError):
    """Some mode violates 4 lambda > gamma^2."""

    def __init__(self, modes: Iterable[int]):
        modes = list(modes)
        super().__init__(f"Overdamped modes (1-based): {modes}", "OVERDAMPED_MODE")
        self.modes = modes


class DegenerateSpectrumError(NumericalError):
    """Non-degenerate perturbation theory is not applicable."""

    def __init__(self, min_gap: float, threshold: float):
        super().__init__(
            f"Spectrum is degenerate (min gap {min_gap:.3e} < {threshold:.3e})",
            "DEGENERATE_SPECTRUM",
        )


class HorizonTooShortError(NumericalError):
    """Integrand has not decayed at the simulation horizon."""

    def __init__(self, horizon: float, ratio: float):
        super().__init__(
            f"Horizon {horizon:.2f} s too short: tail/peak ratio {ratio:.3e}",
            "HORIZON_TOO_SHORT",
        )
        self.horizon = horizon


class NoFeasiblePairError(NumericalError):
    """Combined placement found no opposite-signed pair to zero."""

    def __init__(self, n: int, candidates: int):
        super().__init__(
            f"No opposite-signed pair among {candidates} candidates (sum r*a = {n})",
            "NO_FEASIBLE_PAIR",
        )
