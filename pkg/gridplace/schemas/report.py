"""
Pydantic schemas for the JSON reports written by the command line.
All reports carry a format_version field.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ReportBase(BaseModel):
    """Fields shared by every report."""

    format_version: str = Field("1", description="Report format version")
    generated_by: str = Field("gridplace", description="Tool name and version")
    settings: Dict[str, float] = Field(default_factory=dict, description="Numerical settings in effect")


class MeasureRow(BaseModel):
    """One fault location."""

    bus: str
    delta_p: float
    measure: float
    method: Literal["closed", "oracle", "both"]
    oracle: Optional[float] = None
    discrepancy: Optional[float] = Field(None, description="|closed - oracle| / |closed|")


class MeasureReport(ReportBase):
    """Per-bus measures sorted ascending."""

    gamma: float
    rows: List[MeasureRow]


class ValidationReport(ReportBase):
    """Diagnostics printed by `validate`."""

    n: int
    lines: int
    generators: int
    connected: bool
    algebraic_connectivity: float
    degenerate: bool
    min_gap: float
    max_angle_difference: float
    power_flow_iterations: int


class PlacementDocument(ReportBase):
    """Placement result file, also read back by `report`."""

    model_config = ConfigDict(extra="ignore")

    algorithm: Literal["inertia", "damping", "combined"]
    weighting: Optional[Literal["uniform", "squared", "threshold"]] = None
    r: List[float]
    a: List[float]
    objective_linear: float = 0.0
    residuals: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    iterations: int = 0
    bus_ids: List[str] = Field(default_factory=list)

    @field_validator("r", "a")
    @classmethod
    def validate_box(cls, v):
        """Shapes are bounded by |x_i| <= 1."""
        if any(abs(x) > 1 for x in v):
            raise ValueError("Shape entries must satisfy |x_i| <= 1")
        return v

    @model_validator(mode="after")
    def validate_lengths(self):
        """r and a describe the same buses."""
        if len(self.r) != len(self.a):
            raise ValueError(f"r has {len(self.r)} entries but a has {len(self.a)}")
        if self.bus_ids and len(self.bus_ids) != len(self.r):
            raise ValueError("bus_ids must match the shape length")
        return self


class CurvePoint(BaseModel):
    bus: str
    before: float
    after: float


class VulnerabilityReport(ReportBase):
    """Before/after measures of a placement evaluated by the oracle."""

    mu: float
    g: float
    weighting: str
    curve_before: List[float] = Field(..., description="Sorted M_b of the homogeneous grid")
    curve_after: List[float] = Field(..., description="Sorted M_b with the placement applied")
    per_fault: List[CurvePoint]
    vulnerability_before: float
    vulnerability_after: float
    reduction_percent: float
    strongest_fault_reduction_percent: float
    per_fault_best_curve: Optional[List[float]] = Field(
        None, description="Sorted M_b when each fault gets its own optimal placement"
    )


class SimulationSidecar(ReportBase):
    """Integrator settings stored next to a trajectory CSV."""

    fault_bus: str
    delta_p: float
    dt: float
    horizon: float
    samples: int
    measure: float
    tail_bound: float


# Column documentation printed by --schema
CSV_COLUMNS: Dict[str, Dict[str, str]] = {
    "powerflow": {
        "bus": "Bus id",
        "power": "Balanced net injection P_i",
        "theta": "Power flow angle theta_i in rad, zero mean",
    },
    "spectrum": {
        "mode": "Mode index alpha, 1 is the zero mode",
        "eigenvalue": "Eigenvalue lambda_alpha in ascending order",
        "u_<id>": "Eigenvector component at the bus",
    },
    "measure": {
        "bus": "Fault bus id",
        "delta_p": "Power loss magnitude",
        "measure": "Performance measure M_b",
        "oracle": "Oracle quadrature of M_b (method both)",
        "discrepancy": "|closed - oracle| / |closed| (method both)",
    },
    "sensitivities": {
        "fault_bus": "Fault bus id b",
        "bus": "Bus id i",
        "rho": "Inertia susceptibility rho_i(b)",
        "alpha_term1": "First damping term",
        "alpha_term2": "Second damping term",
        "alpha": "Damping susceptibility alpha_i(b)",
    },
    "aggregate": {
        "bus": "Bus id",
        "dV_dr": "Unit-weight gradient of V along r_i",
        "dV_da": "Unit-weight gradient of V along a_i",
    },
    "placement": {
        "bus": "Bus id",
        "rho_agg": "Weighted inertia susceptibility",
        "alpha_agg": "Weighted damping susceptibility",
        "r": "Inertia shape r_i",
        "a": "Damping-ratio shape a_i",
    },
    "trajectory": {
        "t": "Time in s",
        "omega_<id>": "Frequency deviation of the bus in rad/s",
    },
    "modal": {
        "t": "Time in s",
        "xi_dot_<alpha>": "Closed-form modal velocity of mode alpha >= 2",
    },
}
