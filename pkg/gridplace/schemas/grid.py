"""
Pydantic schemas for grid documents.
Validates the grid JSON layout before it becomes a GridModel.
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BusSchema(BaseModel):
    """Schema for one bus entry."""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(
        ...,
        min_length=1,
        description="Unique bus identifier",
        examples=["A"],
    )

    power: float = Field(
        ...,
        allow_inf_nan=False,
        description="Active power injection in per unit",
        examples=[0.1],
    )

    inertia: float = Field(
        ...,
        ge=0,
        allow_inf_nan=False,
        description="Inertia m_i in MW s^2",
        examples=[29.22],
    )

    damping: float = Field(
        ...,
        ge=0,
        allow_inf_nan=False,
        description="Damping d_i in MW s",
        examples=[12.25],
    )

    is_generator: bool = Field(
        False,
        description="Whether a fault may be located at this bus",
    )

    @field_validator("id", mode="before")
    @classmethod
    def validate_id(cls, v):
        """Accept numeric identifiers and store them as strings."""
        if isinstance(v, bool):
            raise ValueError("Bus id must be a string")
        if isinstance(v, (int, float)):
            return str(v)
        return v


class LineSchema(BaseModel):
    """Schema for one line entry; `from` and `to` are JSON keys."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    source: str = Field(..., alias="from", description="Bus id at one end", examples=["A"])
    target: str = Field(..., alias="to", description="Bus id at the other end", examples=["B"])
    susceptance: float = Field(
        ...,
        gt=0,
        allow_inf_nan=False,
        description="Line susceptance B_ij in per unit",
        examples=[1.0],
    )

    @field_validator("source", "target", mode="before")
    @classmethod
    def validate_endpoint(cls, v):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return str(v)
        return v

    @model_validator(mode="after")
    def validate_endpoints_differ(self):
        """A line cannot connect a bus to itself."""
        if self.source == self.target:
            raise ValueError(f"Line endpoints must differ, got '{self.source}' twice")
        return self


class GridDocument(BaseModel):
    """Top-level grid document."""

    model_config = ConfigDict(extra="forbid")

    base_mva: float = Field(100.0, gt=0, description="Common MVA base", examples=[100.0])
    buses: List[BusSchema] = Field(..., min_length=1, description="Ordered list of buses")
    lines: List[LineSchema] = Field(default_factory=list, description="Lines between buses")
