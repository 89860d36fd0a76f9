"""
Validation helpers for numerical arguments.
Each helper returns the cleaned value or raises a gridplace exception.
"""

from typing import Any, Optional

import numpy as np

from gridplace.utils.exceptions import DimensionMismatchError, InvalidParameterError, UnknownBusError


class ValidationUtils:
    """
    Utility class for common argument checks.
    Provides reusable validation for scalars, vectors and bus indices.
    """

    @staticmethod
    def validate_positive(value: Any, field_name: str) -> float:
        """
        Validate a strictly positive finite scalar.

        Args:
            value: Value to validate
            field_name: Name of the field for error messages

        Returns:
            Value as float

        Raises:
            InvalidParameterError: If value is not finite or not > 0
        """
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise InvalidParameterError(field_name, f"expected a number, got {value!r}")
        if not np.isfinite(number) or number <= 0:
            raise InvalidParameterError(field_name, f"must be > 0, got {number}")
        return number

    @staticmethod
    def validate_amplitude(value: Any, field_name: str) -> float:
        """Validate a dimensionless perturbation amplitude with |value| < 1."""
        number = float(value)
        if not np.isfinite(number) or abs(number) >= 1.0:
            raise InvalidParameterError(field_name, f"|{field_name}| must be < 1, got {number}")
        return number

    @staticmethod
    def as_vector(values: Any, field_name: str, size: Optional[int] = None) -> np.ndarray:
        """
        Convert to a read-only 1-D float vector of the expected size.

        Raises:
            DimensionMismatchError: If the length differs from size
            InvalidParameterError: If entries are not finite
        """
        vector = np.array(values, dtype=float).reshape(-1)
        if size is not None and vector.size != size:
            raise DimensionMismatchError(field_name, size, vector.size)
        if not np.all(np.isfinite(vector)):
            raise InvalidParameterError(field_name, "entries must be finite")
        vector.setflags(write=False)
        return vector

    @staticmethod
    def validate_shape_vector(values: Any, field_name: str, size: int, tolerance: float) -> np.ndarray:
        """
        Validate a deviation shape: |x_i| <= 1 and sum(x) = 0.

        Args:
            values: Shape entries
            field_name: Name of the field for error messages
            size: Expected number of entries
            tolerance: Allowed absolute deviation of the sum from zero

        Returns:
            Read-only float vector
        """
        vector = ValidationUtils.as_vector(values, field_name, size)
        if np.any(np.abs(vector) > 1.0 + 1e-12):
            raise InvalidParameterError(field_name, "entries must satisfy |x_i| <= 1")
        total = float(vector.sum())
        if abs(total) > tolerance:
            raise InvalidParameterError(field_name, f"entries must sum to zero, got {total:.3e}")
        return vector

    @staticmethod
    def validate_weights(values: Any, field_name: str, size: int) -> np.ndarray:
        """Validate a non-negative weight vector."""
        vector = ValidationUtils.as_vector(values, field_name, size)
        if np.any(vector < 0):
            raise InvalidParameterError(field_name, "weights must be >= 0")
        return vector

    @staticmethod
    def validate_bus_index(bus: Any, size: int) -> int:
        """Validate a 0-based bus position."""
        try:
            index = int(bus)
        except (TypeError, ValueError):
            raise UnknownBusError(bus)
        if index != bus or not 0 <= index < size:
            raise UnknownBusError(bus)
        return index
