"""
Tests for settings loading and validation.
"""

import os

import pytest
from pydantic import ValidationError as PydanticValidationError

from gridplace.config import Settings, get_settings


class TestSettings:
    """Test the pydantic settings."""

    def test_defaults(self):
        """Test the numerical defaults."""
        settings = Settings()

        assert settings.oracle_max_dt == 1e-3
        assert settings.oracle_horizon_factor == 20.0
        assert settings.oracle_tail_tolerance == 1e-12
        assert settings.oracle_max_doublings == 4
        assert settings.fd_step == 1e-3
        assert settings.include_zero_mode is True
        assert settings.report_format_version == "1"

    def test_testing_environment(self, settings: Settings):
        """Test that the suite runs in testing mode."""
        assert settings.is_testing
        assert settings.threads == 2
        assert settings.worker_count == 2

    def test_env_override(self, monkeypatch):
        """Test GRIDPLACE_* variables."""
        monkeypatch.setenv("GRIDPLACE_FD_STEP", "1e-4")
        monkeypatch.setenv("GRIDPLACE_INCLUDE_ZERO_MODE", "false")

        settings = Settings()

        assert settings.fd_step == 1e-4
        assert settings.include_zero_mode is False

    def test_worker_count_defaults_to_cpus(self, monkeypatch):
        """Test that threads = 0 means one worker per CPU."""
        monkeypatch.setenv("GRIDPLACE_THREADS", "0")

        assert Settings().worker_count == (os.cpu_count() or 1)

    def test_log_level_normalized(self):
        """Test that level names are upper-cased."""
        assert Settings(log_level="debug").log_level == "DEBUG"

    def test_unknown_log_level(self):
        """Test that unknown level names are refused."""
        with pytest.raises(PydanticValidationError, match="Unknown log level"):
            Settings(log_level="chatty")

    def test_unknown_environment(self):
        """Test the environment whitelist."""
        with pytest.raises(PydanticValidationError, match="Environment must be one of"):
            Settings(environment="staging")

    @pytest.mark.parametrize("field", ["fd_step", "oracle_tail_tolerance", "degeneracy_tolerance"])
    def test_positive_tolerances(self, field):
        """Test that tolerances and steps must be positive."""
        with pytest.raises(PydanticValidationError, match="must be > 0"):
            Settings(**{field: 0.0})

    def test_negative_count(self):
        """Test that counts cannot be negative."""
        with pytest.raises(PydanticValidationError, match="must be >= 0"):
            Settings(oracle_max_doublings=-1)

    def test_cached(self):
        """Test that get_settings returns one instance."""
        assert get_settings() is get_settings()
