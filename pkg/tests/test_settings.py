#!/usr/bin/env python3
"""
Tests for configuration settings
"""

import pytest

from config.settings import get_settings, get_tolerances, validate_configuration
from errors import ConfigError


class TestSettings:
    """Environment-driven settings"""

    def test_defaults(self, monkeypatch):
        """Test default values without overrides"""
        for key in ('QTHERMO_DEFAULT_STEPS', 'QTHERMO_DEFAULT_SEED', 'QTHERMO_IDENTITY_TOL'):
            monkeypatch.delenv(key, raising=False)
        settings = get_settings()
        assert settings['QTHERMO_DEFAULT_STEPS'] == 2000
        assert settings['QTHERMO_DEFAULT_SEED'] == 42
        assert settings['QTHERMO_IDENTITY_TOL'] == 1e-8

    def test_environment_override(self, monkeypatch):
        """Test environment variables override defaults"""
        monkeypatch.setenv('QTHERMO_SUPP_TOL', '1e-10')
        assert get_settings()['QTHERMO_SUPP_TOL'] == 1e-10
        assert get_tolerances().supp_tol == 1e-10

    def test_valid_configuration(self):
        """Test the default configuration validates"""
        assert validate_configuration()

    def test_non_positive_tolerance(self, monkeypatch):
        """Test a zero tolerance is rejected"""
        monkeypatch.setenv('QTHERMO_TRACE_TOL', '0')
        with pytest.raises(ConfigError):
            validate_configuration()

    def test_bad_boltzmann_constant(self, monkeypatch):
        """Test k <= 0 names the offending setting"""
        monkeypatch.setenv('QTHERMO_BOLTZMANN_K', '-1')
        with pytest.raises(ConfigError) as exc:
            validate_configuration()
        assert exc.value.field == 'QTHERMO_BOLTZMANN_K'
