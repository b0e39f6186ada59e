#!/usr/bin/env python3
"""
Configuration Management for qthermo
Centralized settings with environment variable support and validation
"""

import os
from dataclasses import dataclass
from typing import Dict, Any
from dotenv import load_dotenv

from errors import ConfigError

# Load environment variables from .env file
load_dotenv()


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the kernels"""
    herm_tol: float = 1e-12
    trace_tol: float = 1e-10
    psd_tol: float = 1e-10
    recon_tol: float = 1e-10
    supp_tol: float = 1e-12
    energy_tol: float = 1e-9
    weak_tol: float = 1e-9
    truncation_tol: float = 1e-12
    identity_tol: float = 1e-8


def get_settings() -> Dict[str, Any]:
    """Get all configuration settings with environment variable overrides"""
    return {
        # Core Settings
        'QTHERMO_VERSION': os.getenv('QTHERMO_VERSION', '1.0.0'),
        'QTHERMO_LOG_LEVEL': os.getenv('QTHERMO_LOG_LEVEL', 'INFO'),

        # Tolerances
        'QTHERMO_HERM_TOL': float(os.getenv('QTHERMO_HERM_TOL', '1e-12')),
        'QTHERMO_TRACE_TOL': float(os.getenv('QTHERMO_TRACE_TOL', '1e-10')),
        'QTHERMO_PSD_TOL': float(os.getenv('QTHERMO_PSD_TOL', '1e-10')),
        'QTHERMO_RECON_TOL': float(os.getenv('QTHERMO_RECON_TOL', '1e-10')),
        'QTHERMO_SUPP_TOL': float(os.getenv('QTHERMO_SUPP_TOL', '1e-12')),
        'QTHERMO_ENERGY_TOL': float(os.getenv('QTHERMO_ENERGY_TOL', '1e-9')),
        'QTHERMO_WEAK_TOL': float(os.getenv('QTHERMO_WEAK_TOL', '1e-9')),
        'QTHERMO_TRUNCATION_TOL': float(os.getenv('QTHERMO_TRUNCATION_TOL', '1e-12')),
        'QTHERMO_IDENTITY_TOL': float(os.getenv('QTHERMO_IDENTITY_TOL', '1e-8')),

        # Physics
        'QTHERMO_BOLTZMANN_K': float(os.getenv('QTHERMO_BOLTZMANN_K', '1.0')),

        # Runner Settings
        'QTHERMO_DEFAULT_STEPS': int(os.getenv('QTHERMO_DEFAULT_STEPS', '2000')),
        'QTHERMO_DEFAULT_SEED': int(os.getenv('QTHERMO_DEFAULT_SEED', '42')),
        'QTHERMO_VERIFY_INSTANCES': int(os.getenv('QTHERMO_VERIFY_INSTANCES', '1000')),
        'QTHERMO_JOBS': int(os.getenv('QTHERMO_JOBS', '0')),
    }


def validate_configuration() -> bool:
    """Validate that tolerances and constants are usable"""
    settings = get_settings()

    bad = [key for key, value in settings.items()
           if key.endswith('_TOL') and not value > 0]
    if bad:
        raise ConfigError(f"Tolerances must be positive: {', '.join(bad)}")

    if settings['QTHERMO_BOLTZMANN_K'] <= 0:
        raise ConfigError("Boltzmann constant must be positive", field='QTHERMO_BOLTZMANN_K')

    if settings['QTHERMO_DEFAULT_STEPS'] < 2:
        raise ConfigError("At least two time steps are required", field='QTHERMO_DEFAULT_STEPS')

    if settings['QTHERMO_JOBS'] < 0:
        raise ConfigError("Job count cannot be negative", field='QTHERMO_JOBS')

    return True


def get_tolerances() -> Tolerances:
    """Tolerance subset of the settings as an immutable value"""
    settings = get_settings()
    return Tolerances(
        herm_tol=settings['QTHERMO_HERM_TOL'],
        trace_tol=settings['QTHERMO_TRACE_TOL'],
        psd_tol=settings['QTHERMO_PSD_TOL'],
        recon_tol=settings['QTHERMO_RECON_TOL'],
        supp_tol=settings['QTHERMO_SUPP_TOL'],
        energy_tol=settings['QTHERMO_ENERGY_TOL'],
        weak_tol=settings['QTHERMO_WEAK_TOL'],
        truncation_tol=settings['QTHERMO_TRUNCATION_TOL'],
        identity_tol=settings['QTHERMO_IDENTITY_TOL'],
    )
