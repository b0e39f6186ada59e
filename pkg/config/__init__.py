"""
Configuration package for qthermo
"""

from .settings import Tolerances, get_settings, get_tolerances, validate_configuration

__all__ = ['Tolerances', 'get_settings', 'get_tolerances', 'validate_configuration']
