#!/usr/bin/env python3
"""
Exception hierarchy for qthermo
"""

from typing import Optional


class QThermoError(Exception):
    """Root of every error raised by the library"""


class DimensionError(QThermoError, ValueError):
    """Operator dimensions disagree with each other or with a partition"""


class HermiticityError(QThermoError):
    """Matrix is not self-adjoint within tolerance"""


class DomainError(QThermoError):
    """Operator function undefined on part of the spectrum"""


class UnitarityError(QThermoError):
    """Matrix expected to be unitary is not"""


class DensityOperatorError(QThermoError):
    """Trace or positivity violated beyond the clamping tolerance"""


class ParameterError(QThermoError, ValueError):
    """Scalar parameter outside its admissible range"""


class EnergyRangeError(QThermoError):
    """Target energy cannot be reached by any Gibbs state of the Hamiltonian"""


class TruncationError(QThermoError):
    """Fock truncation too small for the requested accuracy"""

    def __init__(self, message: str, level: Optional[int] = None,
                 population: Optional[float] = None):
        super().__init__(message)
        self.level = level
        self.population = population


class NonUnitaryTrajectoryError(QThermoError):
    """Joint entropy changed between two snapshots of a supposedly unitary run"""


class NonComparableError(QThermoError):
    """Residual involves an infinite relative entropy"""


class InsufficientDataError(QThermoError):
    """Too few records for a finite-difference estimate"""


class LedgerError(QThermoError):
    """Work terms do not add up to the total work"""


class ConfigError(QThermoError, ValueError):
    """Invalid run configuration or scenario file"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
