#!/usr/bin/env python3
"""
Thermodynamic bookkeeping for qthermo
Gibbs states, energy-matched inverse temperatures, heat, work decomposition,
free energy and the bath relative-entropy ledger. Units: k = 1, hbar = 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.optimize as opt
from scipy.special import logsumexp

from entropy_info import relative_entropy, von_neumann_entropy
from errors import (DimensionError, EnergyRangeError, LedgerError,
                    ParameterError, TruncationError)
from operator_core import (TOLERANCES, DensityOperator, HermitianOperator,
                           Partition, SpectralDecomposition, embed,
                           expectation, hermitian_eig, partial_trace)

logger = logging.getLogger(__name__)

# Bisection settings for match_beta
BRACKET_SCALE = 50.0
MAX_BRACKET_EXPANSIONS = 60
MAX_BISECTION_ITERATIONS = 200

# First-law check on WorkLedger, relative to the largest term
FIRST_LAW_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ThermalReference:
    """Gibbs state e^{-beta H}/Z together with the data that produced it"""
    beta: float
    hamiltonian: HermitianOperator
    state: DensityOperator
    partition_function: float
    log_partition_function: float
    spectrum: SpectralDecomposition
    populations: np.ndarray
    negative_temperature: bool = False

    @property
    def energy(self) -> float:
        return float(np.dot(self.populations, self.spectrum.eigenvalues))

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


@dataclass(frozen=True)
class WorkLedger:
    """W = Delta E_S + Delta Q + Delta E_SB"""
    total_work: float
    system_term: float
    heat: float
    interaction_term: float

    def __post_init__(self):
        parts = self.system_term + self.heat + self.interaction_term
        scale = max(1.0, abs(self.total_work), abs(self.system_term),
                    abs(self.heat), abs(self.interaction_term))
        if abs(self.total_work - parts) > FIRST_LAW_TOL * scale:
            raise LedgerError(
                f"First law violated: W={self.total_work!r} but terms sum to {parts!r}"
            )

    @classmethod
    def zero(cls) -> 'WorkLedger':
        return cls(0.0, 0.0, 0.0, 0.0)

    def __add__(self, other: 'WorkLedger') -> 'WorkLedger':
        return WorkLedger(
            total_work=self.total_work + other.total_work,
            system_term=self.system_term + other.system_term,
            heat=self.heat + other.heat,
            interaction_term=self.interaction_term + other.interaction_term,
        )


def _gibbs_populations(values: np.ndarray, beta: float) -> Tuple[np.ndarray, float]:
    log_weights = -beta * values
    log_z = float(logsumexp(log_weights))
    return np.exp(log_weights - log_z), log_z


def gibbs_state(h: HermitianOperator, beta: float) -> ThermalReference:
    """rho_th = e^{-beta H} / tr e^{-beta H}"""
    if not math.isfinite(beta):
        raise ParameterError(f"Inverse temperature must be finite, got {beta}")
    spectrum = hermitian_eig(h)
    populations, log_z = _gibbs_populations(spectrum.eigenvalues, beta)
    state = DensityOperator.from_matrix(spectrum.reconstruct(populations))

    with np.errstate(over='ignore'):
        z = float(np.exp(log_z))

    negative = beta < 0
    if negative:
        logger.warning(f"Thermal reference built at negative beta={beta:.6g}")

    return ThermalReference(
        beta=float(beta),
        hamiltonian=h,
        state=state,
        partition_function=z,
        log_partition_function=log_z,
        spectrum=spectrum,
        populations=populations,
        negative_temperature=negative,
    )


def gibbs_energy(h: HermitianOperator, beta: float,
                 spectrum: Optional[SpectralDecomposition] = None) -> float:
    """tr[H e^{-beta H}] / Z"""
    spectrum = spectrum or hermitian_eig(h)
    populations, _ = _gibbs_populations(spectrum.eigenvalues, beta)
    return float(np.dot(populations, spectrum.eigenvalues))


def match_beta(h: HermitianOperator, energy: float, energy_tol: Optional[float] = None) -> float:
    """Inverse temperature whose Gibbs state has mean energy `energy`"""
    spectrum = hermitian_eig(h)
    values = spectrum.eigenvalues
    lowest, highest = float(values[0]), float(values[-1])

    if not lowest < energy < highest:
        raise EnergyRangeError(
            f"Energy {energy!r} outside the open spectral interval ({lowest!r}, {highest!r})"
        )

    mean = float(np.mean(values))
    if abs(energy - mean) <= 1e-14 * max(1.0, abs(mean)):
        return 0.0

    def excess(beta: float) -> float:
        populations, _ = _gibbs_populations(values, beta)
        return float(np.dot(populations, values)) - energy

    start = BRACKET_SCALE / max(float(np.max(np.abs(values))), 1e-300)
    upper, lower = start, -start
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if excess(upper) < 0:
            break
        upper *= 2
    else:
        raise EnergyRangeError(f"Energy {energy!r} too close to the ground energy for a finite beta")
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if excess(lower) > 0:
            break
        lower *= 2
    else:
        raise EnergyRangeError(f"Energy {energy!r} too close to the top energy for a finite beta")

    beta = opt.bisect(excess, lower, upper, xtol=1e-15, maxiter=MAX_BISECTION_ITERATIONS)
    logger.debug(f"match_beta: bracket [{lower:.4g}, {upper:.4g}] -> beta={beta:.12g}")

    tol = TOLERANCES.energy_tol if energy_tol is None else energy_tol
    miss = abs(excess(beta))
    if miss > tol * max(abs(energy), highest - lowest):
        logger.warning(f"match_beta: energy mismatch {miss:.3e} above tolerance")
    return float(beta)


def certify_truncation(thermal: ThermalReference, tol: Optional[float] = None,
                       next_level_energy: Optional[float] = None) -> float:
    """Population of the first omitted level (or of the top level) relative to Z"""
    tol = TOLERANCES.truncation_tol if tol is None else tol
    values = thermal.spectrum.eigenvalues
    if next_level_energy is None:
        weight = float(thermal.populations[-1])
        level = thermal.dim - 1
    else:
        weight = float(np.exp(-thermal.beta * next_level_energy - thermal.log_partition_function))
        level = thermal.dim
    if weight >= tol:
        raise TruncationError(
            f"Thermal weight {weight:.3e} at level {level} exceeds {tol:.1e} "
            f"(beta={thermal.beta:.6g}, spectrum top {values[-1]:.6g})",
            level=level, population=weight,
        )
    return weight


def heat(h_b: HermitianOperator, rho_b_initial: DensityOperator,
         rho_b_final: DensityOperator) -> float:
    """Delta Q = tr[H_B (rho'_B - rho_B)]"""
    if rho_b_initial.dim != rho_b_final.dim:
        raise DimensionError(f"Bath states of dims {rho_b_initial.dim} and {rho_b_final.dim}")
    return expectation(h_b, rho_b_final) - expectation(h_b, rho_b_initial)


def free_energy(rho: DensityOperator, h: HermitianOperator, beta: float) -> float:
    """F_H(rho) = tr[rho H] - S(rho)/beta"""
    if beta == 0:
        raise ParameterError("Free energy is undefined at beta = 0")
    return expectation(h, rho) - von_neumann_entropy(rho) / beta


def work_ledger(h_s: HermitianOperator, h_s_prime: HermitianOperator, h_b: HermitianOperator,
                h_int: HermitianOperator, h_int_prime: HermitianOperator,
                rho_sb: DensityOperator, rho_sb_prime: DensityOperator,
                p: Partition,
                marginals: Optional[Tuple[DensityOperator, DensityOperator,
                                          DensityOperator, DensityOperator]] = None) -> WorkLedger:
    """Split the work between two adjacent states into system, heat and interaction terms

    `marginals` is (rho_S, rho_B, rho_S', rho_B') when the caller already holds them.
    """
    if len(p) != 2:
        raise DimensionError(f"Work ledger needs a [d_S, d_B] partition, got {list(p.dims)}")
    p.check(rho_sb.dim)
    p.check(rho_sb_prime.dim)
    d_s, d_b = p.dims
    for name, op, d in (('h_s', h_s, d_s), ("h_s'", h_s_prime, d_s), ('h_b', h_b, d_b),
                        ('h_int', h_int, p.total), ("h_int'", h_int_prime, p.total)):
        if op.dim != d:
            raise DimensionError(f"{name} has dim {op.dim}, expected {d}")

    if marginals is None:
        marginals = (partial_trace(rho_sb, p, {0}), partial_trace(rho_sb, p, {1}),
                     partial_trace(rho_sb_prime, p, {0}), partial_trace(rho_sb_prime, p, {1}))
    rho_s, rho_b, rho_s_prime, rho_b_prime = marginals
    for name, rho, d in (('rho_S', rho_s, d_s), ('rho_B', rho_b, d_b),
                         ("rho_S'", rho_s_prime, d_s), ("rho_B'", rho_b_prime, d_b)):
        if rho.dim != d:
            raise DimensionError(f"{name} has dim {rho.dim}, expected {d}")

    system_term = expectation(h_s_prime, rho_s_prime) - expectation(h_s, rho_s)
    heat_term = heat(h_b, rho_b, rho_b_prime)
    interaction_term = expectation(h_int_prime, rho_sb_prime) - expectation(h_int, rho_sb)

    bath = embed(h_b.matrix, p, 1)
    total_before = embed(h_s.matrix, p, 0) + bath + h_int.matrix
    total_after = embed(h_s_prime.matrix, p, 0) + bath + h_int_prime.matrix
    total_work = expectation(total_after, rho_sb_prime) - expectation(total_before, rho_sb)

    return WorkLedger(
        total_work=total_work,
        system_term=system_term,
        heat=heat_term,
        interaction_term=interaction_term,
    )


def divergence_from_thermal(sigma: DensityOperator, thermal: ThermalReference) -> float:
    """D(sigma||rho_th) reusing the eigenbasis of the thermal reference"""
    return relative_entropy(sigma, thermal.state,
                            rho_spectrum=(thermal.populations, thermal.spectrum.eigenvectors))


def delta_d(rho_b_initial: DensityOperator, rho_b_final: DensityOperator,
            thermal: ThermalReference) -> float:
    """Delta D = D(rho'_B||rho_th) - D(rho_B||rho_th); may be negative"""
    before = divergence_from_thermal(rho_b_initial, thermal)
    after = divergence_from_thermal(rho_b_final, thermal)
    if math.isinf(before) or math.isinf(after):
        return math.inf
    return after - before


def relative_entropy_to_thermal(sigma: DensityOperator, thermal: ThermalReference) -> float:
    """D(sigma||rho_th) = -S(sigma) + beta tr[sigma H] + ln Z"""
    if sigma.dim != thermal.dim:
        raise DimensionError(f"State dim {sigma.dim} does not match thermal dim {thermal.dim}")
    return (-von_neumann_entropy(sigma) + thermal.beta * expectation(thermal.hamiltonian, sigma)
            + thermal.log_partition_function)


def gibbs_identity_residual(rho_b: DensityOperator, thermal: ThermalReference) -> float:
    """S(rho_th) - S(rho_B) - D(rho_B||rho_th); zero when the energies match"""
    return (von_neumann_entropy(thermal.state) - von_neumann_entropy(rho_b)
            - relative_entropy(rho_b, thermal.state))


def entropy_gap_chain(rho_b_final: DensityOperator, rho_b_initial: DensityOperator,
                      thermal: ThermalReference) -> Tuple[float, float]:
    """Both sides of S(rho'_B) - S(rho_th) = beta Delta Q - D(rho'_B||rho_th)"""
    lhs = von_neumann_entropy(rho_b_final) - von_neumann_entropy(thermal.state)
    rhs = (thermal.beta * heat(thermal.hamiltonian, rho_b_initial, rho_b_final)
           - relative_entropy(rho_b_final, thermal.state))
    return lhs, rhs
