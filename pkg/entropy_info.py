#!/usr/bin/env python3
"""
Entropy and information functionals for qthermo
Natural logarithms throughout; 0 ln 0 := 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la
from scipy.special import entr

from config.settings import get_settings
from errors import DimensionError, ParameterError
from operator_core import TOLERANCES, DensityOperator, Partition, partial_trace

logger = logging.getLogger(__name__)

# Round-off band below zero reported as exactly zero correlation
CORRELATION_CLAMP = 1e-9


@dataclass(frozen=True)
class EntropyValue:
    """Information entropy in nats and its thermodynamic counterpart in units of k"""
    nats: float
    boltzmann_scaled: float


def _boltzmann_k(k: Optional[float]) -> float:
    k = get_settings()['QTHERMO_BOLTZMANN_K'] if k is None else float(k)
    if not k > 0:
        raise ParameterError(f"Boltzmann constant must be positive, got {k}")
    return k


def binary_entropy(p: float) -> float:
    """h(p) = -p ln p - (1-p) ln(1-p)"""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"Probability must lie in [0, 1], got {p}")
    return float(entr(p) + entr(1.0 - p))


def von_neumann_entropy(rho: DensityOperator) -> float:
    """S_V(rho) = -tr rho ln rho"""
    s = float(np.sum(entr(rho.eigenvalues)))
    return min(max(s, 0.0), math.log(rho.dim))


def thermo_entropy(rho: DensityOperator, k: Optional[float] = None) -> float:
    """S_th = k S_V"""
    return _boltzmann_k(k) * von_neumann_entropy(rho)


def entropy_value(rho: DensityOperator, k: Optional[float] = None) -> EntropyValue:
    k = _boltzmann_k(k)
    nats = von_neumann_entropy(rho)
    return EntropyValue(nats=nats, boltzmann_scaled=k * nats)


def joint_entropy(rho: DensityOperator) -> float:
    """Entropy of the whole composite state"""
    return von_neumann_entropy(rho)


def reduced_states(rho: DensityOperator, p: Partition) -> List[DensityOperator]:
    """Single-factor marginals in partition order"""
    p.check(rho.dim)
    return [partial_trace(rho, p, {mu}) for mu in range(len(p))]


def marginal_entropy(rho: DensityOperator, p: Partition) -> float:
    """Sum of the entropies of all single-factor marginals"""
    return float(sum(von_neumann_entropy(r) for r in reduced_states(rho, p)))


def correlation_information(rho: DensityOperator, p: Partition) -> float:
    """I(rho) = S_ME - S_JE"""
    value = marginal_entropy(rho, p) - joint_entropy(rho)
    if value < 0:
        if value < -CORRELATION_CLAMP:
            logger.warning(f"Correlation information {value:.3e} below round-off band")
            return value
        return 0.0
    return value


def mutual_information(rho: DensityOperator, p: Partition) -> float:
    """S(rho_S) + S(rho_B) - S(rho_SB) for a bipartition"""
    if len(p) != 2:
        raise DimensionError(f"Mutual information needs a bipartition, got {len(p)} factors")
    return correlation_information(rho, p)


def relative_entropy(sigma: DensityOperator, rho: DensityOperator,
                     supp_tol: Optional[float] = None,
                     rho_spectrum: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> float:
    """D(sigma||rho) = tr sigma ln sigma - tr sigma ln rho, +inf outside the support of rho

    `rho_spectrum` may supply (eigenvalues, eigenvectors) of rho when they are already known.
    """
    if sigma.dim != rho.dim:
        raise DimensionError(f"Relative entropy between dims {sigma.dim} and {rho.dim}")
    tol = TOLERANCES.supp_tol if supp_tol is None else supp_tol

    values, vectors = rho_spectrum if rho_spectrum is not None else la.eigh(rho.matrix)
    weights = np.real(np.sum(vectors.conj() * (sigma.matrix @ vectors), axis=0))
    support = values > tol

    if np.sum(weights[~support]) > tol:
        return math.inf

    cross = float(np.dot(weights[support], np.log(values[support])))
    return max(-von_neumann_entropy(sigma) - cross, 0.0)
