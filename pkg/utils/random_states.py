#!/usr/bin/env python3
"""
Seeded random states, Hamiltonians and unitaries for qthermo
Every draw comes from a Generator spawned from (seed, *keys) so individual
instances are reproducible independently of evaluation order.
"""

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

# Subsystem dimensions for random bipartite instances
SYSTEM_DIMS = (2, 3, 4)
BATH_DIMS = tuple(range(2, 9))
# Tripartite shapes with joint dimension <= 24
TRIPARTITE_DIMS = ((2, 2, 2), (2, 2, 3), (2, 3, 2), (3, 2, 2), (2, 2, 4), (2, 3, 3), (3, 2, 3), (3, 3, 2))


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def random_bipartite_dims(rng: np.random.Generator) -> Tuple[int, int]:
    return int(rng.choice(SYSTEM_DIMS)), int(rng.choice(BATH_DIMS))


def random_tripartite_dims(rng: np.random.Generator) -> Tuple[int, int, int]:
    return TRIPARTITE_DIMS[int(rng.integers(len(TRIPARTITE_DIMS)))]


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary"""
    return unitary_group.rvs(dim, random_state=rng)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Ginibre-induced mixed state of the given rank (full rank by default)"""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_product_matrix(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Tensor product of independent full-rank factor states"""
    result = np.ones((1, 1), dtype=np.complex128)
    for d in dims:
        result = np.kron(result, random_density_matrix(d, rng))
    return result
