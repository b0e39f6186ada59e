#!/usr/bin/env python3
"""
Operator Core for qthermo
Dense complex-matrix kernel: tensor algebra, partial trace, Hermitian spectral
decomposition, operator functions and unitary time evolution (hbar = 1).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from config.settings import Tolerances, get_tolerances
from errors import (DensityOperatorError, DimensionError, DomainError,
                    HermiticityError, QThermoError, UnitarityError)

logger = logging.getLogger(__name__)

TOLERANCES: Tolerances = get_tolerances()

ComplexMatrix = np.ndarray
MatrixLike = Union[ComplexMatrix, Sequence[Sequence[complex]]]


def _as_square(matrix: MatrixLike) -> np.ndarray:
    m = np.array(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"Expected a non-empty square matrix, got shape {m.shape}")
    return m


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Partition:
    """Ordered subsystem dimensions of a composite space"""
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"Partition dimensions must be positive, got {self.dims}")
        object.__setattr__(self, 'dims', dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)

    def check(self, dim: int) -> None:
        """Raise DimensionError unless the partition factors `dim`"""
        if self.total != dim:
            raise DimensionError(
                f"Partition {list(self.dims)} (product {self.total}) does not match dimension {dim}"
            )


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Self-adjoint matrix; Hamiltonians and observables"""
    matrix: ComplexMatrix

    @classmethod
    def from_matrix(cls, matrix: MatrixLike, herm_tol: Optional[float] = None) -> 'HermitianOperator':
        m = _as_square(matrix)
        tol = TOLERANCES.herm_tol if herm_tol is None else herm_tol
        deviation = float(np.max(np.abs(m - m.conj().T)))
        if deviation > tol:
            raise HermiticityError(f"Matrix deviates from its adjoint by {deviation:.3e} (tol {tol:.1e})")
        return cls(_frozen((m + m.conj().T) / 2))

    @classmethod
    def zeros(cls, dim: int) -> 'HermitianOperator':
        return cls(_frozen(np.zeros((dim, dim), dtype=np.complex128)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectral_norm(self) -> float:
        if not self.matrix.any():
            return 0.0
        return float(np.max(np.abs(la.eigvalsh(self.matrix))))

    def norm(self) -> float:
        """Spectral norm, computed once per operator"""
        return self.spectral_norm

    def __add__(self, other: 'HermitianOperator') -> 'HermitianOperator':
        if other.dim != self.dim:
            raise DimensionError(f"Cannot add operators of dims {self.dim} and {other.dim}")
        return HermitianOperator(_frozen(self.matrix + other.matrix))

    def __sub__(self, other: 'HermitianOperator') -> 'HermitianOperator':
        if other.dim != self.dim:
            raise DimensionError(f"Cannot subtract operators of dims {self.dim} and {other.dim}")
        return HermitianOperator(_frozen(self.matrix - other.matrix))

    def __mul__(self, scalar: float) -> 'HermitianOperator':
        return HermitianOperator(_frozen(self.matrix * float(scalar)))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive semidefinite, unit-trace matrix with its cached spectrum"""
    matrix: ComplexMatrix
    eigenvalues: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: MatrixLike, tolerances: Optional[Tolerances] = None) -> 'DensityOperator':
        """Validate and clamp; eigenvalues in [-psd_tol, 0) are set to zero"""
        tol = tolerances or TOLERANCES
        herm = HermitianOperator.from_matrix(matrix, herm_tol=tol.herm_tol)
        m = np.array(herm.matrix)

        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > tol.trace_tol:
            raise DensityOperatorError(f"Trace {trace!r} differs from 1 by more than {tol.trace_tol:.1e}")

        eigenvalues = la.eigvalsh(m)
        if eigenvalues[0] < -tol.psd_tol:
            raise DensityOperatorError(
                f"Eigenvalue {eigenvalues[0]:.3e} below -{tol.psd_tol:.1e}; matrix is not positive"
            )
        if eigenvalues[0] < 0:
            values, vectors = la.eigh(m)
            negative = int(np.count_nonzero(values < 0))
            values = np.clip(values, 0.0, None)
            values = values / values.sum()
            m = (vectors * values) @ vectors.conj().T
            m = (m + m.conj().T) / 2
            eigenvalues = values
            logger.debug(f"Clamped {negative} negative eigenvalue(s) of a dim-{m.shape[0]} state")

        return cls(_frozen(m), _frozen(np.asarray(eigenvalues, dtype=float)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.sum(self.eigenvalues ** 2))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending real eigenvalues and orthonormal eigenvector columns"""
    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix

    def reconstruct(self, values: Optional[np.ndarray] = None) -> ComplexMatrix:
        """V diag(values) V^dagger, defaulting to the eigenvalues"""
        values = self.eigenvalues if values is None else values
        return (self.eigenvectors * values) @ self.eigenvectors.conj().T

    def reconstruction_error(self, matrix: ComplexMatrix) -> float:
        """Relative Frobenius distance between the input and V diag(lambda) V^dagger"""
        scale = la.norm(matrix) or 1.0
        return float(la.norm(matrix - self.reconstruct()) / scale)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> ComplexMatrix:
        """f applied to the spectrum; raises DomainError where f is not finite"""
        with np.errstate(all='ignore'):
            values = np.asarray(f(self.eigenvalues))
        if values.shape != self.eigenvalues.shape:
            raise DomainError("Operator function must map the spectrum elementwise")
        bad = ~np.isfinite(values)
        if bad.any():
            raise DomainError(f"Function undefined at eigenvalue(s) {self.eigenvalues[bad].tolist()}")
        return self.reconstruct(values)

    def propagator(self, t: float) -> ComplexMatrix:
        """exp(-i H t) from the cached spectrum"""
        return self.reconstruct(np.exp(-1j * self.eigenvalues * t))


def kron(a: MatrixLike, b: MatrixLike) -> ComplexMatrix:
    """Kronecker product, dimensions multiply"""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def _trace_out(matrix: ComplexMatrix, dims: Tuple[int, ...], keep: Iterable[int]) -> ComplexMatrix:
    n = len(dims)
    keep_set = set(keep)
    tensor = matrix.reshape(dims + dims)
    current = n
    for idx in sorted(set(range(n)) - keep_set, reverse=True):
        tensor = np.trace(tensor, axis1=idx, axis2=idx + current)
        current -= 1
    d = int(np.prod([dims[i] for i in sorted(keep_set)]))
    return tensor.reshape(d, d)


def partial_trace(rho: DensityOperator, p: Partition, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on the kept factors (in ascending factor order)"""
    keep_set = set(int(i) for i in keep)
    p.check(rho.dim)
    if not keep_set:
        raise DimensionError("At least one subsystem must be kept")
    if min(keep_set) < 0 or max(keep_set) >= len(p):
        raise DimensionError(f"Subsystem indices {sorted(keep_set)} out of range for {len(p)} factors")
    if len(keep_set) == len(p):
        return rho
    return DensityOperator.from_matrix(_trace_out(rho.matrix, p.dims, keep_set))


def hermitian_eig(h: Union[HermitianOperator, MatrixLike],
                  recon_tol: Optional[float] = None) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian operator with ascending eigenvalues"""
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator.from_matrix(h)
    values, vectors = la.eigh(h.matrix)
    decomposition = SpectralDecomposition(_frozen(values), _frozen(vectors))

    tol = TOLERANCES.recon_tol if recon_tol is None else recon_tol
    error = decomposition.reconstruction_error(h.matrix)
    if error > tol:
        raise QThermoError(f"Eigendecomposition reconstruction error {error:.3e} exceeds {tol:.1e}")
    return decomposition


def op_func(h: Union[HermitianOperator, DensityOperator],
            f: Callable[[np.ndarray], np.ndarray]) -> HermitianOperator:
    """V f(diag(lambda)) V^dagger for a real function f"""
    decomposition = hermitian_eig(h.matrix)
    return HermitianOperator(_frozen(decomposition.apply(f)))


def propagator(h: HermitianOperator, t: float) -> ComplexMatrix:
    """U = exp(-i H t)"""
    return hermitian_eig(h).propagator(t)


def is_unitary(u: ComplexMatrix, tol: float = 1e-8) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(la.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol)


def evolve(rho: DensityOperator, u: ComplexMatrix, unitary_tol: float = 1e-8) -> DensityOperator:
    """U rho U^dagger"""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != rho.matrix.shape:
        raise DimensionError(f"Propagator shape {u.shape} does not match state dim {rho.dim}")
    if not is_unitary(u, unitary_tol):
        raise UnitarityError(f"Propagator deviates from unitarity by more than {unitary_tol:.1e}")
    return DensityOperator.from_matrix(u @ rho.matrix @ u.conj().T)


def expectation(h: Union[HermitianOperator, ComplexMatrix], rho: Union[DensityOperator, ComplexMatrix]) -> float:
    """Re tr[h rho]"""
    hm = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h)
    rm = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if hm.shape != rm.shape:
        raise DimensionError(f"Operator shape {hm.shape} does not match state shape {rm.shape}")
    return float(np.real(np.einsum('ij,ji->', hm, rm)))


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """Half the trace norm of the difference"""
    if a.dim != b.dim:
        raise DimensionError(f"Cannot compare states of dims {a.dim} and {b.dim}")
    return float(0.5 * np.sum(np.abs(la.eigvalsh(a.matrix - b.matrix))))


# State and operator constructors

def density_from_pure(psi: Sequence[complex]) -> DensityOperator:
    """|psi><psi| / <psi|psi>"""
    v = np.asarray(psi, dtype=np.complex128).ravel()
    norm = np.vdot(v, v).real
    if norm == 0:
        raise DensityOperatorError("Zero vector has no associated state")
    m = np.outer(v, v.conj()) / norm
    eigenvalues = np.zeros(v.size)
    eigenvalues[-1] = 1.0
    return DensityOperator(_frozen((m + m.conj().T) / 2), _frozen(eigenvalues))


def basis_projector(dim: int, index: int) -> DensityOperator:
    psi = np.zeros(dim, dtype=np.complex128)
    psi[index] = 1.0
    return density_from_pure(psi)


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator.from_matrix(np.eye(dim) / dim)


def product_state(*states: DensityOperator) -> DensityOperator:
    return DensityOperator.from_matrix(reduce(kron, [s.matrix for s in states]))


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


def sigma_plus() -> ComplexMatrix:
    """|1><0| in the basis (|0>, |1>)"""
    return np.array([[0, 0], [1, 0]], dtype=np.complex128)


def sigma_minus() -> ComplexMatrix:
    return sigma_plus().T.copy()


def sigma_x() -> ComplexMatrix:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def sigma_z() -> ComplexMatrix:
    """|1><1| - |0><0|"""
    return np.array([[-1, 0], [0, 1]], dtype=np.complex128)


def annihilation(dim: int) -> ComplexMatrix:
    """Truncated bosonic b with b|m> = sqrt(m)|m-1>"""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(np.complex128)


def number_operator(dim: int) -> ComplexMatrix:
    return np.diag(np.arange(dim, dtype=float)).astype(np.complex128)


def embed(op: MatrixLike, p: Partition, index: int) -> ComplexMatrix:
    """op acting on factor `index`, identity elsewhere"""
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (p.dims[index], p.dims[index]):
        raise DimensionError(f"Operator shape {op.shape} does not match factor dim {p.dims[index]}")
    factors = [op if i == index else identity(d) for i, d in enumerate(p.dims)]
    return reduce(kron, factors)
