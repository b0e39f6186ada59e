#!/usr/bin/env python3
"""
Jaynes-Cummings worked example for qthermo
Qubit (|0>, |1>) coupled to one truncated bosonic mode under the rotating-wave
approximation, prepared in the correlated pure state xi|0,n> + zeta|1,n-1>.

Two routes to the reduced states are provided: the closed-form appendix
expressions, taken verbatim, and a brute-force oracle on the truncated joint
space. The oracle is authoritative for all trajectory data.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from entropy_info import binary_entropy
from errors import DensityOperatorError, EnergyRangeError, ParameterError, TruncationError
from law_ledger import Leg, Trajectory, build_trajectory
from operator_core import (TOLERANCES, ComplexMatrix, DensityOperator, HermitianOperator,
                           Partition, annihilation, density_from_pure, embed, expectation,
                           hermitian_eig, identity, kron, partial_trace, sigma_minus,
                           sigma_plus, trace_distance)
from thermo_engine import ThermalReference, certify_truncation, gibbs_state, match_beta
from utils.performance import measure_performance
from utils.validation import config_hash as hash_config

logger = logging.getLogger(__name__)

# Figure defaults
DEFAULT_OMEGA0 = 1.0
DEFAULT_OMEGA = 0.5
DEFAULT_G = 1.0
DEFAULT_N = 7
DEFAULT_T_MAX = 30.0
DEFAULT_STEPS = 2000

MIN_FOCK_MARGIN = 30
BETA_CROSS_CHECK_TOL = 1e-6
CONSERVATION_TOL = 1e-10


def auto_fock_dimension(omega: float, n: int, tol: Optional[float] = None) -> int:
    """Smallest truncation whose thermal tail is certified for any bath energy up to omega*n"""
    tol = TOLERANCES.truncation_tol if tol is None else tol
    # beta*omega at the hottest matched temperature, E = omega*n
    beta_omega = math.log1p(1.0 / n)
    return max(n + MIN_FOCK_MARGIN, int(math.floor(math.log(1.0 / tol) / beta_omega)) + 2)


@dataclass
class JCParams:
    """Model and grid parameters; d_fock=None selects the certified default"""
    omega0: float = DEFAULT_OMEGA0
    omega: float = DEFAULT_OMEGA
    g: float = DEFAULT_G
    n: int = DEFAULT_N
    xi: complex = 0.5
    d_fock: Optional[int] = None
    t_max: float = DEFAULT_T_MAX
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"Fock label n must be >= 2, got {self.n}")
        if abs(self.xi) > 1.0 + 1e-15:
            raise ParameterError(f"|xi| must not exceed 1, got {abs(self.xi)}")
        if not self.omega > 0:
            raise ParameterError(f"Field frequency must be positive, got {self.omega}")
        if not self.t_max > 0:
            raise ParameterError(f"t_max must be positive, got {self.t_max}")
        if self.steps < 2:
            raise ParameterError(f"steps must be >= 2, got {self.steps}")
        if self.d_fock is None:
            self.d_fock = auto_fock_dimension(self.omega, self.n)
            logger.debug(f"Fock truncation set to {self.d_fock} for n={self.n}, omega={self.omega}")
        elif self.d_fock < self.n + 2:
            raise ParameterError(f"d_fock must be >= n + 2 = {self.n + 2}, got {self.d_fock}")

    @property
    def zeta(self) -> float:
        """Real non-negative partner amplitude"""
        return math.sqrt(max(0.0, 1.0 - abs(self.xi) ** 2))

    @property
    def detuning(self) -> float:
        return self.omega0 - self.omega

    @property
    def partition(self) -> Partition:
        return Partition((2, self.d_fock))

    def as_dict(self) -> Dict[str, object]:
        xi = complex(self.xi)
        return {
            'omega0': self.omega0, 'omega': self.omega, 'g': self.g, 'n': self.n,
            'xi_real': xi.real, 'xi_imag': xi.imag, 'd_fock': self.d_fock,
            't_max': self.t_max, 'steps': self.steps,
        }


@dataclass(frozen=True)
class JCHamiltonians:
    h_s: HermitianOperator
    h_b: HermitianOperator
    h_int: HermitianOperator
    h_total: HermitianOperator
    partition: Partition


@dataclass(frozen=True)
class ReducedStates:
    rho_s: DensityOperator
    rho_b: DensityOperator


@dataclass(frozen=True)
class AppendixReport:
    """Verbatim closed-form reduced states against the oracle"""
    times_checked: int
    max_trace_distance_system: float
    max_trace_distance_bath: float
    max_trace_error: float
    min_eigenvalue: float
    valid_states: bool

    @property
    def consistent(self) -> bool:
        return max(self.max_trace_distance_system, self.max_trace_distance_bath) < TOLERANCES.identity_tol


def basis_index(p: JCParams, mu: int, m: int) -> int:
    """Position of |mu, m> in the joint basis"""
    return mu * p.d_fock + m


def build_hamiltonians(p: JCParams) -> JCHamiltonians:
    """H = omega0 s+s- + omega b^dag b + g (s+ b + s- b^dag)"""
    d = p.d_fock
    partition = p.partition
    b = annihilation(d)
    h_s = HermitianOperator.from_matrix(p.omega0 * (sigma_plus() @ sigma_minus()))
    h_b = HermitianOperator.from_matrix(p.omega * (b.conj().T @ b))
    h_int = HermitianOperator.from_matrix(
        p.g * (kron(sigma_plus(), b) + kron(sigma_minus(), b.conj().T))
    )
    h_total = HermitianOperator.from_matrix(
        embed(h_s.matrix, partition, 0) + embed(h_b.matrix, partition, 1) + h_int.matrix
    )
    return JCHamiltonians(h_s=h_s, h_b=h_b, h_int=h_int, h_total=h_total, partition=partition)


def excitation_number(p: JCParams) -> ComplexMatrix:
    """s+s- (x) I + I (x) b^dag b"""
    b = annihilation(p.d_fock)
    return kron(sigma_plus() @ sigma_minus(), identity(p.d_fock)) + kron(identity(2), b.conj().T @ b)


def initial_state_vector(p: JCParams) -> np.ndarray:
    psi = np.zeros(2 * p.d_fock, dtype=np.complex128)
    psi[basis_index(p, 0, p.n)] = complex(p.xi)
    psi[basis_index(p, 1, p.n - 1)] = p.zeta
    return psi


def initial_state(p: JCParams) -> DensityOperator:
    """|psi><psi| with psi = xi|0,n> + zeta|1,n-1>"""
    return density_from_pure(initial_state_vector(p))


def initial_state_coefficients(p: JCParams) -> Dict[Tuple[int, int, int, int], complex]:
    """Non-zero rho^{m,l}_{mu,nu}, keyed by (mu, nu, m, l)"""
    xi, zeta, n = complex(p.xi), p.zeta, p.n
    return {
        (0, 0, n, n): abs(xi) ** 2,
        (0, 1, n, n - 1): xi * zeta,
        (1, 0, n - 1, n): xi.conjugate() * zeta,
        (1, 1, n - 1, n - 1): zeta ** 2,
    }


def initial_correlation(xi_abs: float) -> float:
    """Mutual information 2 h(|xi|^2) of the correlated initial state"""
    return 2.0 * binary_entropy(min(1.0, xi_abs ** 2))


def rabi_frequency(p: JCParams, m: float) -> float:
    """Omega(m) = sqrt(Delta^2 + 4 g^2 m)"""
    return math.sqrt(p.detuning ** 2 + 4.0 * p.g ** 2 * m)


def _half_sinc(p: JCParams, m: float, t: float) -> float:
    # sin(Omega t / 2) / Omega, finite at Omega = 0
    return 0.5 * t * float(np.sinc(rabi_frequency(p, m) * t / (2.0 * math.pi)))


def c_coefficient(p: JCParams, m: float, t: float) -> complex:
    """Eigenvalue of c(n, t) on |m>"""
    omega_m = rabi_frequency(p, m)
    delta = p.detuning
    phase = cmath.exp(0.5j * delta * t)
    return phase * (math.cos(0.5 * omega_m * t) - 1j * delta * _half_sinc(p, m, t))


def d_coefficient(p: JCParams, m: float, t: float) -> complex:
    """Eigenvalue of d(n, t) on |m>"""
    phase = cmath.exp(0.5j * p.detuning * t)
    return -1j * phase * 2.0 * p.g * _half_sinc(p, m, t)


def analytic_propagator(p: JCParams, t: float) -> ComplexMatrix:
    """Interaction-picture U(t) assembled block by block on the truncated space

    Block m couples |1, m-1> and |0, m>. The top state |1, d-1> has its partner
    outside the truncation and only receives c_d(t), so U is unitary on every
    block except that one.
    """
    d = p.d_fock
    u = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    u[basis_index(p, 0, 0), basis_index(p, 0, 0)] = c_coefficient(p, 0, t).conjugate()
    for m in range(1, d):
        c_m, d_m = c_coefficient(p, m, t), d_coefficient(p, m, t)
        upper, lower = basis_index(p, 1, m - 1), basis_index(p, 0, m)
        root = math.sqrt(m)
        u[upper, upper] = c_m
        u[upper, lower] = root * d_m
        u[lower, upper] = -root * d_m.conjugate()
        u[lower, lower] = c_m.conjugate()
    top = basis_index(p, 1, d - 1)
    u[top, top] = c_coefficient(p, d, t)
    return u


def appendix_matrices(p: JCParams, t: float) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Closed-form system and bath matrices exactly as printed, bath embedded at n-2..n+1"""
    n, xi, zeta = p.n, complex(p.xi), p.zeta
    c_lo, d_lo = c_coefficient(p, n - 1, t), d_coefficient(p, n - 1, t)
    c_hi, d_hi = c_coefficient(p, n + 1, t), d_coefficient(p, n + 1, t)

    a1 = (n - 1) * zeta ** 2 * abs(d_lo) ** 2
    a2 = zeta ** 2 * abs(c_lo) ** 2
    a3 = math.sqrt(n - 1) * xi.conjugate() * zeta * c_hi.conjugate() * d_lo
    b1 = abs(xi) ** 2 * abs(c_hi) ** 2
    b2 = (n + 1) * abs(xi) ** 2 * abs(d_hi) ** 2
    b3 = -math.sqrt(n + 1) * xi.conjugate() * zeta * c_lo.conjugate() * d_hi

    rho_s = np.diag([a1 + b1, a2 + b2]).astype(np.complex128)
    block = np.array([
        [a1, 0, a3, 0],
        [0, a2, 0, b3],
        [np.conj(a3), 0, b1, 0],
        [0, np.conj(b3), 0, b2],
    ], dtype=np.complex128)
    rho_b = np.zeros((p.d_fock, p.d_fock), dtype=np.complex128)
    rho_b[n - 2:n + 2, n - 2:n + 2] = block
    return rho_s, rho_b


def analytic_reduced_states(p: JCParams, t: float) -> ReducedStates:
    """Closed-form reduced states; raises DensityOperatorError if they are not valid states"""
    rho_s, rho_b = appendix_matrices(p, t)
    return ReducedStates(rho_s=DensityOperator.from_matrix(rho_s), rho_b=DensityOperator.from_matrix(rho_b))


class JCOracle:
    """Brute-force propagation on the truncated joint space"""

    def __init__(self, p: JCParams):
        self.params = p
        self.hamiltonians = build_hamiltonians(p)
        self.spectrum = hermitian_eig(self.hamiltonians.h_total)
        self.free_energies = np.real(np.diag(
            embed(self.hamiltonians.h_s.matrix, p.partition, 0)
            + embed(self.hamiltonians.h_b.matrix, p.partition, 1)
        ))
        vectors = self.spectrum.eigenvectors
        self.coefficients = vectors.conj().T @ initial_state_vector(p)

    def state_vector(self, t: float) -> np.ndarray:
        """e^{i H0 t} e^{-i H t} psi; H0 is diagonal in the product basis"""
        schrodinger = self.spectrum.eigenvectors @ (np.exp(-1j * self.spectrum.eigenvalues * t) * self.coefficients)
        return np.exp(1j * self.free_energies * t) * schrodinger

    def joint_state(self, t: float) -> DensityOperator:
        return density_from_pure(self.state_vector(t))

    def reduced_states(self, t: float) -> ReducedStates:
        p = self.params
        rho = self.joint_state(t)
        rho_b = partial_trace(rho, p.partition, {1})
        populations = np.real(np.diag(rho_b.matrix))
        top = float(populations[-1])
        if top > TOLERANCES.truncation_tol:
            raise TruncationError(
                f"Fock level {p.d_fock - 1} carries population {top:.3e} at t={t:.6g}",
                level=p.d_fock - 1, population=top,
            )
        return ReducedStates(rho_s=partial_trace(rho, p.partition, {0}), rho_b=rho_b)


def oracle_reduced_states(p: JCParams, t: float) -> ReducedStates:
    """Reduced states from direct numerical evolution of the correlated initial state"""
    return JCOracle(p).reduced_states(t)


def closed_form_beta(omega: float, energy: float) -> float:
    """beta = ln(1 + omega/E) / omega for a single mode of frequency omega"""
    if not energy > 0:
        raise EnergyRangeError(f"Bath energy must be positive for a finite beta, got {energy!r}")
    return math.log1p(omega / energy) / omega


def closed_form_log_partition(omega: float, beta: float) -> float:
    """ln Z with Z = 1 / (1 - e^{-beta omega})"""
    return -math.log1p(-math.exp(-beta * omega))


def bath_thermal_reference(p: JCParams, rho_b: DensityOperator,
                           h_b: Optional[HermitianOperator] = None) -> ThermalReference:
    """Gibbs state of omega b^dag b at the closed-form beta of rho_B"""
    h_b = h_b or build_hamiltonians(p).h_b
    energy = expectation(h_b, rho_b)
    beta = closed_form_beta(p.omega, energy)

    thermal = gibbs_state(h_b, beta)
    certify_truncation(thermal)

    matched = match_beta(h_b, energy)
    if abs(matched - beta) > BETA_CROSS_CHECK_TOL:
        raise TruncationError(
            f"Closed-form beta {beta:.12g} and matched beta {matched:.12g} differ by "
            f"{abs(matched - beta):.3e}; truncation d_fock={p.d_fock} is too small",
            level=p.d_fock - 1, population=float(thermal.populations[-1]),
        )
    log_z = closed_form_log_partition(p.omega, beta)
    logger.debug(f"Bath reference: E={energy:.12g}, beta={beta:.12g}, "
                 f"ln Z={log_z:.12g} (truncated {thermal.log_partition_function:.12g})")
    return thermal


def excitation_drift(p: JCParams, oracle: Optional[JCOracle] = None,
                     times: Optional[np.ndarray] = None) -> float:
    """Largest deviation of <N> from its initial value over the grid"""
    oracle = oracle or JCOracle(p)
    times = np.linspace(0.0, p.t_max, p.steps + 1) if times is None else times
    number = excitation_number(p)
    values = [expectation(number, oracle.joint_state(t)) for t in times]
    return float(np.max(np.abs(np.array(values) - values[0])))


def config_hash(p: JCParams) -> str:
    return hash_config({'model': 'jaynes-cummings', **p.as_dict()})


@measure_performance
def simulate(p: JCParams) -> Trajectory:
    """Ledgered trajectory of the correlated initial state over [0, t_max]

    The joint state evolves in the Schrodinger picture; every reduced quantity
    the ledger records coincides with the interaction-picture oracle because
    both marginals are diagonal in the product basis.
    """
    hams = build_hamiltonians(p)
    rho0 = initial_state(p)
    thermal = bath_thermal_reference(p, partial_trace(rho0, hams.partition, {1}), hams.h_b)
    logger.info(f"JC simulation: n={p.n}, xi={p.xi}, d_fock={p.d_fock}, steps={p.steps}, "
                f"beta={thermal.beta:.6g}")
    leg = Leg(duration=p.t_max, h_s=hams.h_s, h_int=hams.h_int)
    return build_trajectory(rho0, [leg], hams.h_b, hams.partition, p.steps,
                            config_hash=config_hash(p), thermal=thermal)


def appendix_consistency_report(p: JCParams, points: int = 201) -> AppendixReport:
    """Compare the verbatim closed forms with the oracle on an evenly spaced grid"""
    oracle = JCOracle(p)
    times = np.linspace(0.0, p.t_max, points)
    distance_s = distance_b = trace_error = 0.0
    min_eigenvalue = math.inf
    valid = True

    for t in times:
        rho_s, rho_b = appendix_matrices(p, float(t))
        reference = oracle.reduced_states(float(t))
        trace_error = max(trace_error, abs(np.trace(rho_s).real - 1.0), abs(np.trace(rho_b).real - 1.0))
        min_eigenvalue = min(min_eigenvalue, float(np.linalg.eigvalsh(rho_s)[0]),
                             float(np.linalg.eigvalsh(rho_b)[0]))
        try:
            appendix = analytic_reduced_states(p, float(t))
        except DensityOperatorError as e:
            logger.warning(f"Closed-form states invalid at t={t:.6g}: {e}")
            valid = False
            continue
        distance_s = max(distance_s, trace_distance(appendix.rho_s, reference.rho_s))
        distance_b = max(distance_b, trace_distance(appendix.rho_b, reference.rho_b))

    report = AppendixReport(
        times_checked=len(times),
        max_trace_distance_system=distance_s,
        max_trace_distance_bath=distance_b,
        max_trace_error=trace_error,
        min_eigenvalue=min_eigenvalue,
        valid_states=valid,
    )
    logger.info(f"Appendix comparison over {len(times)} times: system {distance_s:.3e}, bath {distance_b:.3e}")
    return report
