#!/usr/bin/env python3
"""
Law Ledger for qthermo
Evaluates the improved entropy-increase, Landauer and second-law equalities as
numerical residuals along exact unitary trajectories, together with the flux
form of the Landauer balance and the traditional reductions.

Sign conventions: Delta S is the *decrease* S(rho_S) - S(rho'_S) of the system
entropy; Delta I, Delta D, Delta Q, W and Delta F are final minus initial.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from entropy_info import correlation_information, joint_entropy, marginal_entropy, von_neumann_entropy
from errors import (DimensionError, InsufficientDataError, NonComparableError,
                    NonUnitaryTrajectoryError, ParameterError)
from operator_core import (TOLERANCES, DensityOperator, HermitianOperator, Partition,
                           SpectralDecomposition, density_from_pure, embed, expectation,
                           hermitian_eig, partial_trace)
from thermo_engine import (ThermalReference, WorkLedger, divergence_from_thermal,
                           free_energy, gibbs_state, heat, match_beta, work_ledger)
from utils.performance import measure_performance

logger = logging.getLogger(__name__)

JOINT_ENTROPY_WARN = 1e-8
JOINT_ENTROPY_FAIL = 1e-6
PRODUCT_TOL = 1e-9
EQUILIBRIUM_TOL = 1e-9
CORRELATION_TOL = 1e-9
PURE_STATE_TOL = 1e-12

RESIDUAL_FORMS = {
    'residual_entropy_increase': 'k*[(S_ME(t)-S_ME(0)) - (I(t)-I(0))]',
    'residual_landauer': 'beta*Q - [(S_sys(0)-S_sys(t)) + (I(t)-I(0)) + (D(t)-D(0))]',
    'residual_second_law': '(W - dF - dE_SB) - [(I(t)-I(0)) + (D(t)-D(0))]/beta',
    'sign_convention': 'dS is the decrease of system entropy; all other deltas are final minus initial',
    'thermal_reference': 'single Gibbs state of H_B matched to tr[H_B rho_B(0)]',
}


def residual_metadata() -> Dict[str, str]:
    """Algebraic form of every residual column"""
    return dict(RESIDUAL_FORMS)


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Joint state with the Hamiltonian terms in force at that instant"""
    rho_sb: DensityOperator
    partition: Partition
    h_s: HermitianOperator
    h_b: HermitianOperator
    h_int: HermitianOperator
    _divergences: Dict[int, float] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if len(self.partition) != 2:
            raise DimensionError(f"Snapshots are bipartite, got partition {list(self.partition.dims)}")
        self.partition.check(self.rho_sb.dim)
        d_s, d_b = self.partition.dims
        if self.h_s.dim != d_s or self.h_b.dim != d_b or self.h_int.dim != self.partition.total:
            raise DimensionError(
                f"Hamiltonian dims ({self.h_s.dim}, {self.h_b.dim}, {self.h_int.dim}) "
                f"do not fit partition {list(self.partition.dims)}"
            )

    @classmethod
    def uncoupled(cls, rho_sb: DensityOperator, partition: Partition,
                  h_s: HermitianOperator, h_b: HermitianOperator) -> 'Snapshot':
        return cls(rho_sb, partition, h_s, h_b, HermitianOperator.zeros(partition.total))

    @cached_property
    def rho_s(self) -> DensityOperator:
        return partial_trace(self.rho_sb, self.partition, {0})

    @cached_property
    def rho_b(self) -> DensityOperator:
        return partial_trace(self.rho_sb, self.partition, {1})

    @cached_property
    def s_system(self) -> float:
        return von_neumann_entropy(self.rho_s)

    @cached_property
    def s_bath(self) -> float:
        return von_neumann_entropy(self.rho_b)

    @cached_property
    def s_joint(self) -> float:
        return joint_entropy(self.rho_sb)

    @cached_property
    def correlation(self) -> float:
        value = self.s_system + self.s_bath - self.s_joint
        return 0.0 if -PRODUCT_TOL <= value < 0 else value

    @property
    def interaction_energy(self) -> float:
        return expectation(self.h_int, self.rho_sb)

    def divergence(self, thermal: ThermalReference) -> float:
        """D(rho_B||rho_th), memoised per reference"""
        key = id(thermal)
        if key not in self._divergences:
            self._divergences[key] = divergence_from_thermal(self.rho_b, thermal)
        return self._divergences[key]


@dataclass(frozen=True)
class Leg:
    """Piecewise-constant driving step: H_S and H_int held fixed for `duration`"""
    duration: float
    h_s: HermitianOperator
    h_int: HermitianOperator

    def __post_init__(self):
        if not self.duration > 0:
            raise ParameterError(f"Leg duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class ConditionReport:
    """Premises under which the traditional inequalities are recovered"""
    product: bool
    thermal_equilibrium: bool
    weak_coupling: bool
    correlation: float
    bath_divergence: float
    interaction_energy: float


@dataclass(frozen=True)
class ThermoRecord:
    """One time point of the ledger; deltas are cumulative from t = 0"""
    t: float
    s_system: float
    s_bath: float
    s_joint: float
    correlation: float
    d_bath: float
    heat: float
    work: WorkLedger
    f_system: float
    residual_landauer: float
    residual_second_law: float
    residual_entropy_increase: float
    conditions: ConditionReport


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered records generated from one configuration"""
    records: Tuple[ThermoRecord, ...]
    config_hash: str
    beta: float
    k: float = 1.0
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.records:
            raise InsufficientDataError("Trajectory has no records")
        times = np.array([r.t for r in self.records])
        if times[0] != 0.0:
            raise ParameterError(f"First record must be at t=0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise ParameterError("Record times must be strictly increasing")
        first = self.records[0]
        if first.heat != 0.0 or first.work.total_work != 0.0:
            raise ParameterError("First record must carry zero heat and work")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        if name == 'total_work':
            return np.array([r.work.total_work for r in self.records])
        return np.array([getattr(r, name) for r in self.records], dtype=float)


@dataclass(frozen=True)
class FluxPoint:
    t: float
    dq_beta: float
    ds: float
    di: float
    dd: float

    @property
    def residual(self) -> float:
        return self.dq_beta - (self.ds + self.di + self.dd)


@dataclass(frozen=True)
class ReductionGaps:
    """Slack in the traditional inequalities; each is >= 0 under its premises"""
    marginal_entropy_change: float
    landauer_gap: float
    second_law_gap: float
    sagawa_ueda_gap: float


@dataclass(frozen=True)
class CorrelationGrowthResult:
    holds: bool
    minimum: float
    initial: float
    dips_below_initial: bool


@dataclass(frozen=True)
class RefinementReport:
    """Richardson comparison of flux estimates on grids h, h/2, h/4"""
    steps: Tuple[int, int, int]
    coarse_difference: float
    fine_difference: float
    observed_order: float
    identity_residuals: Tuple[float, float, float]


def _require_unitary(before: Snapshot, after: Snapshot) -> None:
    drift = abs(after.s_joint - before.s_joint)
    if drift > JOINT_ENTROPY_FAIL:
        raise NonUnitaryTrajectoryError(f"Joint entropy changed by {drift:.3e}; evolution is not unitary")
    if drift > JOINT_ENTROPY_WARN:
        logger.warning(f"Joint entropy drift {drift:.3e} exceeds {JOINT_ENTROPY_WARN:.0e}")


def _bath_divergence(snapshot: Snapshot, thermal: ThermalReference) -> float:
    value = snapshot.divergence(thermal)
    if math.isinf(value):
        raise NonComparableError("Bath state leaves the support of the thermal reference")
    return value


def entropy_increase_residual(rho_i: DensityOperator, rho_f: DensityOperator,
                              p: Partition, k: float = 1.0) -> float:
    """k [Delta S_ME - Delta I]; vanishes for unitary evolution"""
    drift = abs(joint_entropy(rho_f) - joint_entropy(rho_i))
    if drift > JOINT_ENTROPY_FAIL:
        raise NonUnitaryTrajectoryError(f"Joint entropy changed by {drift:.3e}; evolution is not unitary")
    if drift > JOINT_ENTROPY_WARN:
        logger.warning(f"Joint entropy drift {drift:.3e} exceeds {JOINT_ENTROPY_WARN:.0e}")
    delta_me = marginal_entropy(rho_f, p) - marginal_entropy(rho_i, p)
    delta_i = correlation_information(rho_f, p) - correlation_information(rho_i, p)
    return k * (delta_me - delta_i)


def landauer_residual(before: Snapshot, after: Snapshot, thermal: ThermalReference) -> float:
    """beta Delta Q - (Delta S + Delta I + Delta D)"""
    _require_unitary(before, after)
    delta_q = heat(before.h_b, before.rho_b, after.rho_b)
    delta_s = before.s_system - after.s_system
    delta_i = after.correlation - before.correlation
    delta_d = _bath_divergence(after, thermal) - _bath_divergence(before, thermal)
    return thermal.beta * delta_q - (delta_s + delta_i + delta_d)


def _free_energy_change(before: Snapshot, after: Snapshot, beta: float) -> float:
    return free_energy(after.rho_s, after.h_s, beta) - free_energy(before.rho_s, before.h_s, beta)


def _ledger_between(before: Snapshot, after: Snapshot) -> WorkLedger:
    if not np.allclose(before.h_b.matrix, after.h_b.matrix, rtol=0, atol=TOLERANCES.herm_tol):
        raise ParameterError("Bath Hamiltonian must be time independent")
    return work_ledger(before.h_s, after.h_s, before.h_b, before.h_int, after.h_int,
                       before.rho_sb, after.rho_sb, before.partition,
                       marginals=(before.rho_s, before.rho_b, after.rho_s, after.rho_b))


def second_law_residual(before: Snapshot, after: Snapshot, thermal: ThermalReference) -> float:
    """(W - Delta F - Delta E_SB) - (Delta I + Delta D)/beta"""
    _require_unitary(before, after)
    ledger = _ledger_between(before, after)
    delta_f = _free_energy_change(before, after, thermal.beta)
    lhs = ledger.total_work - delta_f - ledger.interaction_term

    delta_i = after.correlation - before.correlation
    delta_d = _bath_divergence(after, thermal) - _bath_divergence(before, thermal)
    return lhs - (delta_i + delta_d) / thermal.beta


def traditional_reductions(before: Snapshot, after: Snapshot, thermal: ThermalReference) -> ReductionGaps:
    """Slack in Delta S_ME >= 0, beta Delta Q >= Delta S, W >= Delta F and the thermal-start bound"""
    ledger = _ledger_between(before, after)
    delta_f = _free_energy_change(before, after, thermal.beta)
    delta_s = before.s_system - after.s_system
    delta_q = ledger.heat
    delta_i = after.correlation - before.correlation
    return ReductionGaps(
        marginal_entropy_change=(after.s_system + after.s_bath) - (before.s_system + before.s_bath),
        landauer_gap=thermal.beta * delta_q - delta_s,
        second_law_gap=ledger.total_work - delta_f,
        sagawa_ueda_gap=ledger.total_work - delta_f - ledger.interaction_term - delta_i / thermal.beta,
    )


def condition_report(before: Snapshot, thermal: ThermalReference,
                     weak_tol: Optional[float] = None) -> ConditionReport:
    """Product, thermal-equilibrium and weak-coupling status of a snapshot"""
    tol = TOLERANCES.weak_tol if weak_tol is None else weak_tol
    divergence = before.divergence(thermal)
    interaction = before.interaction_energy
    return ConditionReport(
        product=before.correlation < PRODUCT_TOL,
        thermal_equilibrium=divergence < EQUILIBRIUM_TOL,
        weak_coupling=abs(interaction) <= tol * before.h_int.norm(),
        correlation=before.correlation,
        bath_divergence=divergence,
        interaction_energy=interaction,
    )


def thermal_reference_for(snapshot: Snapshot) -> ThermalReference:
    """Gibbs state of H_B with the same energy as the bath of `snapshot`"""
    energy = expectation(snapshot.h_b, snapshot.rho_b)
    return gibbs_state(snapshot.h_b, match_beta(snapshot.h_b, energy))


def _snapshot_entropy_increase(initial: Snapshot, current: Snapshot, k: float) -> float:
    _require_unitary(initial, current)
    delta_me = (current.s_system + current.s_bath) - (initial.s_system + initial.s_bath)
    return k * (delta_me - (current.correlation - initial.correlation))


def make_record(t: float, initial: Snapshot, current: Snapshot, thermal: ThermalReference,
                work: WorkLedger, k: float = 1.0) -> ThermoRecord:
    """Ledger entry for `current` relative to the t = 0 snapshot"""
    try:
        d_bath = _bath_divergence(current, thermal)
        landauer = landauer_residual(initial, current, thermal)
        second_law = second_law_residual(initial, current, thermal)
    except NonComparableError as e:
        logger.warning(f"Record at t={t:.6g} not comparable: {e}")
        d_bath = landauer = second_law = math.nan

    return ThermoRecord(
        t=float(t),
        s_system=current.s_system,
        s_bath=current.s_bath,
        s_joint=current.s_joint,
        correlation=current.correlation,
        d_bath=d_bath,
        heat=heat(current.h_b, initial.rho_b, current.rho_b) if t > 0 else 0.0,
        work=work,
        f_system=free_energy(current.rho_s, current.h_s, thermal.beta),
        residual_landauer=landauer,
        residual_second_law=second_law,
        residual_entropy_increase=_snapshot_entropy_increase(initial, current, k),
        conditions=condition_report(current, thermal),
    )


class _LegEvolution:
    """Exact propagation inside one constant-Hamiltonian leg"""

    def __init__(self, spectrum: SpectralDecomposition, start: np.ndarray, pure: bool):
        self.spectrum = spectrum
        self.pure = pure
        vectors = spectrum.eigenvectors
        if pure:
            self.coefficients = vectors.conj().T @ start
        else:
            self.coefficients = vectors.conj().T @ start @ vectors

    def state_at(self, tau: float) -> np.ndarray:
        """Joint state vector (pure) or matrix after time tau in this leg"""
        phases = np.exp(-1j * self.spectrum.eigenvalues * tau)
        vectors = self.spectrum.eigenvectors
        if self.pure:
            return vectors @ (phases * self.coefficients)
        return vectors @ (np.outer(phases, phases.conj()) * self.coefficients) @ vectors.conj().T


def _pure_vector(rho: DensityOperator) -> Optional[np.ndarray]:
    if abs(rho.purity() - 1.0) > PURE_STATE_TOL:
        return None
    values, vectors = np.linalg.eigh(rho.matrix)
    return vectors[:, -1]


def uniform_grid(t_max: float, steps: int) -> np.ndarray:
    if steps < 1 or not t_max > 0:
        raise ParameterError(f"Need t_max > 0 and steps >= 1, got t_max={t_max}, steps={steps}")
    return np.linspace(0.0, t_max, steps + 1)


@measure_performance
def build_trajectory(rho0: DensityOperator, legs: Sequence[Leg], h_b: HermitianOperator,
                     partition: Partition, steps: int, config_hash: str = '',
                     k: float = 1.0, thermal: Optional[ThermalReference] = None) -> Trajectory:
    """Propagate rho0 through piecewise-constant legs and ledger every grid point

    The thermal reference defaults to the Gibbs state of H_B matched to the bath
    energy at t = 0 and is held fixed along the whole trajectory.
    """
    if not legs:
        raise ParameterError("At least one leg is required")
    partition.check(rho0.dim)

    boundaries = np.cumsum([leg.duration for leg in legs])
    times = uniform_grid(float(boundaries[-1]), steps)
    bath = embed(h_b.matrix, partition, 1)
    spectra = [hermitian_eig(embed(leg.h_s.matrix, partition, 0) + bath + leg.h_int.matrix)
               for leg in legs]

    psi = _pure_vector(rho0)
    pure = psi is not None
    start = psi if pure else np.array(rho0.matrix)

    def leg_index(t: float) -> int:
        # leg j covers (T_{j-1}, T_j]; t = 0 belongs to leg 0
        return min(int(np.searchsorted(boundaries, t, side='left')), len(legs) - 1)

    initial = Snapshot(rho0, partition, legs[0].h_s, h_b, legs[0].h_int)
    if thermal is None:
        thermal = thermal_reference_for(initial)
    elif thermal.dim != h_b.dim:
        raise DimensionError(f"Thermal reference dim {thermal.dim} does not match H_B dim {h_b.dim}")
    logger.info(f"Trajectory: {len(legs)} leg(s), {len(times)} records, beta={thermal.beta:.6g}")

    evolution = _LegEvolution(spectra[0], start, pure)
    current_leg, leg_start = 0, 0.0
    previous, cumulative = initial, WorkLedger.zero()
    records = [make_record(0.0, initial, initial, thermal, cumulative, k)]

    for t in times[1:]:
        target = leg_index(t)
        while current_leg < target:
            # finish the current leg, then restart from its end state
            end_state = evolution.state_at(boundaries[current_leg] - leg_start)
            leg_start = float(boundaries[current_leg])
            current_leg += 1
            evolution = _LegEvolution(spectra[current_leg], end_state, pure)

        state = evolution.state_at(t - leg_start)
        rho = density_from_pure(state) if pure else DensityOperator.from_matrix(state)
        leg = legs[current_leg]
        snapshot = Snapshot(rho, partition, leg.h_s, h_b, leg.h_int)

        cumulative = cumulative + _ledger_between(previous, snapshot)
        records.append(make_record(float(t), initial, snapshot, thermal, cumulative, k))
        previous = snapshot

    return Trajectory(
        records=tuple(records),
        config_hash=config_hash,
        beta=thermal.beta,
        k=k,
        metadata=residual_metadata(),
    )


def flux_series(traj: Trajectory) -> List[FluxPoint]:
    """Rates beta dQ/dt, dS/dt (decrease), dI/dt, dD/dt by finite differences"""
    if len(traj) < 3:
        raise InsufficientDataError(f"Flux series needs at least 3 records, got {len(traj)}")
    times = traj.times
    steps = np.diff(times)
    h = float(steps[0])
    if not np.allclose(steps, h, rtol=1e-9, atol=0):
        raise ParameterError("Flux series requires a uniform time grid")

    s_system = traj.column('s_system')
    derivative = {
        'dq_beta': traj.beta * np.gradient(traj.column('heat'), h),
        'ds': np.gradient(s_system[0] - s_system, h),
        'di': np.gradient(traj.column('correlation'), h),
        'dd': np.gradient(traj.column('d_bath'), h),
    }
    return [
        FluxPoint(t=float(t), dq_beta=float(derivative['dq_beta'][i]), ds=float(derivative['ds'][i]),
                  di=float(derivative['di'][i]), dd=float(derivative['dd'][i]))
        for i, t in enumerate(times)
    ]


def _flux_matrix(traj: Trajectory) -> np.ndarray:
    return np.array([[p.dq_beta, p.ds, p.di, p.dd] for p in flux_series(traj)])


def richardson_refinement(build: Callable[[int], Trajectory], steps: int) -> RefinementReport:
    """Compare flux series on grids with `steps`, 2*steps and 4*steps intervals"""
    grids = (steps, 2 * steps, 4 * steps)
    trajectories = [build(n) for n in grids]
    fluxes = [_flux_matrix(traj) for traj in trajectories]

    # interior points of the coarse grid, mapped onto the finer grids
    coarse_idx = np.arange(1, steps)
    e_coarse = float(np.max(np.abs(fluxes[0][coarse_idx] - fluxes[1][2 * coarse_idx])))
    e_fine = float(np.max(np.abs(fluxes[1][2 * coarse_idx] - fluxes[2][4 * coarse_idx])))
    order = math.log2(e_coarse / e_fine) if e_fine > 0 and e_coarse > 0 else math.inf

    identity = tuple(float(np.max(np.abs([p.residual for p in flux_series(traj)])))
                     for traj in trajectories)
    logger.info(f"Richardson refinement over {grids}: observed order {order:.3f}")
    return RefinementReport(
        steps=grids,
        coarse_difference=e_coarse,
        fine_difference=e_fine,
        observed_order=order,
        identity_residuals=identity,
    )


def correlation_growth_check(traj: Trajectory) -> CorrelationGrowthResult:
    """Correlation information stays non-negative along a product-start trajectory"""
    values = traj.column('correlation')
    initial, minimum = float(values[0]), float(np.min(values))
    if initial >= PRODUCT_TOL:
        logger.info(f"Initial correlation {initial:.6g}: trajectory does not start from a product state")
    return CorrelationGrowthResult(
        holds=minimum >= -CORRELATION_TOL,
        minimum=minimum,
        initial=initial,
        dips_below_initial=minimum < initial - CORRELATION_TOL,
    )
