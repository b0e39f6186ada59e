#!/usr/bin/env python3
"""
Identity Gates for qthermo
Random-instance verification of the entropy-increase, Landauer, second-law and
Gibbs identities, the traditional inequalities under their premises, and the
non-negativity of correlations generated from product states.
"""

import functools
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config.settings import get_settings
from errors import QThermoError
from law_ledger import (Leg, Snapshot, build_trajectory, condition_report, entropy_increase_residual,
                        landauer_residual, correlation_growth_check, thermal_reference_for,
                        traditional_reductions)
from operator_core import (DensityOperator, HermitianOperator, Partition, embed, evolve,
                           hermitian_eig, kron)
from thermo_engine import gibbs_identity_residual, gibbs_state, match_beta
from utils.performance import measure_performance
from utils.random_states import (BATH_DIMS, make_rng, random_bipartite_dims, random_density_matrix,
                                 random_hermitian, random_product_matrix, random_tripartite_dims,
                                 random_unitary)

logger = logging.getLogger(__name__)

# Inequalities are checked against this slack
INEQUALITY_TOL = 1e-9
# Product-start trajectories are costlier; one per this many instances
TRAJECTORY_STRIDE = 10
TRAJECTORY_STEPS = 8
# Key under which measure_performance records run_all
RUN_ALL_METRIC = f"{__name__}.run_all.duration_ms"


class ValidationResult(Enum):
    """Gate outcome"""
    PASS = "pass"
    FAIL = "fail"


@dataclass
class GateResult:
    """Outcome of one identity suite"""
    gate_name: str
    result: ValidationResult
    instances: int
    failures: int
    max_residual: float
    tolerance: float
    duration_ms: float = 0.0
    issues: List[str] = field(default_factory=list)
    timestamp: Optional[datetime] = None

    def __post_init__(self):
        if self.timestamp is None:
            self.timestamp = datetime.now()

    @property
    def passed(self) -> bool:
        return self.result is ValidationResult.PASS

    def as_row(self) -> Dict[str, object]:
        return {
            'gate': self.gate_name,
            'result': self.result.value,
            'instances': self.instances,
            'failures': self.failures,
            'max_residual': self.max_residual,
            'tolerance': self.tolerance,
        }


@dataclass
class VerificationReport:
    seed: int
    instances: int
    gates: List[GateResult]

    @property
    def passed(self) -> bool:
        return all(gate.passed for gate in self.gates)


InstanceOutcome = Tuple[float, Optional[str]]


def _guarded(check: Callable[[int, int], float], seed: int, index: int) -> InstanceOutcome:
    try:
        return float(check(seed, index)), None
    except QThermoError as e:
        return math.nan, f"instance {index}: {type(e).__name__}: {e}"


def _correlated_bath_start(rng: np.random.Generator, p: Partition, h_b: np.ndarray) -> DensityOperator:
    """Mixture of a product-with-Gibbs-bath state and a random correlated state"""
    d_s, d_b = p.dims
    scale = max(np.max(np.abs(np.linalg.eigvalsh(h_b))), 1e-12)
    bath = gibbs_state(HermitianOperator.from_matrix(h_b), rng.uniform(0.5, 3.0) / scale).state
    product = kron(random_density_matrix(d_s, rng), bath.matrix)
    weight = rng.uniform(0.0, 0.5)
    return DensityOperator.from_matrix((1 - weight) * product + weight * random_density_matrix(p.total, rng))


def _entropy_increase_instance(seed: int, index: int) -> float:
    rng = make_rng(seed, 1, index)
    dims = random_tripartite_dims(rng) if index % 4 == 3 else random_bipartite_dims(rng)
    p = Partition(dims)
    rank = int(rng.integers(1, p.total + 1))
    rho = DensityOperator.from_matrix(random_density_matrix(p.total, rng, rank))
    rho_prime = evolve(rho, random_unitary(p.total, rng))
    return entropy_increase_residual(rho, rho_prime, p)


def _landauer_instance(seed: int, index: int) -> float:
    rng = make_rng(seed, 2, index)
    p = Partition(random_bipartite_dims(rng))
    d_s, d_b = p.dims
    h_s = HermitianOperator.from_matrix(random_hermitian(d_s, rng))
    h_b_matrix = random_hermitian(d_b, rng)
    h_b = HermitianOperator.from_matrix(h_b_matrix)
    rho = _correlated_bath_start(rng, p, h_b_matrix)
    rho_prime = evolve(rho, random_unitary(p.total, rng))

    before = Snapshot.uncoupled(rho, p, h_s, h_b)
    after = Snapshot.uncoupled(rho_prime, p, h_s, h_b)
    return landauer_residual(before, after, thermal_reference_for(before))


def _second_law_instance(seed: int, index: int) -> float:
    rng = make_rng(seed, 3, index)
    p = Partition(random_bipartite_dims(rng))
    d_s, d_b = p.dims
    h_b_matrix = random_hermitian(d_b, rng)
    h_b = HermitianOperator.from_matrix(h_b_matrix)
    rho = _correlated_bath_start(rng, p, h_b_matrix)
    legs = [
        Leg(duration=float(rng.uniform(0.2, 2.0)),
            h_s=HermitianOperator.from_matrix(random_hermitian(d_s, rng)),
            h_int=HermitianOperator.from_matrix(random_hermitian(p.total, rng, scale=0.5)))
        for _ in range(2)
    ]
    trajectory = build_trajectory(rho, legs, h_b, p, steps=2)
    return float(np.max(np.abs(trajectory.column('residual_second_law'))))


def _gibbs_identity_instance(seed: int, index: int) -> float:
    rng = make_rng(seed, 4, index)
    d_b = int(rng.choice(BATH_DIMS))
    h_b = HermitianOperator.from_matrix(random_hermitian(d_b, rng))
    rho_b = DensityOperator.from_matrix(random_density_matrix(d_b, rng))
    energy = float(np.real(np.trace(h_b.matrix @ rho_b.matrix)))
    thermal = gibbs_state(h_b, match_beta(h_b, energy))
    return gibbs_identity_residual(rho_b, thermal)


def _traditional_instance(seed: int, index: int) -> float:
    """Largest violation of beta dQ >= dS and W >= dF from a product, thermal, uncoupled start"""
    rng = make_rng(seed, 5, index)
    p = Partition(random_bipartite_dims(rng))
    d_s, d_b = p.dims
    h_s = HermitianOperator.from_matrix(random_hermitian(d_s, rng))
    h_s_final = HermitianOperator.from_matrix(random_hermitian(d_s, rng))
    h_b = HermitianOperator.from_matrix(random_hermitian(d_b, rng))
    scale = max(h_b.norm(), 1e-12)
    bath = gibbs_state(h_b, rng.uniform(0.2, 3.0) / scale).state
    rho = DensityOperator.from_matrix(kron(random_density_matrix(d_s, rng), bath.matrix))

    # coupling acts only during the evolution; both endpoints are uncoupled
    coupling = random_hermitian(p.total, rng, scale=0.5)
    generator = embed(h_s.matrix, p, 0) + embed(h_b.matrix, p, 1) + coupling
    rho_prime = evolve(rho, hermitian_eig(generator).propagator(float(rng.uniform(0.2, 3.0))))

    before = Snapshot.uncoupled(rho, p, h_s, h_b)
    after = Snapshot.uncoupled(rho_prime, p, h_s_final, h_b)
    thermal = thermal_reference_for(before)
    conditions = condition_report(before, thermal)
    if not (conditions.product and conditions.thermal_equilibrium and conditions.weak_coupling):
        raise QThermoError(f"Start state not flagged product/thermal/weak: {conditions}")
    gaps = traditional_reductions(before, after, thermal)
    return max(0.0, -gaps.landauer_gap, -gaps.second_law_gap, -gaps.marginal_entropy_change)


def _product_start_instance(seed: int, index: int) -> float:
    """Negative part of the smallest correlation along a product-start trajectory"""
    rng = make_rng(seed, 6, index)
    p = Partition(random_bipartite_dims(rng))
    d_s, d_b = p.dims
    rho = DensityOperator.from_matrix(random_product_matrix(p.dims, rng))
    leg = Leg(duration=float(rng.uniform(0.5, 3.0)),
              h_s=HermitianOperator.from_matrix(random_hermitian(d_s, rng)),
              h_int=HermitianOperator.from_matrix(random_hermitian(p.total, rng, scale=0.5)))
    h_b = HermitianOperator.from_matrix(random_hermitian(d_b, rng))
    result = correlation_growth_check(build_trajectory(rho, [leg], h_b, p, steps=TRAJECTORY_STEPS))
    return max(0.0, -result.minimum)


class IdentityGatesEngine:
    """Runs every identity suite over seeded random instances"""

    def __init__(self, seed: Optional[int] = None, instances: Optional[int] = None,
                 jobs: Optional[int] = None, tolerance: Optional[float] = None):
        self.settings = get_settings()
        self.seed = self.settings['QTHERMO_DEFAULT_SEED'] if seed is None else int(seed)
        self.instances = self.settings['QTHERMO_VERIFY_INSTANCES'] if instances is None else int(instances)
        jobs = self.settings['QTHERMO_JOBS'] if jobs is None else int(jobs)
        self.jobs = jobs or os.cpu_count() or 1
        self.tolerance = self.settings['QTHERMO_IDENTITY_TOL'] if tolerance is None else tolerance

    def _evaluate(self, check: Callable[[int, int], float], count: int) -> List[InstanceOutcome]:
        task = functools.partial(_guarded, check, self.seed)
        if self.jobs == 1 or count < 2:
            return [task(i) for i in range(count)]
        chunksize = max(1, count // (4 * self.jobs))
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(task, range(count), chunksize=chunksize))

    def _run_gate(self, name: str, check: Callable[[int, int], float], count: int,
                  tolerance: float) -> GateResult:
        start = time.perf_counter()
        outcomes = self._evaluate(check, count)
        residuals = np.array([abs(value) for value, _ in outcomes], dtype=float)
        issues = [message for _, message in outcomes if message]

        bad = ~np.isfinite(residuals) | (residuals >= tolerance)
        failures = int(np.count_nonzero(bad))
        finite = residuals[np.isfinite(residuals)]
        max_residual = float(finite.max()) if finite.size else 0.0
        if failures and not issues:
            issues.append(f"{failures} instance(s) above tolerance {tolerance:.1e}")

        result = GateResult(
            gate_name=name,
            result=ValidationResult.FAIL if failures else ValidationResult.PASS,
            instances=count,
            failures=failures,
            max_residual=max_residual,
            tolerance=tolerance,
            duration_ms=(time.perf_counter() - start) * 1000,
            issues=issues[:10],
        )
        log = logger.warning if failures else logger.info
        log(f"Gate {name}: {result.result.value} ({count} instances, max residual {max_residual:.3e})")
        return result

    def run_entropy_increase(self) -> GateResult:
        return self._run_gate('entropy_increase', _entropy_increase_instance, self.instances, self.tolerance)

    def run_landauer(self) -> GateResult:
        return self._run_gate('landauer', _landauer_instance, self.instances, self.tolerance)

    def run_second_law(self) -> GateResult:
        return self._run_gate('second_law', _second_law_instance, self.instances, self.tolerance)

    def run_gibbs_identity(self) -> GateResult:
        return self._run_gate('gibbs_identity', _gibbs_identity_instance, self.instances, self.tolerance)

    def run_traditional_reductions(self) -> GateResult:
        return self._run_gate('traditional_reductions', _traditional_instance, self.instances, INEQUALITY_TOL)

    def run_product_start(self) -> GateResult:
        count = 0 if self.instances == 0 else max(1, self.instances // TRAJECTORY_STRIDE)
        return self._run_gate('product_start_correlation', _product_start_instance, count, INEQUALITY_TOL)

    @measure_performance
    def run_all(self) -> VerificationReport:
        logger.info(f"Verifying identities: seed={self.seed}, instances={self.instances}, jobs={self.jobs}")
        gates = [
            self.run_entropy_increase(),
            self.run_landauer(),
            self.run_second_law(),
            self.run_gibbs_identity(),
            self.run_traditional_reductions(),
            self.run_product_start(),
        ]
        return VerificationReport(seed=self.seed, instances=self.instances, gates=gates)
