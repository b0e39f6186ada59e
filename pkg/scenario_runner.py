#!/usr/bin/env python3
"""
Scenario Runner for qthermo
Turns a validated scenario description (user Hamiltonians, initial state and
piecewise-constant legs) into a ledgered trajectory and its CSV rows.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.settings import get_tolerances
from errors import ConfigError, QThermoError
from law_ledger import Leg, Trajectory, build_trajectory
from operator_core import DensityOperator, HermitianOperator, Partition, density_from_pure, kron
from thermo_engine import gibbs_state
from utils.random_states import make_rng, random_density_matrix
from utils.validation import MatrixModel, RunConfigModel, ScenarioModel, config_hash, load_run_config

logger = logging.getLogger(__name__)

# Stream key for the random initial state of a scenario
RANDOM_STATE_STREAM = 7

TRAJECTORY_COLUMNS = [
    't', 's_system', 's_bath', 's_joint', 'correlation', 'd_bath', 'heat',
    'work_total', 'work_system', 'work_heat', 'work_interaction', 'f_system',
    'residual_entropy_increase', 'residual_landauer', 'residual_second_law',
    'product', 'thermal_equilibrium', 'weak_coupling',
]


@dataclass(frozen=True)
class Scenario:
    name: str
    partition: Partition
    h_b: HermitianOperator
    rho0: DensityOperator
    legs: Tuple[Leg, ...]
    steps: int
    k: float
    fingerprint: str


def _operator(model: MatrixModel, dim: int, path: str) -> HermitianOperator:
    try:
        return HermitianOperator.from_matrix(model.to_array(dim))
    except (ValueError, QThermoError) as e:
        raise ConfigError(str(e), field=path)


def _state(matrix: np.ndarray, path: str) -> DensityOperator:
    try:
        return DensityOperator.from_matrix(matrix)
    except QThermoError as e:
        raise ConfigError(str(e), field=path)


def _initial_state(model: ScenarioModel, partition: Partition, h_b: HermitianOperator,
                   seed: int) -> DensityOperator:
    initial = model.initial
    d_s, d_b = partition.dims
    try:
        if initial.kind == 'product':
            system = _state(initial.system.to_array(d_s), 'initial.system')
            if initial.bath is not None:
                bath = _state(initial.bath.to_array(d_b), 'initial.bath')
            else:
                bath = gibbs_state(h_b, initial.bath_beta).state
            return _state(kron(system.matrix, bath.matrix), 'initial')
        if initial.kind == 'pure':
            return density_from_pure(initial.vector.to_array(partition.total))
        if initial.kind == 'matrix':
            return _state(initial.matrix.to_array(partition.total), 'initial.matrix')
        rng = make_rng(seed, RANDOM_STATE_STREAM)
        return _state(random_density_matrix(partition.total, rng, initial.rank), 'initial')
    except ConfigError:
        raise
    except (ValueError, QThermoError) as e:
        raise ConfigError(str(e), field=f"initial.{initial.kind}")


def build_scenario(model: ScenarioModel, seed: int = 0) -> Scenario:
    """Numerical objects for a validated scenario; bad matrices raise ConfigError with their field path"""
    partition = Partition(tuple(model.dims))
    d_s, _ = partition.dims
    h_b = _operator(model.h_b, partition.dims[1], 'scenario.h_b')

    legs = []
    for i, leg in enumerate(model.legs):
        h_s = _operator(leg.h_s, d_s, f"scenario.legs.{i}.h_s")
        h_int = (HermitianOperator.zeros(partition.total) if leg.h_int is None
                 else _operator(leg.h_int, partition.total, f"scenario.legs.{i}.h_int"))
        legs.append(Leg(duration=leg.duration, h_s=h_s, h_int=h_int))

    rho0 = _initial_state(model, partition, h_b, seed)
    fingerprint = config_hash({'scenario': model.model_dump(), 'seed': seed})
    logger.info(f"Scenario '{model.name}': dims {list(partition.dims)}, {len(legs)} leg(s), {model.steps} steps")
    return Scenario(
        name=model.name,
        partition=partition,
        h_b=h_b,
        rho0=rho0,
        legs=tuple(legs),
        steps=model.steps,
        k=model.k,
        fingerprint=fingerprint,
    )


def run_scenario(scenario: Scenario) -> Trajectory:
    return build_trajectory(scenario.rho0, scenario.legs, scenario.h_b, scenario.partition,
                            scenario.steps, config_hash=scenario.fingerprint, k=scenario.k)


def scenario_from_config(config: RunConfigModel, seed: int) -> Scenario:
    """Build the `[scenario]` table of a loaded config with an already resolved seed"""
    if config.scenario is None:
        raise ConfigError("missing [scenario] table", field='scenario')
    return build_scenario(config.scenario, seed=seed)


def load_scenario(path: Path, seed: Optional[int] = None) -> Scenario:
    """Scenario from a TOML file; an explicit `seed` wins over the file's `seed`"""
    config = load_run_config(path)
    if seed is None:
        seed = config.seed if config.seed is not None else 0
    return scenario_from_config(config, seed)


def trajectory_rows(traj: Trajectory) -> List[Dict[str, Any]]:
    """One flat row per record with every ledger field and condition flag"""
    rows = []
    for r in traj.records:
        rows.append({
            't': r.t,
            's_system': r.s_system,
            's_bath': r.s_bath,
            's_joint': r.s_joint,
            'correlation': r.correlation,
            'd_bath': r.d_bath,
            'heat': r.heat,
            'work_total': r.work.total_work,
            'work_system': r.work.system_term,
            'work_heat': r.work.heat,
            'work_interaction': r.work.interaction_term,
            'f_system': r.f_system,
            'residual_entropy_increase': r.residual_entropy_increase,
            'residual_landauer': r.residual_landauer,
            'residual_second_law': r.residual_second_law,
            'product': r.conditions.product,
            'thermal_equilibrium': r.conditions.thermal_equilibrium,
            'weak_coupling': r.conditions.weak_coupling,
        })
    return rows


def trajectory_metadata(traj: Trajectory, seed: Optional[int] = None,
                        extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Provenance header: config hash, seed, beta, tolerances and residual definitions"""
    metadata: Dict[str, Any] = {'config_hash': traj.config_hash, 'beta': traj.beta, 'k': traj.k}
    if seed is not None:
        metadata['seed'] = seed
    metadata.update(extra or {})
    metadata.update({f"tol.{name}": value for name, value in asdict(get_tolerances()).items()})
    metadata.update(traj.metadata)
    return metadata
