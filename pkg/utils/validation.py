#!/usr/bin/env python3
"""
Configuration validation for qthermo
TOML run configurations are parsed into pydantic models; any failure becomes a
ConfigError that names the offending field.
"""

import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid')


class MatrixModel(_Strict):
    """Row-major flattened matrix; `imag` defaults to zeros"""
    real: List[float]
    imag: Optional[List[float]] = None

    @model_validator(mode='after')
    def check_lengths(self):
        if self.imag is not None and len(self.imag) != len(self.real):
            raise ValueError(f"imag has {len(self.imag)} entries but real has {len(self.real)}")
        return self

    def to_array(self, dim: int) -> np.ndarray:
        if len(self.real) != dim * dim:
            raise ValueError(f"expected {dim * dim} entries for a {dim}x{dim} matrix, got {len(self.real)}")
        values = np.array(self.real, dtype=np.complex128)
        if self.imag is not None:
            values = values + 1j * np.array(self.imag, dtype=float)
        return values.reshape(dim, dim)


class VectorModel(_Strict):
    real: List[float]
    imag: Optional[List[float]] = None

    def to_array(self, dim: int) -> np.ndarray:
        if len(self.real) != dim:
            raise ValueError(f"expected {dim} amplitudes, got {len(self.real)}")
        values = np.array(self.real, dtype=np.complex128)
        if self.imag is not None:
            if len(self.imag) != dim:
                raise ValueError(f"imag has {len(self.imag)} entries, expected {dim}")
            values = values + 1j * np.array(self.imag, dtype=float)
        return values


class JCParamsModel(_Strict):
    omega0: float = 1.0
    omega: float = Field(0.5, gt=0)
    g: float = 1.0
    n: int = Field(7, ge=2)
    xi_real: float = 0.5
    xi_imag: float = 0.0
    d_fock: Optional[int] = Field(None, ge=4)
    t_max: float = Field(30.0, gt=0)
    steps: int = Field(2000, ge=2)

    @model_validator(mode='after')
    def check_amplitude(self):
        if abs(complex(self.xi_real, self.xi_imag)) > 1.0:
            raise ValueError("|xi| must not exceed 1")
        if self.d_fock is not None and self.d_fock < self.n + 2:
            raise ValueError(f"d_fock must be >= n + 2 = {self.n + 2}")
        return self

    @property
    def xi(self) -> complex:
        return complex(self.xi_real, self.xi_imag)


class InitialStateModel(_Strict):
    """product: system (x) bath matrix or Gibbs bath; pure/matrix: full joint state; random: seeded"""
    kind: Literal['product', 'pure', 'matrix', 'random'] = 'product'
    system: Optional[MatrixModel] = None
    bath: Optional[MatrixModel] = None
    bath_beta: Optional[float] = None
    vector: Optional[VectorModel] = None
    matrix: Optional[MatrixModel] = None
    rank: Optional[int] = Field(None, ge=1)

    @model_validator(mode='after')
    def check_kind(self):
        if self.kind == 'product':
            if self.system is None:
                raise ValueError("product initial state needs 'system'")
            if (self.bath is None) == (self.bath_beta is None):
                raise ValueError("product initial state needs exactly one of 'bath' or 'bath_beta'")
        elif self.kind == 'pure' and self.vector is None:
            raise ValueError("pure initial state needs 'vector'")
        elif self.kind == 'matrix' and self.matrix is None:
            raise ValueError("matrix initial state needs 'matrix'")
        return self


class LegModel(_Strict):
    duration: float = Field(gt=0)
    h_s: MatrixModel
    h_int: Optional[MatrixModel] = None


class ScenarioModel(_Strict):
    name: str = 'scenario'
    dims: List[int]
    h_b: MatrixModel
    initial: InitialStateModel
    legs: List[LegModel] = Field(min_length=1)
    steps: int = Field(200, ge=2)
    k: float = Field(1.0, gt=0)

    @field_validator('dims')
    @classmethod
    def check_dims(cls, v):
        if len(v) != 2 or any(d < 1 for d in v):
            raise ValueError("dims must be [d_S, d_B] with positive entries")
        return v


class VerifyModel(_Strict):
    instances: int = Field(1000, ge=0)
    tolerance: float = Field(1e-8, gt=0)


class RunConfigModel(_Strict):
    command: Optional[Literal['fig1', 'fig2', 'fig3', 'fig4', 'verify', 'run', 'appendix']] = None
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    jobs: Optional[int] = Field(None, ge=0)
    output: Optional[str] = None
    jc: JCParamsModel = Field(default_factory=JCParamsModel)
    scenario: Optional[ScenarioModel] = None
    verify: VerifyModel = Field(default_factory=VerifyModel)


def _field_path(loc) -> str:
    return '.'.join(str(part) for part in loc)


def config_error_from(exc: ValidationError) -> ConfigError:
    """First validation error as a ConfigError carrying its field path"""
    first = exc.errors()[0]
    path = _field_path(first['loc'])
    message = first['msg']
    if exc.error_count() > 1:
        message += f" (and {exc.error_count() - 1} more)"
    return ConfigError(message, field=path or None)


def load_toml(path: Path) -> Dict[str, Any]:
    """Read a TOML file; syntax errors report line and column"""
    path = Path(path)
    try:
        with path.open('rb') as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")


def parse_run_config(data: Mapping[str, Any]) -> RunConfigModel:
    try:
        return RunConfigModel.model_validate(dict(data))
    except ValidationError as e:
        raise config_error_from(e)


def load_run_config(path: Optional[Path], command: Optional[str] = None) -> RunConfigModel:
    """Validated configuration from `path`, or defaults when no file is given

    A file that names a `command` can only drive that command.
    """
    if path is None:
        return RunConfigModel()
    config = parse_run_config(load_toml(path))
    if command is not None and config.command is not None and config.command != command:
        raise ConfigError(f"config is for '{config.command}', not '{command}'", field='command')
    logger.debug(f"Loaded configuration from {path}")
    return config


def config_hash(data: Mapping[str, Any]) -> str:
    """Short SHA-256 digest of the canonical JSON form of `data`"""
    canonical = json.dumps(data, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]
