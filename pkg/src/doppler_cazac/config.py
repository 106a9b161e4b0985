"""JSON configuration models for experiments and scenario files."""

import json
import os
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .classes import (
    CONFIG_SCHEMA_VERSION,
    DEFAULT_OUTPUT_DIR,
    DESK_PRESET,
    EXPERIMENT_IDS,
    OUTPUT_DIR_ENV,
    FULL_PRESET,
    SPEED_OF_LIGHT,
    ConfigError,
    Scenario,
    SensingRequirements,
    Target,
)

__all__ = [
    "RequirementsModel",
    "SequenceModel",
    "SweepModel",
    "ExperimentConfig",
    "TargetModel",
    "ScenarioFile",
    "load_config",
    "load_scenario",
    "preset_config",
    "default_output_dir",
]

ExperimentId = Literal["feasible_region", "cazac_pslr", "pslr_vs_doppler", "roc", "cazac_roc", "fx_curve"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _strictly_monotone(name: str, values: Optional[List[float]]) -> Optional[List[float]]:
    if values is None:
        return values
    if not values:
        raise ValueError(f"{name} grid is empty")
    diffs = np.diff(np.asarray(values, dtype=float))
    if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError(f"{name} grid is not strictly monotone")
    return values


class RequirementsModel(_Strict):
    f_c: float = Field(FULL_PRESET["f_c"], gt=0, description="carrier frequency, Hz")
    T_s: float = Field(FULL_PRESET["T_s"], gt=0, description="sampling period, s")
    D_r: float = Field(FULL_PRESET["D_r"], gt=0, description="sensing range, m")
    u_max: float = Field(FULL_PRESET["u_max"], ge=0, description="speed limit, m/s")
    pr_db: float = Field(FULL_PRESET["P_r_db"], description="required PSLR, amplitude dB")
    c: float = Field(SPEED_OF_LIGHT, gt=0, description="propagation speed, m/s")

    def to_requirements(self) -> SensingRequirements:
        return SensingRequirements.from_db(self.f_c, self.T_s, self.D_r, self.u_max, self.pr_db, c=self.c)


class SequenceModel(_Strict):
    N: int = Field(FULL_PRESET["N"], ge=3)
    p: Optional[int] = Field(None, ge=1, description="designed root, computed when omitted")
    r: int = Field(FULL_PRESET["r"], ge=1)
    m: int = Field(FULL_PRESET["m"], ge=1)
    phi: Optional[int] = Field(None, ge=1, description="designed phi, searched when omitted")
    a: Optional[int] = Field(None, ge=0)

    @field_validator("N")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("N must be odd")
        return value


class SweepModel(_Strict):
    d_r: Optional[List[float]] = None
    pr_db: Optional[List[float]] = None
    u_max: Optional[List[float]] = None
    velocity: Optional[List[float]] = None
    gamma: Optional[List[float]] = None
    snr_db: Optional[List[float]] = None

    @field_validator("d_r", "pr_db", "u_max", "velocity", "gamma", "snr_db")
    @classmethod
    def _monotone(cls, value, info):
        return _strictly_monotone(info.field_name, value)


class ExperimentConfig(_Strict):
    """
    One experiment run.

    ``snr_db`` of None means a noiseless run. ROC runs use ``sweep.snr_db``
    instead when it is set. ``scale`` records which preset the values came
    from; the values themselves are always explicit.
    """

    schema_version: int = CONFIG_SCHEMA_VERSION
    experiment: ExperimentId
    seed: int = Field(..., ge=0, lt=2**64)
    requirements: RequirementsModel = RequirementsModel()
    sequence: SequenceModel = SequenceModel()
    sweep: SweepModel = SweepModel()
    trials: int = Field(FULL_PRESET["trials"], ge=1)
    n_random: int = Field(FULL_PRESET["n_random"], ge=1)
    snr_db: Optional[float] = FULL_PRESET["snr_db"]
    K: int = Field(FULL_PRESET["K"], ge=1)
    omega: int = Field(FULL_PRESET["omega"], ge=1)
    num_targets: int = Field(FULL_PRESET["num_targets"], ge=0)
    output_dir: Optional[str] = None
    scale: Literal["full", "desk"] = "full"
    workers: Optional[int] = Field(None, ge=1)
    plot: bool = False

    @field_validator("schema_version")
    @classmethod
    def _schema(cls, value: int) -> int:
        if value != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {CONFIG_SCHEMA_VERSION}")
        return value

    @property
    def snr(self) -> float:
        return float("inf") if self.snr_db is None else self.snr_db

    def snr_points(self) -> List[float]:
        return [float(s) for s in self.sweep.snr_db] if self.sweep.snr_db else [self.snr]

    def resolved_output_dir(self) -> str:
        return self.output_dir or default_output_dir()

    def scenario(self, N: int, requirements: Optional[SensingRequirements] = None) -> Scenario:
        return Scenario(
            targets=(),
            snr_db=self.snr,
            N=N,
            K=self.K,
            omega=self.omega,
            seed=self.seed,
            physical=requirements or self.requirements.to_requirements(),
            num_targets=self.num_targets,
        )

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class TargetModel(_Strict):
    d: float = Field(..., ge=0)
    u: float
    h_re: float = 1.0
    h_im: float = 0.0

    def to_target(self) -> Target:
        return Target(self.d, self.u, complex(self.h_re, self.h_im))


class ScenarioFile(_Strict):
    schema_version: int = CONFIG_SCHEMA_VERSION
    units: Dict[str, str] = Field(
        default_factory=lambda: {
            "d": "m",
            "u": "m/s",
            "snr_db": "dB per target, noiseless when null",
            "f_c": "Hz",
            "T_s": "s",
            "D_r": "m",
            "u_max": "m/s",
            "pr_db": "dB (amplitude)",
        }
    )
    targets: List[TargetModel] = Field(default_factory=list)
    snr_db: Optional[float] = None
    N: int = Field(..., ge=1)
    K: int = Field(..., ge=1)
    omega: int = Field(FULL_PRESET["omega"], ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    num_targets: Optional[int] = Field(None, ge=0)
    physical: RequirementsModel = RequirementsModel()

    @field_validator("schema_version")
    @classmethod
    def _schema(cls, value: int) -> int:
        if value != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {CONFIG_SCHEMA_VERSION}")
        return value

    def to_scenario(self) -> Scenario:
        targets = tuple(t.to_target() for t in self.targets)
        return Scenario(
            targets=targets,
            snr_db=float("inf") if self.snr_db is None else self.snr_db,
            N=self.N,
            K=self.K,
            omega=self.omega,
            seed=self.seed,
            physical=self.physical.to_requirements(),
            num_targets=len(targets) if self.num_targets is None else self.num_targets,
        )


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


def _load_json(path: str, operation: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Unable to read {path}", operation, details=str(e))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON", operation, details=str(e))
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object", operation)
    return data


def load_config(path: str, **overrides: Any) -> ExperimentConfig:
    """Parse an experiment config file; validation failures raise ConfigError."""
    data = _load_json(path, "load_config")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config {path}", "load_config", details=str(e))


def load_scenario(path: str) -> ScenarioFile:
    data = _load_json(path, "load_scenario")
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid scenario file {path}", "load_scenario", details=str(e))


# Lengths the full-scale requirements were written for, per experiment family
_ZC_EXPERIMENTS = ("feasible_region", "pslr_vs_doppler", "roc", "fx_curve")


def _default_sweep(experiment: str) -> Dict[str, List[float]]:
    if experiment == "feasible_region":
        return {
            "pr_db": [float(x) for x in range(0, 42, 2)],
            "d_r": [float(x) for x in range(5, 105, 5)],
            "u_max": [10.0, 20.0, 30.0],
        }
    if experiment == "cazac_pslr":
        return {"d_r": [10.0, 20.0, 30.0, 40.0, 50.0], "u_max": [10.0, 20.0, 30.0]}
    if experiment == "pslr_vs_doppler":
        return {"velocity": [float(u) for u in range(-20, 22, 2)]}
    if experiment in ("roc", "cazac_roc"):
        return {"gamma": [float(g) for g in np.logspace(-1, 6, 71)], "snr_db": [-5.0, -10.0]}
    return {}


def preset_config(experiment: str, seed: int, scale: str = "full", **overrides: Any) -> ExperimentConfig:
    """
    Build a config from the built-in presets.

    The desk preset shrinks N, K, r and the trial counts and stretches T_s
    by the length ratio, so v̄·N and RoI/N match the full-scale setup.

    Raises:
        ConfigError: Unknown experiment, scale or invalid overrides
    """
    if experiment not in EXPERIMENT_IDS:
        raise ConfigError(f"Unknown experiment {experiment!r}", "preset_config", details=f"known: {EXPERIMENT_IDS}")
    if scale not in ("full", "desk"):
        raise ConfigError(f"Unknown scale {scale!r}", "preset_config")
    data: Dict[str, Any] = {
        "experiment": experiment,
        "seed": seed,
        "scale": scale,
        "sweep": _default_sweep(experiment),
    }
    if scale == "desk":
        if experiment in _ZC_EXPERIMENTS:
            ratio = FULL_PRESET["N"] / DESK_PRESET["N"]
        else:
            ratio = (FULL_PRESET["r"] * FULL_PRESET["m"] ** 2) / (DESK_PRESET["r"] * DESK_PRESET["m"] ** 2)
        data["requirements"] = {"T_s": FULL_PRESET["T_s"] * ratio}
        data["sequence"] = {"N": DESK_PRESET["N"], "r": DESK_PRESET["r"], "m": DESK_PRESET["m"]}
        data["K"] = DESK_PRESET["K"]
        data["trials"] = DESK_PRESET["trials"]
        data["n_random"] = DESK_PRESET["n_random"]
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid {scale} preset for {experiment}", "preset_config", details=str(e))
