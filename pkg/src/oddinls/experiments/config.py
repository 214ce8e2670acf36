"""Strict JSON run configuration.

Unknown keys and out-of-range values are rejected before any
computation starts.  Example::

    {
      "grid": {"L": 40, "N": 4096},
      "params": {"alpha": 4, "b": 0.5},
      "time": {"dt": 1e-3, "t_max": 10, "output_every": 100},
      "initial": {"kind": "odd_gaussian", "amplitude": 1, "width": 1}
    }
"""
from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..domain import DomainError, Grid, InitialSpec, PhysParams, ScatteringRegimeWarning
from ..integrator import Schedule
from ..observables import admissible_pair


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    L: float
    N: int


@dataclass(frozen=True)
class ParamsConfig:
    alpha: float
    b: float


@dataclass(frozen=True)
class TimeConfig:
    dt: float
    t_max: float
    output_every: int = 1
    checkpoint_every: int = 0


@dataclass(frozen=True)
class ConvergenceConfig:
    dt_list: tuple = (4e-3, 2e-3, 1e-3)
    refine: int = 8


@dataclass(frozen=True)
class HardyConfig:
    samples: int = 200
    p_values: tuple = (1.5, 2.0, 3.0)


@dataclass(frozen=True)
class WaveOperatorConfig:
    T_back: float
    amplitude: float = 0.1
    width: float = 1.0


@dataclass(frozen=True)
class ScatterConfig:
    window: tuple = (6.25, 12.5, 25.0, 50.0)
    tol: float = 1e-2
    r_values: tuple = (4.0,)
    wave_operator: Optional[WaveOperatorConfig] = None


@dataclass(frozen=True)
class SweepConfig:
    alpha: tuple = (3.5, 4.0, 5.0)
    b: tuple = (0.25, 0.5, 0.75)
    experiment: str = "evolve"


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig
    params: ParamsConfig
    time: TimeConfig
    initial: InitialSpec
    interval: tuple = (-1.0, 1.0)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    hardy: HardyConfig = field(default_factory=HardyConfig)
    scatter: ScatterConfig = field(default_factory=ScatterConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: Optional[str] = None
    seed: int = 0
    linear_only: bool = False

    # validated domain objects -------------------------------------------------
    def make_grid(self) -> Grid:
        return Grid(self.grid.L, self.grid.N)

    def make_params(self) -> PhysParams:
        return PhysParams(self.params.alpha, self.params.b, self.linear_only)

    def make_schedule(self) -> Schedule:
        t = self.time
        return Schedule(t.dt, t.t_max, t.output_every, t.checkpoint_every)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_NESTED = {
    "grid": GridConfig,
    "params": ParamsConfig,
    "time": TimeConfig,
    "initial": InitialSpec,
    "convergence": ConvergenceConfig,
    "hardy": HardyConfig,
    "scatter": ScatterConfig,
    "sweep": SweepConfig,
    "wave_operator": WaveOperatorConfig,
}

_SEQUENCES = {"interval", "dt_list", "p_values", "window", "r_values", "alpha", "b"}
_INTS = {"N", "output_every", "checkpoint_every", "refine", "samples", "seed", "mode"}


def _number(value, where: str, integer: bool):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: value must be finite")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        path = f"{where}.{key}" if where else key
        if key in _NESTED:
            kwargs[key] = None if value is None else _build(_NESTED[key], value, path)
        elif key in _SEQUENCES and cls is not ParamsConfig:
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{path}: expected a non-empty list")
            kwargs[key] = tuple(_number(v, path, False) for v in value)
        elif key in _INTS:
            kwargs[key] = _number(value, path, True)
        elif key in ("kind", "path", "experiment", "output_dir"):
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"{path}: expected a string")
            kwargs[key] = value
        elif key == "linear_only":
            if not isinstance(value, bool):
                raise ConfigError(f"{path}: expected true/false")
            kwargs[key] = value
        else:
            kwargs[key] = _number(value, path, False)
    missing = [
        name for name, f in known.items()
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
        and name not in kwargs
    ]
    if missing:
        raise ConfigError(f"{where or 'config'}: missing keys {missing}")
    try:
        return cls(**kwargs)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


EXPERIMENTS = ("evolve", "convergence", "hardy", "scatter", "sweep")


def validate(cfg: RunConfig) -> RunConfig:
    """Construct every domain object once so range errors surface early."""
    try:
        cfg.make_grid()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScatteringRegimeWarning)
            params = cfg.make_params()
        cfg.make_schedule()
        if len(cfg.interval) != 2 or not cfg.interval[0] < cfg.interval[1]:
            raise ConfigError("interval must be [a1, a2] with a1 < a2")
        if cfg.hardy.samples < 0 or any(p <= 1 for p in cfg.hardy.p_values):
            raise ConfigError("hardy: samples >= 0 and every p > 1 required")
        if cfg.convergence.refine < 2:
            raise ConfigError("convergence.refine must be >= 2")
        if not cfg.scatter.tol > 0:
            raise ConfigError("scatter.tol must be positive")
        if any(t < 0 for t in cfg.scatter.window):
            raise ConfigError("scatter.window times must be non-negative")
        if params.s_c > -0.5:
            for r in cfg.scatter.r_values:
                admissible_pair(params.s_c, r)
        if cfg.sweep.experiment not in EXPERIMENTS or cfg.sweep.experiment == "sweep":
            raise ConfigError(f"sweep.experiment must be one of {EXPERIMENTS[:-1]}")
        for a in cfg.sweep.alpha:
            for b in cfg.sweep.b:
                PhysParams(a, b)
        if cfg.seed < 0 or cfg.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def parse_config(data: dict) -> RunConfig:
    return validate(_build(RunConfig, data, ""))


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
