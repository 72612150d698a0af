"""Run configuration: TOML loading, validation and echoing.

Sections ``[device]``, ``[neuron]``, ``[stdp]`` and ``[timing]`` map onto the
parameter dataclasses of the same modules; ``[experiment]`` holds pipeline
settings. Unknown keys are rejected. See ``data/default.toml`` for the
documented schema with every default.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli
import tomli_w

from .device import R_BOUNDARY, V_READ, DeviceParams
from .encoding import TimingConfig
from .neuron import NeuronPhysParams
from .stdp import StdpConfig


class ConfigError(ValueError):
    """Invalid configuration file or values."""


@dataclass(frozen=True)
class ExperimentConfig:
    theta_class: float = 0.5
    runs: int = 10
    #: template-matching firing threshold
    match_threshold: float = 0.5
    #: random-shape generator settings
    shape_pixels: int = 8
    shape_max_overlap: int = 5

    def __post_init__(self):
        if self.theta_class <= 0:
            raise ValueError("theta_class must be positive")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0 < self.match_threshold <= 1:
            raise ValueError("match_threshold must lie in (0, 1]")


@dataclass(frozen=True)
class RunConfig:
    device: DeviceParams = field(default_factory=DeviceParams)
    neuron: NeuronPhysParams = field(default_factory=NeuronPhysParams)
    stdp: StdpConfig = field(default_factory=StdpConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    seed: int = 0

    def __post_init__(self):
        boundary = V_READ / self.neuron.i_ref
        if not math.isclose(boundary, R_BOUNDARY, rel_tol=1e-9):
            raise ConfigError(f"0.3 V / i_ref = {boundary:.6g} ohm, must equal the 30 kOhm boundary")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        out = {"seed": self.seed}
        for f in fields(self):
            if f.name != "seed":
                out[f.name] = {k: list(v) if isinstance(v, tuple) else v
                               for k, v in asdict(getattr(self, f.name)).items()}
        return out


_SECTIONS = {"device": DeviceParams, "neuron": NeuronPhysParams, "stdp": StdpConfig,
             "timing": TimingConfig, "experiment": ExperimentConfig}


def _build(cls, name, values):
    if not isinstance(values, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
    kw = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}]: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    unknown = sorted(set(data) - set(_SECTIONS) - {"seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    kw = {name: _build(cls, name, data.get(name, {})) for name, cls in _SECTIONS.items()}
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    return RunConfig(seed=seed, **kw)


def load_config(path=None) -> RunConfig:
    """Read a TOML run configuration; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        data = tomli.loads(Path(path).read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def write_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(cfg))
    return path
