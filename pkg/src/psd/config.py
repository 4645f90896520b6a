"""Run configuration: strict JSON schema mirroring the hyperparameter tables."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .encoder import PsdEncoderConfig
from .hierarchy import HighLevelConfig
from .metra import MetraConfig
from .nn import ConfigurationError
from .reward import RewardConfig
from .sac import SacConfig
from .sampling import SamplingBounds


@dataclass
class EnvConfig:
    name: str = "ring_world"
    episode_length: int = 200


@dataclass
class BoundsConfig:
    L_min: int = 5
    L_max: int = 20
    floor: int = 5
    N: int = 1
    alpha: float = 0.9
    beta: float = 0.4
    interval_episodes: int = 1000
    eval_episodes: int = 5
    adaptive: bool = False
    n_values: int = 4

    def make(self) -> SamplingBounds:
        return SamplingBounds(
            L_min=self.L_min, L_max=self.L_max, floor=self.floor, N=self.N,
            alpha=self.alpha, beta=self.beta,
            interval_episodes=self.interval_episodes,
            eval_episodes=self.eval_episodes,
        )


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    encoder: PsdEncoderConfig = field(default_factory=PsdEncoderConfig)
    agent: SacConfig = field(default_factory=SacConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    metra: MetraConfig | None = None
    high_level: HighLevelConfig | None = None
    seed: int = 0
    epochs: int = 100
    workers: int = 1
    out_dir: str = "runs/default"
    encoder_steps_per_epoch: int = 32
    checkpoint_every: int = 50

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if dataclasses.is_dataclass(v):
                out[f.name] = dataclasses.asdict(v)
            else:
                out[f.name] = v
        return out


def _build(cls, data: dict, path: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigurationError(
            f"unknown config key(s) {sorted(unknown)} in {path}"
        )
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigurationError(f"{path}: {e}")


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {sorted(unknown)}")
    kwargs = dict(data)
    sections = {
        "env": EnvConfig,
        "encoder": PsdEncoderConfig,
        "agent": SacConfig,
        "reward": RewardConfig,
        "bounds": BoundsConfig,
        "metra": MetraConfig,
        "high_level": HighLevelConfig,
    }
    for key, cls in sections.items():
        if key in kwargs and kwargs[key] is not None:
            if not isinstance(kwargs[key], dict):
                raise ConfigurationError(f"config section '{key}' must be an object")
            kwargs[key] = _build(cls, kwargs[key], key)
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: invalid JSON: {e}")
    return config_from_dict(data)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
