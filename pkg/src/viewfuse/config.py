"""Pipeline configuration: one documented JSON file, strictly validated.

Unknown keys are rejected so typos fail loudly instead of silently
running with defaults.
"""

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

STRATEGIES = ("ucb1", "epsilon_greedy", "thompson")
PROVIDER_ROLES = ("generate", "embed_text", "embed_image", "embed_cloud")


@dataclass
class PipelineConfig:
    blend_ratio: float = 0.2
    gate_threshold: float = 0.557
    eps: float = 0.15
    min_pts: int = 2
    strategy: str = "ucb1"
    exploration_weight: float = 0.5
    rounds: int = 50
    seed: int = 0
    epsilon: float = 0.1
    thompson_prior_alpha: float = 0.1
    thompson_prior_beta: float = 1.0
    use_ema_update: bool = False
    ema_rate: float = 0.1
    num_candidates: int = 5
    temperature: float = 0.7
    w_fb: float = 1.2
    point_budget: int = 10_000
    workers: int = 1
    cache_dir: str | None = None
    providers: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (0.0 <= self.blend_ratio <= 1.0, "blend_ratio must be in [0, 1]"),
            (0.0 < self.gate_threshold < 1.0, "gate_threshold must be in (0, 1)"),
            (0.0 < self.eps <= 2.0, "eps must be in (0, 2]"),
            (self.min_pts >= 1, "min_pts must be >= 1"),
            (self.strategy in STRATEGIES, f"strategy must be one of {STRATEGIES}"),
            (self.exploration_weight >= 0.0, "exploration_weight must be >= 0"),
            (self.rounds >= 1, "rounds must be >= 1"),
            (0.0 <= self.epsilon <= 1.0, "epsilon must be in [0, 1]"),
            (self.thompson_prior_alpha > 0.0, "thompson_prior_alpha must be > 0"),
            (self.thompson_prior_beta > 0.0, "thompson_prior_beta must be > 0"),
            (0.0 < self.ema_rate <= 1.0, "ema_rate must be in (0, 1]"),
            (self.num_candidates >= 1, "num_candidates must be >= 1"),
            (self.temperature >= 0.0, "temperature must be >= 0"),
            (self.w_fb >= 1.0, "w_fb must be >= 1"),
            (self.point_budget >= 1, "point_budget must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        for name in (
            "blend_ratio", "gate_threshold", "eps", "exploration_weight",
            "epsilon", "thompson_prior_alpha", "thompson_prior_beta",
            "ema_rate", "temperature", "w_fb",
        ):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not isinstance(self.providers, dict):
            raise ConfigError("providers must be an object")
        unknown_roles = set(self.providers) - set(PROVIDER_ROLES)
        if unknown_roles:
            raise ConfigError(f"unknown provider roles: {sorted(unknown_roles)}")

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        typed = {}
        for f in fields(cls):
            if f.name not in doc:
                continue
            value = doc[f.name]
            if f.name in ("min_pts", "rounds", "seed", "num_candidates",
                          "point_budget", "workers"):
                if not isinstance(value, int) or isinstance(value, bool):
                    raise ConfigError(f"{f.name} must be an integer")
            elif f.name == "use_ema_update":
                if not isinstance(value, bool):
                    raise ConfigError(f"{f.name} must be a boolean")
            elif f.name == "strategy":
                if not isinstance(value, str):
                    raise ConfigError("strategy must be a string")
            elif f.name == "cache_dir":
                if value is not None and not isinstance(value, str):
                    raise ConfigError("cache_dir must be a string or null")
            elif f.name == "providers":
                if not isinstance(value, dict):
                    raise ConfigError("providers must be an object")
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{f.name} must be a number")
                value = float(value)
            typed[f.name] = value
        try:
            return cls(**typed)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e.msg}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
