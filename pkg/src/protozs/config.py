"""Run configuration shared by the CLI, the pipeline and sweeps."""

import json
import os
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError
from .proto import TrainConfig

ENV_VAR = "PROTOZS_CONFIG"


@dataclass
class RunConfig:
    vectors: str = ""
    graph: str = ""
    corpus: str = ""
    catalog: str = ""
    tau: float = 0.6
    hops: int = 1
    top_n: int = 5
    window: int = 3
    hidden: int = 300
    max_len: int = 128
    batch: int = 4
    lr: float = 0.01
    epochs: int = 10
    support: int = 5
    seed: int = 7
    m: int = 15
    count: int = 0  # augmented sentences per unseen relation; 0 = mean seen count
    eps: float = 1e-3
    prompts: bool = True

    def validate(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        for name in ("hops", "top_n", "hidden", "max_len", "batch", "support", "m"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"window must be odd and positive, got {self.window}")
        if self.lr < 0:
            raise ConfigError(f"lr must be non-negative, got {self.lr}")
        if self.epochs < 0 or self.count < 0:
            raise ConfigError("epochs and count must be non-negative")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        return self

    def train_config(self):
        return TrainConfig(learning_rate=self.lr, epochs=self.epochs, batch_size=self.batch,
                           seed=self.seed, support_per_class=self.support,
                           use_prompts=self.prompts)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        return RunConfig(**{**asdict(self), **changes})


def load_config(path=None, overrides=None):
    """Defaults, then the JSON file (``path`` or $PROTOZS_CONFIG), then ``overrides``."""
    values = {}
    path = path or os.environ.get(ENV_VAR)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None and k in known})
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
