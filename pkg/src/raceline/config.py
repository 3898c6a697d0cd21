"""Training configuration and its flat key=value file format."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError


@dataclass
class TrainConfig:
    track: str = "oval"                 # built-in name or path to a .track file
    episodes: int = 200
    max_steps: int = 60_000             # per-episode step cap
    buffer_capacity: int = 100_000
    batch_size: int = 32
    gamma: float = 0.99
    tau: float = 0.001
    actor_lr: float = 0.0001
    critic_lr: float = 0.001
    reward_alpha: float = 1.0
    reward_beta: float = 1.0
    reward_gamma: float = 0.1
    ou_theta: tuple[float, float, float] = (0.6, 0.6, 1.0)
    ou_mu: tuple[float, float, float] = (0.5, -0.1, 0.0)
    ou_sigma: tuple[float, float, float] = (0.10, 0.05, 0.30)
    ou_dt: float = 1.0
    epsilon_decay_steps: int = 100_000  # linear noise-scale decay, 1 -> 0
    warmup: int = 300                   # transitions collected before updates start
    seed: int = 0
    checkpoint_interval: int = 10       # episodes between checkpoints
    out_dir: str = "runs/latest"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.episodes < 0:
            raise ConfigError(f"episodes must be >= 0, got {self.episodes}")
        for name in ("max_steps", "buffer_capacity", "batch_size",
                     "epsilon_decay_steps", "checkpoint_interval"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("gamma", "tau"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        for name in ("actor_lr", "critic_lr", "ou_dt"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("reward_alpha", "reward_beta", "reward_gamma"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.warmup < 0:
            raise ConfigError(f"warmup must be >= 0, got {self.warmup}")
        if self.warmup < self.batch_size:
            raise ConfigError(
                f"warmup ({self.warmup}) must cover at least one batch ({self.batch_size})")
        if self.batch_size > self.buffer_capacity:
            raise ConfigError("batch_size cannot exceed buffer_capacity")
        for name in ("ou_theta", "ou_mu", "ou_sigma"):
            v = getattr(self, name)
            if len(v) != 3:
                raise ConfigError(f"{name} needs 3 comma-separated values, got {v}")


def _parse_value(name: str, kind, raw: str):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        # float triple
        return tuple(float(part) for part in raw.split(","))
    except ValueError:
        raise ConfigError(f"config key {name}: cannot parse {raw!r}")


def parse_config_text(text: str, source: str = "<string>") -> TrainConfig:
    """Parse the flat key=value format; unknown keys are errors."""
    spec = {f.name: f.type for f in fields(TrainConfig)}
    kinds = {
        "track": str, "out_dir": str,
        "episodes": int, "max_steps": int, "buffer_capacity": int,
        "batch_size": int, "epsilon_decay_steps": int, "warmup": int,
        "seed": int, "checkpoint_interval": int,
        "ou_theta": tuple, "ou_mu": tuple, "ou_sigma": tuple,
    }
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in spec:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate config key {key!r}")
        values[key] = _parse_value(key, kinds.get(key, float), val)
    return TrainConfig(**values)


def load_config(path) -> TrainConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    return parse_config_text(text, source=str(path))


def config_to_text(config: TrainConfig) -> str:
    """Canonical serialization: every field, declaration order, repr floats."""
    lines = []
    for f in fields(TrainConfig):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            rendered = ",".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            rendered = repr(v)
        else:
            rendered = str(v)
        lines.append(f"{f.name}={rendered}")
    return "\n".join(lines) + "\n"
