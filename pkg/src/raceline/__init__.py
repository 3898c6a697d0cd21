"""Continuous-control driving: a dense-network policy-gradient learner
plus a deterministic 2D closed-track simulator and training harness."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig, load_config, parse_config_text
from .ddpg import Batch, DdpgAgent, Experience, OuNoise, ReplayBuffer
from .errors import (
    CheckpointError,
    ConfigError,
    RacelineError,
    TrainingError,
    UsageError,
)
from .nn import Activation, Adam, DenseLayer, Mlp, init_network
from .sim import (
    CarParams,
    CarState,
    EpisodeMetrics,
    RewardWeights,
    StepResult,
    Termination,
    compute_reward,
    episode_metrics,
    observe,
    range_finders,
    reset,
    step,
)
from .track import TrackDefinition, load_track, resolve_track
from .trainer import Trainer, evaluate, rollout, train

__version__ = "0.1.0"

__all__ = [
    "Activation", "Adam", "Batch", "CarParams", "CarState", "Checkpoint",
    "CheckpointError", "ConfigError", "DdpgAgent", "DenseLayer",
    "EpisodeMetrics", "Experience", "Mlp", "OuNoise", "RacelineError",
    "ReplayBuffer", "RewardWeights", "StepResult", "Termination",
    "TrackDefinition", "TrainConfig", "Trainer", "TrainingError",
    "UsageError", "compute_reward", "episode_metrics", "evaluate",
    "init_network", "load_checkpoint", "load_config", "load_track",
    "observe", "parse_config_text", "range_finders", "reset",
    "resolve_track", "rollout", "save_checkpoint", "step", "train",
]
