"""Training and evaluation loops.

All randomness descends from the single config seed: a SeedSequence is
spawned into independent streams for network init, replay sampling,
exploration noise, and the environment, so two runs with the same
config are bit-identical and a checkpoint restores every stream
mid-flight.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import sim
from .checkpoint import VERSION, Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .ddpg import DdpgAgent, Experience, OuNoise, ReplayBuffer
from .errors import ConfigError, TrainingError
from .nn import Adam
from .sim import EpisodeMetrics, RewardWeights
from .track import TrackDefinition, resolve_track

METRICS_HEADER = ("episode,steps,total_reward,total_distance_m,"
                  "mean_speed_kmh,mean_step_gain,var_dist_center_m2,epsilon")


def format_metrics_row(episode: int, m: EpisodeMetrics, epsilon: float) -> str:
    return (f"{episode},{m.episode_steps},{m.total_reward!r},{m.total_distance_m!r},"
            f"{m.mean_speed_kmh!r},{m.mean_step_gain!r},{m.var_dist_center_m2!r},"
            f"{float(epsilon)!r}")


def rollout(
    agent: DdpgAgent,
    track: TrackDefinition,
    weights: RewardWeights = sim.DEFAULT_WEIGHTS,
    max_steps: int = sim.MAX_EPISODE_STEPS,
    noise: OuNoise | None = None,
    noise_rng: np.random.Generator | None = None,
    epsilon=0.0,
    env_rng: np.random.Generator | None = None,
):
    """Run one episode without learning; returns (results, states).

    `epsilon` may be a float or a zero-argument callable evaluated before
    each action, which lets a caller reproduce a per-step decay schedule.
    """
    state = sim.reset(track, env_rng)
    if noise is not None:
        noise.reset()
    obs = sim.observe(state, track)
    results, states = [], [state]
    while True:
        eps = epsilon() if callable(epsilon) else epsilon
        action = agent.act(obs, noise=noise, rng=noise_rng, epsilon=eps)
        state, res = sim.step(state, action, track, weights=weights, max_steps=max_steps)
        results.append(res)
        states.append(state)
        obs = res.observation
        if res.terminal:
            return results, states


def _rng_state(gen: np.random.Generator) -> dict:
    return gen.bit_generator.state

def _restore_rng(state: dict) -> np.random.Generator:
    gen = np.random.default_rng(0)
    gen.bit_generator.state = state
    return gen


class Trainer:
    """Owns the agent, environment, and replay state for one training run."""

    def __init__(self, config: TrainConfig):
        config.validate()
        self.config = config
        self.track = resolve_track(config.track)
        self.weights = RewardWeights(
            config.reward_alpha, config.reward_beta, config.reward_gamma)
        streams = np.random.SeedSequence(config.seed).spawn(4)
        self.agent = DdpgAgent(
            gamma=config.gamma, tau=config.tau,
            actor_lr=config.actor_lr, critic_lr=config.critic_lr,
            rng=np.random.default_rng(streams[0]))
        self.buffer = ReplayBuffer(
            config.buffer_capacity, rng=np.random.default_rng(streams[1]))
        self.noise = OuNoise(config.ou_theta, config.ou_mu, config.ou_sigma,
                             dt=config.ou_dt)
        self.noise_rng = np.random.default_rng(streams[2])
        self.env_rng = np.random.default_rng(streams[3])
        self.episode_index = 0
        self.global_step = 0

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint) -> "Trainer":
        trainer = cls.__new__(cls)
        config = ckpt.config
        trainer.config = config
        trainer.track = resolve_track(config.track)
        trainer.weights = RewardWeights(
            config.reward_alpha, config.reward_beta, config.reward_gamma)
        trainer.agent = DdpgAgent.from_parameters(
            ckpt.actor_params, ckpt.critic_params,
            ckpt.target_actor_params, ckpt.target_critic_params,
            ckpt.actor_opt, ckpt.critic_opt, config.gamma, config.tau)
        trainer.buffer = ReplayBuffer(
            config.buffer_capacity, rng=_restore_rng(ckpt.rng_states["buffer"]))
        trainer.buffer.restore_arrays(ckpt.buffer_state)
        trainer.noise = OuNoise(config.ou_theta, config.ou_mu, config.ou_sigma,
                                dt=config.ou_dt)
        trainer.noise.x = ckpt.noise_x.copy()
        trainer.noise_rng = _restore_rng(ckpt.rng_states["noise"])
        trainer.env_rng = _restore_rng(ckpt.rng_states["env"])
        trainer.episode_index = ckpt.episode_index
        trainer.global_step = ckpt.global_step
        return trainer

    def epsilon(self) -> float:
        return max(0.0, 1.0 - self.global_step / self.config.epsilon_decay_steps)

    def run_episode(self) -> EpisodeMetrics:
        """One episode of interaction with one update per step post-warmup."""
        cfg = self.config
        state = sim.reset(self.track, self.env_rng)
        self.noise.reset()
        obs = sim.observe(state, self.track)
        results, states = [], [state]
        while True:
            action = self.agent.act(
                obs, noise=self.noise, rng=self.noise_rng, epsilon=self.epsilon())
            state, res = sim.step(state, action, self.track,
                                  weights=self.weights, max_steps=cfg.max_steps)
            self.buffer.push(
                Experience(obs, action, res.reward, res.observation, res.terminal))
            self.global_step += 1
            if len(self.buffer) >= cfg.warmup:
                batch = self.buffer.sample(cfg.batch_size)
                targets = self.agent.td_targets(batch)
                self.agent.update_critic(batch, targets)
                self.agent.update_actor(batch)
                self.agent.soft_update_targets()
            results.append(res)
            states.append(state)
            obs = res.observation
            if res.terminal:
                break
        self.episode_index += 1
        return sim.episode_metrics(self.track, results, states)

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            version=VERSION,
            config=self.config,
            episode_index=self.episode_index,
            global_step=self.global_step,
            rng_states={
                "buffer": _rng_state(self.buffer.rng),
                "noise": _rng_state(self.noise_rng),
                "env": _rng_state(self.env_rng),
            },
            noise_x=self.noise.x.copy(),
            actor_params=[p.copy() for p in self.agent.actor.params()],
            critic_params=[p.copy() for p in self.agent.critic.params()],
            target_actor_params=[p.copy() for p in self.agent.target_actor.params()],
            target_critic_params=[p.copy() for p in self.agent.target_critic.params()],
            actor_opt=_copy_adam(self.agent.actor_opt),
            critic_opt=_copy_adam(self.agent.critic_opt),
            buffer_state=self.buffer.state_arrays(),
        )

    def run(self, out_dir=None) -> dict:
        """Train to config.episodes, writing metrics.csv and checkpoints.

        Returns the paths written. On a numerical failure a diagnostic
        checkpoint is saved before the error propagates.
        """
        out = Path(out_dir if out_dir is not None else self.config.out_dir)
        ckpt_dir = out / "checkpoints"
        metrics_path = out / "metrics.csv"
        try:
            out.mkdir(parents=True, exist_ok=True)
            ckpt_dir.mkdir(parents=True, exist_ok=True)
            probe = open(metrics_path, "w")
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc}")
        checkpoints = []
        with probe as fh:
            fh.write(METRICS_HEADER + "\n")
            while self.episode_index < self.config.episodes:
                try:
                    metrics = self.run_episode()
                except TrainingError:
                    save_checkpoint(self.to_checkpoint(), ckpt_dir / "diagnostic.ddpg")
                    raise
                fh.write(format_metrics_row(self.episode_index, metrics,
                                            self.epsilon()) + "\n")
                fh.flush()
                if self.episode_index % self.config.checkpoint_interval == 0:
                    path = ckpt_dir / f"ckpt-{self.episode_index:05d}.ddpg"
                    save_checkpoint(self.to_checkpoint(), path)
                    checkpoints.append(path)
        final_path = save_checkpoint(self.to_checkpoint(), ckpt_dir / "final.ddpg")
        checkpoints.append(final_path)
        return {"metrics": metrics_path, "final_checkpoint": final_path,
                "checkpoints": checkpoints}


def _copy_adam(opt: Adam) -> Adam:
    return Adam(
        learning_rate=opt.learning_rate, beta1=opt.beta1, beta2=opt.beta2,
        epsilon=opt.epsilon, step_count=opt.step_count,
        first_moment=[m.copy() for m in opt.first_moment],
        second_moment=[v.copy() for v in opt.second_moment],
    )


def train(config: TrainConfig, out_dir=None) -> dict:
    """Fresh training run; see Trainer.run for the outputs."""
    return Trainer(config).run(out_dir)


def agent_from_checkpoint(ckpt: Checkpoint) -> DdpgAgent:
    return DdpgAgent.from_parameters(
        ckpt.actor_params, ckpt.critic_params,
        ckpt.target_actor_params, ckpt.target_critic_params,
        ckpt.actor_opt, ckpt.critic_opt, ckpt.config.gamma, ckpt.config.tau)


def evaluate(checkpoint, track: str, episodes: int, seed: int = 0,
             out_dir=None) -> dict:
    """Roll the checkpointed policy noise-free and write the metrics file.

    `checkpoint` is a path or a loaded Checkpoint; `track` may differ
    from the one trained on. Returns the metrics rows and output path.
    """
    ckpt = checkpoint if isinstance(checkpoint, Checkpoint) else load_checkpoint(checkpoint)
    agent = agent_from_checkpoint(ckpt)
    track_def = resolve_track(track)
    cfg = ckpt.config
    weights = RewardWeights(cfg.reward_alpha, cfg.reward_beta, cfg.reward_gamma)
    env_rng = np.random.default_rng(np.random.SeedSequence(seed))
    rows = []
    for episode in range(1, episodes + 1):
        results, states = rollout(agent, track_def, weights=weights,
                                  max_steps=cfg.max_steps, env_rng=env_rng)
        rows.append(sim.episode_metrics(track_def, results, states))
    metrics_path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        metrics_path = out / "metrics.csv"
        with open(metrics_path, "w") as fh:
            fh.write(METRICS_HEADER + "\n")
            for episode, m in enumerate(rows, start=1):
                fh.write(format_metrics_row(episode, m, 0.0) + "\n")
    return {"rows": rows, "metrics": metrics_path}
