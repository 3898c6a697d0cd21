"""Deterministic policy-gradient learner with target networks and replay.

The actor maps the 29-channel observation to (acceleration, brake,
steering); the critic scores (observation, action) pairs. Both keep
slow-moving target copies blended toward the online networks after
every update. Exploration adds mean-reverting noise to the actor's
output before clamping to the action ranges.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TrainingError, UsageError
from .nn import Activation, Adam, DenseLayer, Mlp, init_network, scratch_for
from .spaces import (
    ACTION_DIM,
    ACTION_HIGH,
    ACTION_LOW,
    OBS_ANGLE,
    OBS_DIM,
    OBS_RPM,
    OBS_SPEED_X,
    OBS_SPEED_Z,
    OBS_TRACK,
    OBS_TRACK_POS,
    OBS_WHEEL_SPIN,
    clamp_action,
)


def _default_obs_scale() -> np.ndarray:
    """Per-channel factors that bring raw sensor readings to O(1)."""
    scale = np.ones(OBS_DIM)
    scale[OBS_ANGLE] = 1.0 / np.pi
    scale[OBS_TRACK] = 1.0 / 200.0
    scale[OBS_TRACK_POS] = 1.0
    scale[OBS_SPEED_X : OBS_SPEED_Z + 1] = 1.0 / 300.0
    scale[OBS_WHEEL_SPIN] = 1.0 / 100.0
    scale[OBS_RPM] = 1.0
    return scale


OBS_SCALE = _default_obs_scale()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def squash_actions(raw: np.ndarray) -> np.ndarray:
    """Map raw actor heads into action ranges: sigmoid for acceleration
    and brake, tanh for steering."""
    out = np.empty_like(raw)
    out[..., :2] = _sigmoid(raw[..., :2])
    out[..., 2] = np.tanh(raw[..., 2])
    return out


def squash_grad(squashed: np.ndarray) -> np.ndarray:
    """Derivative of squash_actions wrt the raw heads, from the outputs."""
    g = np.empty_like(squashed)
    g[..., :2] = squashed[..., :2] * (1.0 - squashed[..., :2])
    g[..., 2] = 1.0 - squashed[..., 2] ** 2
    return g


@dataclass
class Experience:
    """One transition as stored in the replay buffer."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    terminal: bool


@dataclass
class Batch:
    """Column-stacked sample of transitions."""

    obs: np.ndarray        # (B, obs_dim)
    actions: np.ndarray    # (B, action_dim)
    rewards: np.ndarray    # (B,)
    next_obs: np.ndarray   # (B, obs_dim)
    terminals: np.ndarray  # (B,) bool

    def __len__(self) -> int:
        return self.obs.shape[0]


class ReplayBuffer:
    """Fixed-capacity FIFO ring sampled uniformly with replacement."""

    def __init__(self, capacity: int = 100_000, obs_dim: int = OBS_DIM,
                 action_dim: int = ACTION_DIM, rng=None):
        if capacity <= 0:
            raise ConfigError(f"buffer capacity must be positive, got {capacity}")
        self._capacity = int(capacity)
        self._obs = np.zeros((capacity, obs_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._terminals = np.zeros(capacity, dtype=bool)
        self._next = 0
        self._size = 0
        self.rng = np.random.default_rng(rng)

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        return self._size

    def push(self, exp: Experience) -> None:
        """Insert one transition, evicting the oldest once full."""
        if not np.isfinite(exp.reward):
            raise TrainingError(f"non-finite reward {exp.reward} pushed to buffer")
        i = self._next
        self._obs[i] = exp.state
        self._actions[i] = exp.action
        self._rewards[i] = exp.reward
        self._next_obs[i] = exp.next_state
        self._terminals[i] = exp.terminal
        self._next = (i + 1) % self._capacity
        self._size = min(self._size + 1, self._capacity)

    def sample(self, batch_size: int) -> Batch:
        """Uniform with-replacement sample, deterministic under self.rng."""
        if batch_size <= 0:
            raise UsageError(f"batch size must be positive, got {batch_size}")
        if batch_size > self._size:
            raise UsageError(
                f"cannot sample {batch_size} transitions from a buffer of {self._size}"
            )
        idx = self.rng.integers(0, self._size, size=batch_size)
        return Batch(
            obs=self._obs[idx],
            actions=self._actions[idx],
            rewards=self._rewards[idx],
            next_obs=self._next_obs[idx],
            terminals=self._terminals[idx],
        )

    def state_arrays(self) -> dict:
        """Internal storage for checkpointing (copies)."""
        return {
            "obs": self._obs[: self._size].copy(),
            "actions": self._actions[: self._size].copy(),
            "rewards": self._rewards[: self._size].copy(),
            "next_obs": self._next_obs[: self._size].copy(),
            "terminals": self._terminals[: self._size].copy(),
            "next": self._next,
        }

    def restore_arrays(self, data: dict) -> None:
        n = data["obs"].shape[0]
        if n > self._capacity:
            raise UsageError("stored buffer larger than capacity")
        self._obs[:n] = data["obs"]
        self._actions[:n] = data["actions"]
        self._rewards[:n] = data["rewards"]
        self._next_obs[:n] = data["next_obs"]
        self._terminals[:n] = data["terminals"].astype(bool)
        self._size = n
        self._next = int(data["next"])


class OuNoise:
    """Mean-reverting exploration noise, one channel per action component.

    Each sample applies x <- x + theta*(mu - x)*dt + sigma*sqrt(dt)*N(0,1).
    """

    def __init__(self, theta, mu, sigma, dt: float = 1.0):
        self.theta = np.asarray(theta, dtype=np.float64)
        self.mu = np.asarray(mu, dtype=np.float64)
        self.sigma = np.asarray(sigma, dtype=np.float64)
        if not (self.theta.shape == self.mu.shape == self.sigma.shape):
            raise ConfigError("theta, mu, sigma must have matching shapes")
        self.dt = float(dt)
        self.x = self.mu.copy()

    def reset(self) -> None:
        self.x = self.mu.copy()

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        self.x = (
            self.x
            + self.theta * (self.mu - self.x) * self.dt
            + self.sigma * np.sqrt(self.dt) * rng.standard_normal(self.x.shape)
        )
        return self.x.copy()


@dataclass
class Critic:
    """Action-value network with the action entering at the merge layer.

    The observation runs through a ReLU hidden layer and a linear map;
    the action runs through its own linear map; the two are summed
    point-wise, ReLU-activated, and fed to a ReLU hidden layer with a
    linear scalar head.
    """

    state_path: Mlp   # obs -> hidden (ReLU) -> merge width (Linear)
    action_path: Mlp  # action -> merge width (Linear)
    tail: Mlp         # merge width -> hidden (ReLU) -> 1 (Linear)

    @classmethod
    def initialize(cls, obs_dim, action_dim, state_hidden, merge_width,
                   tail_hidden, rng) -> "Critic":
        gen = np.random.default_rng(rng)
        state_path = init_network(
            [obs_dim, state_hidden, merge_width],
            [Activation.RELU, Activation.LINEAR], gen, final_bound=None)
        action_path = init_network(
            [action_dim, merge_width], [Activation.LINEAR], gen, final_bound=None)
        tail = init_network(
            [merge_width, tail_hidden, 1],
            [Activation.RELU, Activation.LINEAR], gen)
        return cls(state_path, action_path, tail)

    def params(self) -> list[np.ndarray]:
        return self.state_path.params() + self.action_path.params() + self.tail.params()

    def forward(self, obs, action):
        """Q for one (obs, action) pair or a batch of rows.

        Returns (q, cache): q is a float for single inputs, else (B,).
        """
        obs = np.asarray(obs, dtype=np.float64)
        action = np.asarray(action, dtype=np.float64)
        squeeze = obs.ndim == 1
        if squeeze != (action.ndim == 1):
            raise ConfigError("obs and action must both be single or both batched")
        o2 = obs[None, :] if squeeze else obs
        a2 = action[None, :] if squeeze else action
        if o2.shape[0] != a2.shape[0]:
            raise ConfigError("obs and action batch sizes differ")
        u, cs = self.state_path.forward(o2)
        v, ca = self.action_path.forward(a2)
        m_pre = u + v
        m = np.maximum(m_pre, 0.0)
        q2, ct = self.tail.forward(m)
        cache = (cs, ca, m_pre, ct, squeeze)
        return (float(q2[0, 0]) if squeeze else q2[:, 0]), cache

    def backward(self, cache, dq, with_param_grads: bool = True):
        """Gradients of sum_i dq_i * Q_i.

        Returns (param_grads, action_grad, obs_grad); param_grads follows
        params() ordering and is empty when with_param_grads is False.
        """
        cs, ca, m_pre, ct, squeeze = cache
        g = np.asarray(dq, dtype=np.float64).reshape(-1, 1)
        tail_grads, gm = self.tail.backward(ct, g, with_param_grads)
        gm = gm * (m_pre > 0.0)
        state_grads, dobs = self.state_path.backward(cs, gm, with_param_grads)
        action_grads, dact = self.action_path.backward(ca, gm, with_param_grads)
        grads = state_grads + action_grads + tail_grads if with_param_grads else []
        if squeeze:
            return grads, dact[0], dobs[0]
        return grads, dact, dobs


def _soft_blend(target_params, online_params, tau: float) -> None:
    scratch = scratch_for(target_params)
    for t, p, s in zip(target_params, online_params, scratch):
        np.multiply(t, 1.0 - tau, out=t)
        np.multiply(p, tau, out=s)
        np.add(t, s, out=t)


def _mlp_from_params(params: list[np.ndarray], activations) -> Mlp:
    if len(params) != 2 * len(activations):
        raise ConfigError(
            f"expected {2 * len(activations)} parameter arrays, got {len(params)}")
    layers = [
        DenseLayer(params[2 * i].copy(), params[2 * i + 1].copy(), act)
        for i, act in enumerate(activations)
    ]
    return Mlp(layers)


def actor_from_params(params: list[np.ndarray]) -> Mlp:
    """Rebuild an actor net from its flat parameter list (ReLU hiddens,
    linear head)."""
    n_layers = len(params) // 2
    acts = [Activation.RELU] * (n_layers - 1) + [Activation.LINEAR]
    return _mlp_from_params(params, acts)


def critic_from_params(params: list[np.ndarray]) -> Critic:
    """Rebuild a critic from its flat parameter list (fixed topology:
    2-layer state path, 1-layer action path, 2-layer tail)."""
    if len(params) != 10:
        raise ConfigError(f"critic expects 10 parameter arrays, got {len(params)}")
    state_path = _mlp_from_params(params[0:4], [Activation.RELU, Activation.LINEAR])
    action_path = _mlp_from_params(params[4:6], [Activation.LINEAR])
    tail = _mlp_from_params(params[6:10], [Activation.RELU, Activation.LINEAR])
    return Critic(state_path, action_path, tail)


class DdpgAgent:
    """Actor-critic learner with target copies and soft target updates."""

    def __init__(
        self,
        obs_dim: int = OBS_DIM,
        action_dim: int = ACTION_DIM,
        actor_hidden=(300, 600),
        critic_state_hidden: int = 300,
        critic_merge: int = 600,
        critic_tail_hidden: int = 600,
        gamma: float = 0.99,
        tau: float = 0.001,
        actor_lr: float = 1e-4,
        critic_lr: float = 1e-3,
        rng=None,
    ):
        if not 0.0 < gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {gamma}")
        if not 0.0 < tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {tau}")
        gen = np.random.default_rng(rng)
        sizes = [obs_dim, *actor_hidden, action_dim]
        acts = [Activation.RELU] * len(actor_hidden) + [Activation.LINEAR]
        self.actor = init_network(sizes, acts, gen)
        self.critic = Critic.initialize(
            obs_dim, action_dim, critic_state_hidden, critic_merge,
            critic_tail_hidden, gen)
        self.target_actor = copy.deepcopy(self.actor)
        self.target_critic = copy.deepcopy(self.critic)
        self.actor_opt = Adam.for_params(self.actor.params(), actor_lr)
        self.critic_opt = Adam.for_params(self.critic.params(), critic_lr)
        self.gamma = float(gamma)
        self.tau = float(tau)
        self.obs_scale = OBS_SCALE.copy() if obs_dim == OBS_DIM else np.ones(obs_dim)

    @classmethod
    def from_parameters(
        cls,
        actor_params,
        critic_params,
        target_actor_params,
        target_critic_params,
        actor_opt: Adam,
        critic_opt: Adam,
        gamma: float,
        tau: float,
    ) -> "DdpgAgent":
        """Reassemble an agent from checkpointed parameter arrays."""
        agent = cls.__new__(cls)
        agent.actor = actor_from_params(actor_params)
        agent.critic = critic_from_params(critic_params)
        agent.target_actor = actor_from_params(target_actor_params)
        agent.target_critic = critic_from_params(target_critic_params)
        agent.actor_opt = actor_opt
        agent.critic_opt = critic_opt
        agent.gamma = float(gamma)
        agent.tau = float(tau)
        obs_dim = agent.actor.in_dim
        agent.obs_scale = OBS_SCALE.copy() if obs_dim == OBS_DIM else np.ones(obs_dim)
        return agent

    # -- forward paths ----------------------------------------------------

    def _scaled(self, obs: np.ndarray) -> np.ndarray:
        return np.asarray(obs, dtype=np.float64) * self.obs_scale

    def policy(self, obs, net: Mlp | None = None) -> np.ndarray:
        """Squashed policy output for one observation or a batch."""
        net = net or self.actor
        raw, _ = net.forward(self._scaled(obs))
        return squash_actions(raw)

    def act(self, obs, noise: OuNoise | None = None, rng=None,
            epsilon: float = 0.0, deterministic: bool = False) -> np.ndarray:
        """Select an action; exploration noise is added before clamping."""
        action = self.policy(obs)
        if deterministic or noise is None:
            return action
        action = action + epsilon * noise.sample(rng)
        return clamp_action(action)

    def q_value(self, obs, action):
        q, _ = self.critic.forward(self._scaled(obs), action)
        return q

    # -- update rules ------------------------------------------------------

    def td_targets(self, batch: Batch) -> np.ndarray:
        """One-step bootstrapped targets from the target networks:
        y = r + gamma * Q'(s', mu'(s')) on non-terminal transitions."""
        if len(batch) == 0:
            raise UsageError("cannot compute targets for an empty batch")
        next_actions = self.policy(batch.next_obs, net=self.target_actor)
        q_next, _ = self.target_critic.forward(self._scaled(batch.next_obs), next_actions)
        return batch.rewards + np.where(batch.terminals, 0.0, self.gamma * q_next)

    def update_critic(self, batch: Batch, targets: np.ndarray) -> float:
        """One Adam step minimizing mean squared TD error; returns the
        pre-step loss."""
        targets = np.asarray(targets, dtype=np.float64)
        if targets.shape != (len(batch),):
            raise UsageError(
                f"targets shape {targets.shape} does not match batch of {len(batch)}")
        q, cache = self.critic.forward(self._scaled(batch.obs), batch.actions)
        diff = q - targets
        loss = float(np.mean(diff * diff))
        if not np.isfinite(loss):
            raise TrainingError(f"critic loss is not finite: {loss}")
        dq = (2.0 / len(batch)) * diff
        grads, _, _ = self.critic.backward(cache, dq)
        self.critic_opt.step(self.critic.params(), grads)
        return loss

    def actor_gradients(self, obs, dq_da=None):
        """Gradients of -(mean Q(s, mu(s))) wrt actor parameters.

        When dq_da is None the agent's own critic supplies dQ/da; pass an
        explicit (B, action_dim) array to drive the actor against an
        external action-value gradient. Returns (grads, mean_q) where
        mean_q is None for external gradients.
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        scaled = self._scaled(obs)
        raw, cache = self.actor.forward(scaled)
        actions = squash_actions(raw)
        mean_q = None
        if dq_da is None:
            q, c_cache = self.critic.forward(scaled, actions)
            _, dq_da, _ = self.critic.backward(
                c_cache, np.ones(len(obs)), with_param_grads=False)
            mean_q = float(np.mean(q))
        dz = (-np.asarray(dq_da) / len(obs)) * squash_grad(actions)
        grads, _ = self.actor.backward(cache, dz)
        return grads, mean_q

    def update_actor(self, batch: Batch) -> float:
        """One Adam ascent step on mean Q(s, mu(s)); the critic is read
        but never modified. Returns the pre-step objective estimate."""
        if len(batch) == 0:
            raise UsageError("cannot update the actor with an empty batch")
        grads, mean_q = self.actor_gradients(batch.obs)
        self.actor_opt.step(self.actor.params(), grads)
        return mean_q

    def apply_action_value_gradient(self, obs, dq_da) -> None:
        """One Adam ascent step against externally supplied dQ/da values."""
        grads, _ = self.actor_gradients(obs, dq_da=dq_da)
        self.actor_opt.step(self.actor.params(), grads)

    def soft_update_targets(self) -> None:
        """Blend targets toward online nets: t <- tau*p + (1-tau)*t."""
        _soft_blend(self.target_actor.params(), self.actor.params(), self.tau)
        _soft_blend(self.target_critic.params(), self.critic.params(), self.tau)
