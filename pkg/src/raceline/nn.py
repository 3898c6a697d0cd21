"""Dense feedforward networks with exact reverse-mode gradients.

Everything is float64 and intentionally small: layers are plain weight
matrices, the forward pass caches what the backward pass needs, and the
backward pass returns gradients for every parameter plus the gradient
with respect to the input (the latter is what the policy update chains
through).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, TrainingError, UsageError


class Activation(Enum):
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    LINEAR = "linear"


def _apply_activation(act: Activation, z: np.ndarray) -> np.ndarray:
    if act is Activation.RELU:
        return np.maximum(z, 0.0)
    if act is Activation.TANH:
        return np.tanh(z)
    if act is Activation.SIGMOID:
        # stable for large |z|
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _activation_grad(act: Activation, z: np.ndarray, post: np.ndarray) -> np.ndarray:
    # derivative of ReLU at exactly 0 is taken as 0
    if act is Activation.RELU:
        return (z > 0.0).astype(np.float64)
    if act is Activation.TANH:
        return 1.0 - post * post
    if act is Activation.SIGMOID:
        return post * (1.0 - post)
    return np.ones_like(z)


@dataclass
class DenseLayer:
    """One fully connected layer: y = act(weights @ x + biases).

    weights has shape (out, in); biases has shape (out,).
    """

    weights: np.ndarray
    biases: np.ndarray
    activation: Activation

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class ForwardCache:
    """Per-layer values saved by forward() so backward() never recomputes."""

    inputs: list[np.ndarray]
    pre: list[np.ndarray]
    post: list[np.ndarray]
    squeeze: bool


@dataclass
class Mlp:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("network must have at least one layer")
        for i in range(len(self.layers) - 1):
            if self.layers[i + 1].in_dim != self.layers[i].out_dim:
                raise ConfigError(
                    f"layer {i + 1} expects {self.layers[i + 1].in_dim} inputs "
                    f"but layer {i} produces {self.layers[i].out_dim}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in fixed order: W0, b0, W1, b1, ..."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.biases)
        return out

    def forward(self, x) -> tuple[np.ndarray, ForwardCache]:
        """Run the network on a single vector or a (batch, in_dim) matrix.

        Returns the output plus a cache sufficient for backward().
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.ndim != 2 or h.shape[1] != self.in_dim:
            raise ConfigError(
                f"input has shape {x.shape}, expected last dimension {self.in_dim}"
            )
        cache = ForwardCache(inputs=[], pre=[], post=[], squeeze=squeeze)
        for layer in self.layers:
            cache.inputs.append(h)
            z = h @ layer.weights.T + layer.biases
            h = _apply_activation(layer.activation, z)
            cache.pre.append(z)
            cache.post.append(h)
        return (h[0] if squeeze else h), cache

    def backward(
        self,
        cache: ForwardCache,
        output_gradient,
        with_param_grads: bool = True,
    ) -> tuple[list[np.ndarray], np.ndarray]:
        """Backpropagate output_gradient through the cached forward pass.

        Returns (parameter_gradients, input_gradient). Parameter gradients
        follow the params() ordering and are summed over the batch; set
        with_param_grads=False to skip them (an empty list is returned)
        when only the input gradient is needed.
        """
        g = np.asarray(output_gradient, dtype=np.float64)
        if g.ndim == 1 and not cache.squeeze:
            raise UsageError("output_gradient is a vector but the cache is batched")
        if g.ndim == 1:
            g = g[None, :]
        if len(cache.inputs) != len(self.layers):
            raise UsageError("cache does not match this network")
        if g.shape != cache.pre[-1].shape:
            raise UsageError(
                f"output_gradient has shape {np.shape(output_gradient)}, "
                f"expected {cache.pre[-1].shape[1] if cache.squeeze else cache.pre[-1].shape}"
            )
        grads: list[np.ndarray] = [None] * (2 * len(self.layers)) if with_param_grads else []
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            x, z, post = cache.inputs[i], cache.pre[i], cache.post[i]
            if x.shape[1] != layer.in_dim or z.shape[1] != layer.out_dim:
                raise UsageError("cache does not match this network")
            dz = g * _activation_grad(layer.activation, z, post)
            if with_param_grads:
                grads[2 * i] = dz.T @ x
                grads[2 * i + 1] = dz.sum(axis=0)
            g = dz @ layer.weights
        return grads, (g[0] if cache.squeeze else g)


def init_network(
    layer_sizes,
    activations,
    rng,
    final_bound: float | None = 3e-3,
) -> Mlp:
    """Build an Mlp with fan-in uniform weights and zero biases.

    Hidden weights are uniform in +-1/sqrt(fan_in); the last layer is
    uniform in +-final_bound so initial outputs sit near zero (pass
    final_bound=None to use the fan-in rule there too). Deterministic
    for a given seed or generator.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ConfigError("need at least an input and an output size")
    if any(int(s) <= 0 for s in sizes):
        raise ConfigError(f"layer sizes must be positive, got {sizes}")
    acts = list(activations)
    if len(acts) != len(sizes) - 1:
        raise ConfigError(
            f"{len(sizes) - 1} layers need {len(sizes) - 1} activations, got {len(acts)}"
        )
    gen = np.random.default_rng(rng)
    layers = []
    for i, act in enumerate(acts):
        fan_in, fan_out = int(sizes[i]), int(sizes[i + 1])
        last = i == len(acts) - 1
        bound = final_bound if (last and final_bound is not None) else 1.0 / np.sqrt(fan_in)
        weights = gen.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(DenseLayer(weights, np.zeros(fan_out), act))
    return Mlp(layers)


def clone_network(net: Mlp) -> Mlp:
    return copy.deepcopy(net)


@dataclass
class Adam:
    """Adam with bias correction, operating in place on a parameter list."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], learning_rate: float, **kw) -> "Adam":
        opt = cls(learning_rate=learning_rate, **kw)
        opt.first_moment = [np.zeros_like(p) for p in params]
        opt.second_moment = [np.zeros_like(p) for p in params]
        return opt

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """One update: m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
        p <- p - lr * m_hat / (sqrt(v_hat) + eps)."""
        if len(params) != len(self.first_moment) or len(grads) != len(params):
            raise UsageError(
                f"optimizer tracks {len(self.first_moment)} arrays, "
                f"got {len(params)} params / {len(grads)} grads"
            )
        for i, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape or p.shape != self.first_moment[i].shape:
                raise UsageError(f"shape mismatch in parameter block {i}")
            # a NaN/Inf component propagates through the sum
            if not np.isfinite(np.sum(g)):
                raise TrainingError(
                    f"non-finite gradient in parameter block {i} (layer {i // 2})"
                )
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        root_c2 = np.sqrt(1.0 - self.beta2**t)
        # p -= lr*(m/c1)/(sqrt(v/c2)+eps), with the corrections folded into
        # scalars so the update is one pass fewer over the arrays
        scale = self.learning_rate * root_c2 / c1
        shifted_eps = self.epsilon * root_c2
        scratch = scratch_for(params)
        for p, g, m, v, s in zip(params, grads, self.first_moment,
                                 self.second_moment, scratch):
            g = np.asarray(g, dtype=np.float64)
            np.multiply(m, self.beta1, out=m)
            np.multiply(g, 1.0 - self.beta1, out=s)
            np.add(m, s, out=m)
            np.multiply(v, self.beta2, out=v)
            np.multiply(g, g, out=s)
            np.multiply(s, 1.0 - self.beta2, out=s)
            np.add(v, s, out=v)
            np.sqrt(v, out=s)
            np.add(s, shifted_eps, out=s)
            np.divide(m, s, out=s)
            np.multiply(s, scale, out=s)
            np.subtract(p, s, out=p)


# shared per-shape work buffers; training touches the same handful of
# shapes tens of thousands of times, so avoid reallocating them
_SCRATCH: dict[tuple[int, ...], np.ndarray] = {}


def scratch_for(arrays: list[np.ndarray]) -> list[np.ndarray]:
    out = []
    for a in arrays:
        buf = _SCRATCH.get(a.shape)
        if buf is None:
            buf = np.empty(a.shape)
            _SCRATCH[a.shape] = buf
        out.append(buf)
    return out
