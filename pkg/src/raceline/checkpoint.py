"""Binary checkpoint format for training state.

Little-endian throughout: magic `DDPG`, a u32 format version, the
length-prefixed canonical config text, episode/step counters, JSON rng
states, then self-describing arrays (dtype code, ndim, shape, raw data)
in a fixed order: noise state, actor, critic, target actor, target
critic, both optimizer states, and the replay buffer contents. The
buffer rides along because resuming must reproduce the exact batches a
straight-through run would have sampled.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import TrainConfig, config_to_text, parse_config_text
from .errors import CheckpointError
from .nn import Adam

MAGIC = b"DDPG"
VERSION = 1

_DTYPES = {0: np.float64, 1: np.uint8}
_DTYPE_CODES = {np.dtype(np.float64): 0, np.dtype(np.uint8): 1}


@dataclass
class Checkpoint:
    version: int
    config: TrainConfig
    episode_index: int
    global_step: int
    rng_states: dict          # keys: buffer, noise, env
    noise_x: np.ndarray
    actor_params: list[np.ndarray]
    critic_params: list[np.ndarray]
    target_actor_params: list[np.ndarray]
    target_critic_params: list[np.ndarray]
    actor_opt: Adam
    critic_opt: Adam
    buffer_state: dict        # obs/actions/rewards/next_obs/terminals/next


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def bytes_(self, data: bytes):
        self.buf.write(data)

    def u32(self, v: int):
        self.buf.write(struct.pack("<I", v))

    def u64(self, v: int):
        self.buf.write(struct.pack("<Q", v))

    def f64(self, v: float):
        self.buf.write(struct.pack("<d", v))

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.bytes_(raw)

    def array(self, a: np.ndarray):
        a = np.ascontiguousarray(a)
        code = _DTYPE_CODES.get(a.dtype)
        if code is None:
            raise CheckpointError(f"unsupported array dtype {a.dtype}")
        self.buf.write(struct.pack("<B", code))
        self.buf.write(struct.pack("<B", a.ndim))
        for dim in a.shape:
            self.u64(dim)
        self.bytes_(a.tobytes())

    def array_group(self, arrays):
        self.u32(len(arrays))
        for a in arrays:
            self.array(a)

    def adam(self, opt: Adam):
        self.u64(opt.step_count)
        self.f64(opt.learning_rate)
        self.f64(opt.beta1)
        self.f64(opt.beta2)
        self.f64(opt.epsilon)
        self.array_group(opt.first_moment)
        self.array_group(opt.second_moment)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int, field: str) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"{self.source}: truncated file while reading {field}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self, field: str) -> int:
        return struct.unpack("<I", self.take(4, field))[0]

    def u64(self, field: str) -> int:
        return struct.unpack("<Q", self.take(8, field))[0]

    def f64(self, field: str) -> float:
        return struct.unpack("<d", self.take(8, field))[0]

    def text(self, field: str) -> str:
        n = self.u32(field + " length")
        try:
            return self.take(n, field).decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(f"{self.source}: field {field} is not valid UTF-8")

    def array(self, field: str) -> np.ndarray:
        code = self.take(1, field + " dtype")[0]
        if code not in _DTYPES:
            raise CheckpointError(f"{self.source}: bad dtype code {code} in {field}")
        ndim = self.take(1, field + " ndim")[0]
        shape = tuple(self.u64(field + " shape") for _ in range(ndim))
        dtype = np.dtype(_DTYPES[code])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = self.take(count * dtype.itemsize, field + " data")
        return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()

    def array_group(self, field: str) -> list[np.ndarray]:
        n = self.u32(field + " count")
        return [self.array(f"{field}[{i}]") for i in range(n)]

    def adam(self, field: str) -> Adam:
        opt = Adam(
            learning_rate=0.0,
            step_count=self.u64(field + " step_count"),
        )
        opt.learning_rate = self.f64(field + " learning_rate")
        opt.beta1 = self.f64(field + " beta1")
        opt.beta2 = self.f64(field + " beta2")
        opt.epsilon = self.f64(field + " epsilon")
        opt.first_moment = self.array_group(field + " first_moment")
        opt.second_moment = self.array_group(field + " second_moment")
        return opt


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    w = _Writer()
    w.bytes_(MAGIC)
    w.u32(ckpt.version)
    w.text(config_to_text(ckpt.config))
    w.u64(ckpt.episode_index)
    w.u64(ckpt.global_step)
    for key in ("buffer", "noise", "env"):
        w.text(json.dumps(ckpt.rng_states[key], sort_keys=True, separators=(",", ":")))
    w.array(ckpt.noise_x)
    w.array_group(ckpt.actor_params)
    w.array_group(ckpt.critic_params)
    w.array_group(ckpt.target_actor_params)
    w.array_group(ckpt.target_critic_params)
    w.adam(ckpt.actor_opt)
    w.adam(ckpt.critic_opt)
    b = ckpt.buffer_state
    w.u64(b["next"])
    w.array_group([
        b["obs"], b["actions"], b["rewards"], b["next_obs"],
        np.asarray(b["terminals"], dtype=np.uint8),
    ])
    return w.buf.getvalue()


def save_checkpoint(ckpt: Checkpoint, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(ckpt))
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}")
    r = _Reader(data, str(path))
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u32("version")
    if version != VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {version}, expected {VERSION}")
    config = parse_config_text(r.text("config"), source=f"{path}:config")
    episode_index = r.u64("episode_index")
    global_step = r.u64("global_step")
    rng_states = {key: json.loads(r.text(f"rng_states.{key}"))
                  for key in ("buffer", "noise", "env")}
    noise_x = r.array("noise_x")
    actor_params = r.array_group("actor_params")
    critic_params = r.array_group("critic_params")
    target_actor_params = r.array_group("target_actor_params")
    target_critic_params = r.array_group("target_critic_params")
    actor_opt = r.adam("actor_opt")
    critic_opt = r.adam("critic_opt")
    nxt = r.u64("buffer.next")
    obs, actions, rewards, next_obs, terminals = r.array_group("buffer")
    if r.pos != len(data):
        raise CheckpointError(f"{path}: {len(data) - r.pos} trailing bytes after buffer")
    return Checkpoint(
        version=version,
        config=config,
        episode_index=episode_index,
        global_step=global_step,
        rng_states=rng_states,
        noise_x=noise_x,
        actor_params=actor_params,
        critic_params=critic_params,
        target_actor_params=target_actor_params,
        target_critic_params=target_critic_params,
        actor_opt=actor_opt,
        critic_opt=critic_opt,
        buffer_state={
            "obs": obs, "actions": actions, "rewards": rewards,
            "next_obs": next_obs, "terminals": terminals.astype(bool), "next": nxt,
        },
    )
