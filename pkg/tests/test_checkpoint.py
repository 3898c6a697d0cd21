import numpy as np
import pytest

from raceline.checkpoint import (
    MAGIC,
    Checkpoint,
    checkpoint_bytes,
    load_checkpoint,
    save_checkpoint,
)
from raceline.config import TrainConfig
from raceline.errors import CheckpointError
from raceline.trainer import Trainer


@pytest.fixture(scope="module")
def small_trainer_checkpoint():
    cfg = TrainConfig(track="oval", episodes=1, max_steps=30, buffer_capacity=64,
                      warmup=40, batch_size=8, seed=3, out_dir="unused")
    trainer = Trainer(cfg)
    trainer.run_episode()
    return trainer.to_checkpoint()


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, small_trainer_checkpoint, tmp_path):
        first = tmp_path / "a.ddpg"
        second = tmp_path / "b.ddpg"
        save_checkpoint(small_trainer_checkpoint, first)
        loaded = load_checkpoint(first)
        save_checkpoint(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_fields_match(self, small_trainer_checkpoint, tmp_path):
        path = save_checkpoint(small_trainer_checkpoint, tmp_path / "c.ddpg")
        loaded = load_checkpoint(path)
        src = small_trainer_checkpoint
        assert loaded.config == src.config
        assert loaded.episode_index == src.episode_index
        assert loaded.global_step == src.global_step
        assert loaded.rng_states == src.rng_states
        for a, b in zip(loaded.actor_params, src.actor_params):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(loaded.critic_opt.second_moment, src.critic_opt.second_moment):
            np.testing.assert_array_equal(a, b)
        assert loaded.critic_opt.step_count == src.critic_opt.step_count
        np.testing.assert_array_equal(loaded.buffer_state["rewards"],
                                      src.buffer_state["rewards"])
        assert loaded.buffer_state["next"] == src.buffer_state["next"]


class TestCorruption:
    def test_bad_magic_rejected(self, small_trainer_checkpoint, tmp_path):
        path = tmp_path / "bad.ddpg"
        data = checkpoint_bytes(small_trainer_checkpoint)
        path.write_bytes(b"NOPE" + data[4:])
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_unsupported_version_rejected(self, small_trainer_checkpoint, tmp_path):
        path = tmp_path / "ver.ddpg"
        data = bytearray(checkpoint_bytes(small_trainer_checkpoint))
        data[4:8] = (99).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    @pytest.mark.parametrize("keep_fraction", [0.1, 0.5, 0.9, 0.999])
    def test_truncated_file_rejected_with_field_name(
            self, small_trainer_checkpoint, tmp_path, keep_fraction):
        data = checkpoint_bytes(small_trainer_checkpoint)
        path = tmp_path / "trunc.ddpg"
        path.write_bytes(data[: int(len(data) * keep_fraction)])
        with pytest.raises(CheckpointError, match="truncated file while reading"):
            load_checkpoint(path)

    def test_trailing_garbage_rejected(self, small_trainer_checkpoint, tmp_path):
        path = tmp_path / "extra.ddpg"
        path.write_bytes(checkpoint_bytes(small_trainer_checkpoint) + b"\x00\x01")
        with pytest.raises(CheckpointError, match="trailing"):
            load_checkpoint(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ddpg")

    def test_magic_constant(self):
        assert MAGIC == b"DDPG"
