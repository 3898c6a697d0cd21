import pytest

from raceline.config import TrainConfig, config_to_text, load_config, parse_config_text
from raceline.errors import ConfigError


class TestDefaults:
    def test_defaults_match_documented_hyperparameters(self):
        cfg = TrainConfig()
        assert cfg.buffer_capacity == 100_000
        assert cfg.gamma == 0.99
        assert cfg.actor_lr == 0.0001
        assert cfg.critic_lr == 0.001
        assert cfg.batch_size == 32
        assert cfg.tau == 0.001
        assert cfg.max_steps == 60_000


class TestParsing:
    def test_parse_overrides_and_comments(self):
        cfg = parse_config_text(
            "# comment\n"
            "track=scurve\n"
            "episodes = 12   # trailing comment\n"
            "gamma=0.5\n"
            "ou_mu=0.1,0.2,-0.3\n"
        )
        assert cfg.track == "scurve"
        assert cfg.episodes == 12
        assert cfg.gamma == 0.5
        assert cfg.ou_mu == (0.1, 0.2, -0.3)
        assert cfg.batch_size == 32  # untouched default

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config_text("learning_rate=0.1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("episodes=1\nepisodes=2\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="episodes"):
            parse_config_text("episodes=three\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key=value"):
            parse_config_text("episodes 3\n")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("track=oval\nepisodes=1\nseed=5\n")
        cfg = load_config(path)
        assert cfg.seed == 5

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.cfg")


class TestValidation:
    def test_zero_episodes_allowed(self):
        assert TrainConfig(episodes=0).episodes == 0

    @pytest.mark.parametrize("field,value", [
        ("episodes", -1), ("max_steps", 0), ("buffer_capacity", 0),
        ("batch_size", 0), ("checkpoint_interval", 0),
        ("gamma", 0.0), ("gamma", 1.5), ("tau", 0.0), ("tau", 2.0),
        ("actor_lr", 0.0), ("critic_lr", -1.0),
        ("reward_alpha", -0.1), ("warmup", -3),
    ])
    def test_out_of_range_values_rejected(self, field, value):
        with pytest.raises(ConfigError):
            TrainConfig(**{field: value})

    def test_warmup_must_cover_a_batch(self):
        with pytest.raises(ConfigError, match="warmup"):
            TrainConfig(warmup=8, batch_size=32)

    def test_ou_triples_must_have_three_entries(self):
        with pytest.raises(ConfigError, match="ou_sigma"):
            TrainConfig(ou_sigma=(0.1, 0.2))


class TestRoundTrip:
    def test_text_round_trip_is_identity(self):
        cfg = TrainConfig(track="scurve", episodes=7, gamma=0.875,
                          ou_sigma=(0.25, 0.125, 0.5), seed=99)
        assert parse_config_text(config_to_text(cfg)) == cfg

    def test_serialization_is_stable(self):
        cfg = TrainConfig()
        assert config_to_text(cfg) == config_to_text(TrainConfig())
