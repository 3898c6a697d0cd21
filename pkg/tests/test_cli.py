import numpy as np
import pytest

from raceline.cli import main
from raceline.report import FIGURES, render_report
from raceline.trainer import METRICS_HEADER


@pytest.fixture()
def train_setup(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "track=oval\nepisodes=1\nmax_steps=30\nbuffer_capacity=128\n"
        "batch_size=8\nwarmup=20\nseed=4\ncheckpoint_interval=1\n")
    return cfg, tmp_path / "out"


class TestTrainCommand:
    def test_train_writes_metrics_and_checkpoint(self, train_setup, capsys):
        cfg, out = train_setup
        assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "metrics.csv").exists()
        assert (out / "checkpoints" / "final.ddpg").exists()
        assert "final checkpoint" in capsys.readouterr().out

    def test_seed_flag_overrides_config(self, train_setup, tmp_path):
        cfg, _ = train_setup
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        out_c = tmp_path / "c"
        main(["train", "--config", str(cfg), "--out", str(out_a), "--seed", "9"])
        main(["train", "--config", str(cfg), "--out", str(out_b), "--seed", "9"])
        main(["train", "--config", str(cfg), "--out", str(out_c), "--seed", "10"])
        metrics = [(p / "metrics.csv").read_bytes() for p in (out_a, out_b, out_c)]
        assert metrics[0] == metrics[1]
        assert metrics[0] != metrics[2]

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("typo_key=1\n")
        assert main(["train", "--config", str(cfg)]) == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_unknown_track_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("track=missingtrack\nepisodes=1\n")
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_missing_required_flag_exits_1(self, capsys):
        assert main(["train"]) == 1
        assert "usage error" in capsys.readouterr().err


class TestEvalCommand:
    def test_eval_roundtrip(self, train_setup, tmp_path, capsys):
        cfg, out = train_setup
        main(["train", "--config", str(cfg), "--out", str(out)])
        code = main(["eval", "--checkpoint", str(out / "checkpoints" / "final.ddpg"),
                     "--track", "straight", "--episodes", "2",
                     "--out", str(tmp_path / "ev")])
        assert code == 0
        lines = (tmp_path / "ev" / "metrics.csv").read_text().splitlines()
        assert lines[0] == METRICS_HEADER
        assert len(lines) == 3

    def test_corrupt_checkpoint_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.ddpg"
        bad.write_bytes(b"not a checkpoint")
        assert main(["eval", "--checkpoint", str(bad), "--track", "oval",
                     "--episodes", "1"]) == 2
        assert "error" in capsys.readouterr().err

    def test_non_positive_episodes_exits_1(self, tmp_path):
        bad = tmp_path / "x.ddpg"
        bad.write_bytes(b"")
        assert main(["eval", "--checkpoint", str(bad), "--track", "oval",
                     "--episodes", "0"]) == 1


class TestTracksCommand:
    def test_list_names_all_builtins(self, capsys):
        assert main(["tracks", "list"]) == 0
        out = capsys.readouterr().out
        for name in ("straight", "oval", "scurve"):
            assert name in out


class TestReportCommand:
    def test_report_renders_figures_next_to_metrics(self, tmp_path, capsys):
        metrics = tmp_path / "metrics.csv"
        rows = [METRICS_HEADER]
        rng = np.random.default_rng(0)
        for ep in range(1, 21):
            rows.append(f"{ep},{ep * 10},{rng.uniform(0, 100)!r},"
                        f"{rng.uniform(0, 500)!r},{rng.uniform(0, 90)!r},"
                        f"{rng.uniform(-5, 30)!r},{rng.uniform(0, 4)!r},0.5")
        metrics.write_text("\n".join(rows) + "\n")
        assert main(["report", "--metrics", str(metrics)]) == 0
        for name in FIGURES:
            path = tmp_path / name
            assert path.exists() and path.stat().st_size > 0
            assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_report_honors_out_dir(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text(METRICS_HEADER + "\n1,5,1.0,2.0,3.0,0.2,0.1,1.0\n")
        out = tmp_path / "figs"
        paths = render_report(metrics, out_dir=out)
        assert all(p.parent == out and p.exists() for p in paths)

    def test_report_on_wrong_schema_exits_1(self, tmp_path, capsys):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text("a,b\n1,2\n")
        assert main(["report", "--metrics", str(metrics)]) == 1

    def test_report_on_empty_metrics_exits_1(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text(METRICS_HEADER + "\n")
        assert main(["report", "--metrics", str(metrics)]) == 1


class TestExitCodes:
    def test_unknown_subcommand_exits_1(self):
        assert main(["frobnicate"]) == 1

    def test_no_arguments_exits_1(self):
        assert main([]) == 1
