"""Command-line interface.

Subcommands: train, eval, tracks list, report. Exit codes: 0 success,
1 usage, 2 configuration or file-format problem, 3 runtime/numerical
failure.
"""

from __future__ import annotations

import argparse
import sys

from .checkpoint import load_checkpoint
from .config import load_config
from .errors import CheckpointError, ConfigError, TrainingError, UsageError
from .report import render_report
from .track import BUILTIN_TRACKS, resolve_track
from .trainer import evaluate, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raceline",
                     description="Train and evaluate a driving policy on 2D tracks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training session")
    p_train.add_argument("--config", required=True, help="key=value config file")
    p_train.add_argument("--seed", type=int, default=None, help="override config seed")
    p_train.add_argument("--out", default=None, help="override output directory")

    p_eval = sub.add_parser("eval", help="evaluate a checkpointed policy, noise-free")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--track", required=True, help="built-in name or track file")
    p_eval.add_argument("--episodes", type=int, required=True)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", default=None, help="directory for metrics.csv")

    p_tracks = sub.add_parser("tracks", help="track utilities")
    tracks_sub = p_tracks.add_subparsers(dest="tracks_command", required=True)
    tracks_sub.add_parser("list", help="list built-in tracks")

    p_report = sub.add_parser("report", help="render figures from a metrics file")
    p_report.add_argument("--metrics", required=True, help="path to metrics.csv")
    p_report.add_argument("--out", default=None,
                          help="figure directory (default: next to the metrics file)")
    return parser


def _cmd_train(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    result = train(config, out_dir=args.out)
    print(f"metrics: {result['metrics']}")
    print(f"final checkpoint: {result['final_checkpoint']}")
    return 0


def _cmd_eval(args) -> int:
    if args.episodes <= 0:
        raise UsageError(f"--episodes must be positive, got {args.episodes}")
    ckpt = load_checkpoint(args.checkpoint)
    out_dir = args.out if args.out is not None else "eval"
    result = evaluate(ckpt, args.track, args.episodes, seed=args.seed,
                      out_dir=out_dir)
    for episode, m in enumerate(result["rows"], start=1):
        print(f"episode {episode}: steps={m.episode_steps} "
              f"reward={m.total_reward:.2f} distance={m.total_distance_m:.1f}m "
              f"mean_speed={m.mean_speed_kmh:.1f}km/h")
    print(f"metrics: {result['metrics']}")
    return 0


def _cmd_tracks(args) -> int:
    for name in BUILTIN_TRACKS:
        track = resolve_track(name)
        print(f"{name}: length {track.total_length:.1f} m, "
              f"width {2 * track.half_width:.1f} m, "
              f"{len(track.centerline)} centerline points")
    return 0


def _cmd_report(args) -> int:
    paths = render_report(args.metrics, out_dir=args.out)
    for path in paths:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "tracks":
            return _cmd_tracks(args)
        if args.command == "report":
            return _cmd_report(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
