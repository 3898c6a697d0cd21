"""Render training-progress figures from a metrics.csv file.

Three panels mirror what the training loop measures per episode:
speed and step gain, distance and reward, and driving stability
(variance of the distance from center plus episode length). Figures
are written as PNG next to the metrics file unless told otherwise.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import UsageError
from .trainer import METRICS_HEADER

FIGURES = ("speed_gain.png", "distance_reward.png", "stability.png")


def read_metrics(path) -> dict[str, list[float]]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != METRICS_HEADER.split(","):
                raise UsageError(
                    f"{path}: unexpected columns {reader.fieldnames}")
            cols: dict[str, list[float]] = {name: [] for name in reader.fieldnames}
            for row in reader:
                for name in cols:
                    cols[name].append(float(row[name]))
    except OSError as exc:
        raise UsageError(f"cannot read metrics file {path}: {exc}")
    return cols


def _twin_panel(path, episodes, left, left_label, right, right_label, title):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(episodes, left, color="tab:blue", linewidth=1.2, label=left_label)
    ax.set_xlabel("episode")
    ax.set_ylabel(left_label, color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(episodes, right, color="tab:orange", linewidth=1.2, label=right_label)
    ax2.set_ylabel(right_label, color="tab:orange")
    ax2.tick_params(axis="y", labelcolor="tab:orange")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(metrics_path, out_dir=None) -> list[Path]:
    """Write the three training figures; returns the created paths."""
    metrics_path = Path(metrics_path)
    cols = read_metrics(metrics_path)
    if not cols["episode"]:
        raise UsageError(f"{metrics_path}: no episodes to plot")
    out = Path(out_dir) if out_dir is not None else metrics_path.parent
    out.mkdir(parents=True, exist_ok=True)
    ep = cols["episode"]
    paths = [out / name for name in FIGURES]
    _twin_panel(paths[0], ep, cols["mean_speed_kmh"], "mean speed (km/h)",
                cols["mean_step_gain"], "mean step gain",
                "Speed and per-step gain")
    _twin_panel(paths[1], ep, cols["total_distance_m"], "total distance (m)",
                cols["total_reward"], "total reward",
                "Distance and reward per episode")
    _twin_panel(paths[2], ep, cols["var_dist_center_m2"],
                "var. dist. from center (m^2)", cols["steps"], "episode steps",
                "Driving stability")
    return paths
