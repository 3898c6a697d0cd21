#!/usr/bin/env python3
"""Regenerate the built-in track data files under src/raceline/tracks/.

Run from the repository root after changing any shape parameters below.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from raceline.track import TrackDefinition, format_track  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "raceline" / "tracks"


def stadium(straight_len: float, radius: float, arc_points: int) -> np.ndarray:
    """Two straights joined by semicircular ends; starts on the lower straight."""
    pts = [(0.0, 0.0), (straight_len, 0.0)]
    # right end, sweeping -90 -> +90 degrees around (straight_len, radius)
    for i in range(1, arc_points + 1):
        phi = -0.5 * np.pi + np.pi * i / arc_points
        pts.append((straight_len + radius * np.cos(phi), radius + radius * np.sin(phi)))
    pts.append((0.0, 2.0 * radius))
    # left end, sweeping +90 -> +270 degrees around (0, radius), open at the seam
    for i in range(1, arc_points):
        phi = 0.5 * np.pi + np.pi * i / arc_points
        pts.append((radius * np.cos(phi), radius + radius * np.sin(phi)))
    return np.array(pts)


def wave_loop(base_radius: float, amplitude: float, lobes: int, points: int) -> np.ndarray:
    """Closed loop with alternating-curvature lobes: r = R + A sin(lobes * phi)."""
    phi = 2.0 * np.pi * np.arange(points) / points
    r = base_radius + amplitude * np.sin(lobes * phi)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def main() -> None:
    tracks = [
        TrackDefinition("straight", 6.0, stadium(1000.0, 60.0, 48)),
        TrackDefinition("oval", 6.0, stadium(200.0, 80.0, 48)),
        TrackDefinition("scurve", 5.0, wave_loop(95.0, 14.0, 5, 240)),
    ]
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for track in tracks:
        path = OUT_DIR / f"{track.name}.track"
        path.write_text(format_track(track))
        print(f"{path}: {len(track.centerline)} points, "
              f"length {track.total_length:.1f} m, width {2 * track.half_width} m")


if __name__ == "__main__":
    main()
