"""Closed-track geometry: centerline, offset boundaries, rays.

A track is a closed polyline centerline with a constant half width.
The two drivable edges are the miter-offset polygons of the centerline
at +-half_width; every geometric query (projection, insideness, ray
casting) works against those polygons so the sensors and the region
they measure always agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

BUILTIN_TRACKS = ("straight", "oval", "scurve")


def wrap_angle(a):
    """Wrap radians into [-pi, pi)."""
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass
class TrackDefinition:
    """Closed centerline plus half width, with precomputed geometry."""

    name: str
    half_width: float
    centerline: np.ndarray  # (N, 2), implicitly closed last -> first

    # derived in __post_init__
    seg_vec: np.ndarray = field(init=False, repr=False)
    seg_len: np.ndarray = field(init=False, repr=False)
    cum_len: np.ndarray = field(init=False, repr=False)   # arc length at each vertex
    total_length: float = field(init=False)
    left_boundary: np.ndarray = field(init=False, repr=False)
    right_boundary: np.ndarray = field(init=False, repr=False)
    edge_start: np.ndarray = field(init=False, repr=False)  # both rings, (2N, 2)
    edge_vec: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.centerline, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ConfigError(
                f"track '{self.name}': centerline needs >= 3 points of (x, y)")
        if not np.all(np.isfinite(pts)):
            raise ConfigError(f"track '{self.name}': non-finite centerline point")
        if not (math.isfinite(self.half_width) and self.half_width > 0.0):
            raise ConfigError(
                f"track '{self.name}': half width must be positive, got {self.half_width}")
        if np.allclose(pts[0], pts[-1]):
            raise ConfigError(
                f"track '{self.name}': closing edge is implicit; do not repeat the first point")
        self.centerline = pts
        self.seg_vec = np.roll(pts, -1, axis=0) - pts
        self.seg_len = np.linalg.norm(self.seg_vec, axis=1)
        if np.any(self.seg_len < 1e-9):
            raise ConfigError(f"track '{self.name}': zero-length centerline segment")
        self.cum_len = np.concatenate([[0.0], np.cumsum(self.seg_len)[:-1]])
        self.total_length = float(self.seg_len.sum())
        self._build_boundaries()

    def _build_boundaries(self):
        tangents = self.seg_vec / self.seg_len[:, None]
        # unit left normals of each segment
        normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=1)
        n_prev = np.roll(normals, 1, axis=0)
        dot = np.sum(n_prev * normals, axis=1)
        if np.any(dot <= -0.8):
            raise ConfigError(
                f"track '{self.name}': centerline turns back on itself at a vertex")
        # miter vertex: intersection of the two adjacent offset lines
        miter = (n_prev + normals) / (1.0 + dot)[:, None]
        self.left_boundary = self.centerline + self.half_width * miter
        self.right_boundary = self.centerline - self.half_width * miter
        for side, ring in (("left", self.left_boundary), ("right", self.right_boundary)):
            vecs = np.roll(ring, -1, axis=0) - ring
            if np.any(np.linalg.norm(vecs, axis=1) < 1e-9):
                raise ConfigError(
                    f"track '{self.name}': {side} boundary collapses; "
                    "half width exceeds the local turn radius")
        # an offset past the local turn radius turns a ring inside out,
        # leaving the centerline outside the band between the rings
        in_band = (_crossings(self.centerline, self.left_boundary)
                   ^ _crossings(self.centerline, self.right_boundary))
        if not np.all(in_band):
            raise ConfigError(
                f"track '{self.name}': half width exceeds the local turn radius")
        self._check_simple()
        self.edge_start = np.concatenate([self.left_boundary, self.right_boundary])
        left_vec = np.roll(self.left_boundary, -1, axis=0) - self.left_boundary
        right_vec = np.roll(self.right_boundary, -1, axis=0) - self.right_boundary
        self.edge_vec = np.concatenate([left_vec, right_vec])

    def _check_simple(self):
        """Reject boundaries that self-intersect or touch each other."""
        n = self.centerline.shape[0]
        for side, ring in (("left", self.left_boundary), ("right", self.right_boundary)):
            if _ring_self_intersects(ring):
                raise ConfigError(
                    f"track '{self.name}': {side} boundary self-intersects at "
                    f"half width {self.half_width}")
        if _rings_intersect(self.left_boundary, self.right_boundary):
            raise ConfigError(
                f"track '{self.name}': the two boundaries cross; the track pinches shut")

    def tangent_angle(self, seg_idx: int) -> float:
        v = self.seg_vec[seg_idx]
        return math.atan2(v[1], v[0])

    def centerline_point(self, arc: float) -> np.ndarray:
        """Point on the centerline at arc position (wrapped) along the loop."""
        s = float(arc) % self.total_length
        idx = int(np.searchsorted(self.cum_len, s, side="right") - 1)
        t = (s - self.cum_len[idx]) / self.seg_len[idx]
        return self.centerline[idx] + t * self.seg_vec[idx]


def _segments_properly_intersect(a_start, a_vec, b_start, b_vec, eps=1e-12):
    """Pairwise test: does segment i of A intersect segment j of B?

    Returns a boolean matrix; collinear overlaps are ignored (they are
    caught by the zero-length and back-turn checks instead).
    """
    denom = a_vec[:, None, 0] * b_vec[None, :, 1] - a_vec[:, None, 1] * b_vec[None, :, 0]
    rel = b_start[None, :, :] - a_start[:, None, :]
    t_num = rel[..., 0] * b_vec[None, :, 1] - rel[..., 1] * b_vec[None, :, 0]
    u_num = rel[..., 0] * a_vec[:, None, 1] - rel[..., 1] * a_vec[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom
    ok = np.abs(denom) > eps
    return ok & (t > eps) & (t < 1 - eps) & (u > eps) & (u < 1 - eps)


def _ring_self_intersects(ring: np.ndarray) -> bool:
    n = ring.shape[0]
    start = ring
    vec = np.roll(ring, -1, axis=0) - ring
    hits = _segments_properly_intersect(start, vec, start, vec)
    idx = np.arange(n)
    # a segment trivially meets itself and shares endpoints with neighbours
    adjacent = (np.abs(idx[:, None] - idx[None, :]) % (n - 1)) <= 1
    return bool(np.any(hits & ~adjacent))


def _rings_intersect(a: np.ndarray, b: np.ndarray) -> bool:
    hits = _segments_properly_intersect(
        a, np.roll(a, -1, axis=0) - a, b, np.roll(b, -1, axis=0) - b)
    return bool(np.any(hits))


# -- queries ----------------------------------------------------------------

def project(track: TrackDefinition, point) -> tuple[float, float, float]:
    """Nearest-point projection of `point` onto the centerline.

    Returns (arc position in [0, total_length), signed lateral offset in
    meters with positive = left of travel, tangent angle of the nearest
    segment).
    """
    p = np.asarray(point, dtype=np.float64)
    rel = p - track.centerline
    t = np.einsum("ij,ij->i", rel, track.seg_vec) / (track.seg_len**2)
    t = np.clip(t, 0.0, 1.0)
    closest = track.centerline + t[:, None] * track.seg_vec
    d2 = np.sum((p - closest) ** 2, axis=1)
    k = int(np.argmin(d2))
    offset = p - closest[k]
    lat = math.sqrt(d2[k])
    if _cross(track.seg_vec[k], offset) < 0.0:
        lat = -lat
    arc = float(track.cum_len[k] + t[k] * track.seg_len[k]) % track.total_length
    return arc, lat, track.tangent_angle(k)


def _crossings(points: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Even-odd crossing parity of +x rays from `points` against `ring`."""
    x, y = points[:, 0:1], points[:, 1:2]
    x1, y1 = ring[:, 0][None, :], ring[:, 1][None, :]
    nxt = np.roll(ring, -1, axis=0)
    x2, y2 = nxt[:, 0][None, :], nxt[:, 1][None, :]
    straddles = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    hits = straddles & (x < x_at)
    return np.sum(hits, axis=1) % 2 == 1


def inside_track(track: TrackDefinition, points) -> bool | np.ndarray:
    """Whether point(s) lie between the two boundary polygons.

    A point is inside exactly one of the rings iff it is in the drivable
    band, so the test is a parity XOR; accepts (2,) or (M, 2).
    """
    p = np.asarray(points, dtype=np.float64)
    single = p.ndim == 1
    p2 = p[None, :] if single else p
    inside = _crossings(p2, track.left_boundary) ^ _crossings(p2, track.right_boundary)
    return bool(inside[0]) if single else inside


def cast_rays(track: TrackDefinition, origin, angles, max_range: float = 200.0) -> np.ndarray:
    """Distance along each ray to the nearest boundary edge, capped.

    `angles` are absolute world headings in radians; the origin should be
    inside the track.
    """
    o = np.asarray(origin, dtype=np.float64)
    ang = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    d = np.stack([np.cos(ang), np.sin(ang)], axis=1)           # (K, 2)
    w = track.edge_vec                                          # (E, 2)
    rel = track.edge_start - o                                  # (E, 2)
    denom = d[:, None, 0] * w[None, :, 1] - d[:, None, 1] * w[None, :, 0]
    t_num = rel[None, :, 0] * w[None, :, 1] - rel[None, :, 1] * w[None, :, 0]
    u_num = rel[None, :, 0] * d[:, None, 1] - rel[None, :, 1] * d[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom
    valid = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(valid, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


# -- file format --------------------------------------------------------------

def parse_track(text: str, source: str = "<string>") -> TrackDefinition:
    """Parse the plain-text track format.

    Line 1 is the name, line 2 the half width in meters, and every
    further line one `x y` centerline point; `#` starts a comment.
    """
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            rows.append((lineno, stripped))
    if len(rows) < 2:
        raise ConfigError(f"{source}: track file needs a name and a half width")
    name = rows[0][1]
    try:
        half_width = float(rows[1][1])
    except ValueError:
        raise ConfigError(
            f"{source}:{rows[1][0]}: half width must be a number, got {rows[1][1]!r}")
    points = []
    for lineno, row in rows[2:]:
        parts = row.split()
        if len(parts) != 2:
            raise ConfigError(f"{source}:{lineno}: expected 'x y', got {row!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad coordinate in {row!r}")
    if len(points) < 3:
        raise ConfigError(f"{source}: centerline needs at least 3 points")
    return TrackDefinition(name, half_width, np.array(points))


def format_track(track: TrackDefinition) -> str:
    lines = [track.name, repr(float(track.half_width))]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in track.centerline]
    return "\n".join(lines) + "\n"


def load_track(path) -> TrackDefinition:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read track file {path}: {exc}")
    return parse_track(text, source=str(path))


def resolve_track(name_or_path: str) -> TrackDefinition:
    """Look up a built-in track by name, or load a track file by path."""
    if name_or_path in BUILTIN_TRACKS:
        ref = resources.files(__package__).joinpath(f"tracks/{name_or_path}.track")
        return parse_track(ref.read_text(), source=f"builtin:{name_or_path}")
    if Path(name_or_path).exists():
        return load_track(name_or_path)
    raise ConfigError(
        f"unknown track {name_or_path!r}; built-ins are {', '.join(BUILTIN_TRACKS)}")
