"""Shared test oracles: finite differences and ray marching."""

import numpy as np

from raceline.track import TrackDefinition, inside_track


def central_difference(f, arrays, h=1e-5):
    """Gradient of scalar f() wrt each array in `arrays`, by central
    differences, perturbing the arrays in place."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = f()
            flat[i] = orig - h
            f_minus = f()
            flat[i] = orig
            gflat[i] = (f_plus - f_minus) / (2.0 * h)
        grads.append(g)
    return grads


def max_grad_error(analytic, numeric, rel=1e-4, abs_floor=1e-7):
    """Worst relative mismatch between two gradient lists; the floor
    keeps near-zero components from blowing up the ratio."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), abs_floor / rel)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class GridInsideTester:
    """Grid-accelerated point-in-track tests for the marching oracle.

    Cells whose center is farther from every boundary edge than half the
    cell diagonal are classified once; only points in cells straddling a
    boundary fall back to the exact polygon-parity test. Results are
    identical to calling inside_track on every point.
    """

    def __init__(self, track: TrackDefinition, cell: float = 0.25):
        self.track = track
        self.cell = cell
        pts = np.concatenate([track.left_boundary, track.right_boundary])
        self.x0, self.y0 = pts.min(axis=0) - 2 * cell
        x1, y1 = pts.max(axis=0) + 2 * cell
        self.nx = int(np.ceil((x1 - self.x0) / cell))
        self.ny = int(np.ceil((y1 - self.y0) / cell))
        centers_x = self.x0 + (np.arange(self.nx) + 0.5) * cell
        centers_y = self.y0 + (np.arange(self.ny) + 0.5) * cell
        gx, gy = np.meshgrid(centers_x, centers_y, indexing="ij")
        centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
        dist = self._distance_to_edges(centers)
        inside = inside_track(track, centers)
        # 0 = certain outside, 1 = certain inside, 2 = needs exact test
        self.labels = np.where(dist > cell * 0.75, inside.astype(np.int8), 2)
        self.labels = self.labels.reshape(self.nx, self.ny)

    def _distance_to_edges(self, points):
        track = self.track
        out = np.full(len(points), np.inf)
        for lo in range(0, len(points), 4096):
            chunk = points[lo : lo + 4096]
            rel = chunk[:, None, :] - track.edge_start[None, :, :]
            seg = track.edge_vec[None, :, :]
            seg_len2 = np.sum(track.edge_vec**2, axis=1)[None, :]
            t = np.clip(np.sum(rel * seg, axis=2) / seg_len2, 0.0, 1.0)
            closest = track.edge_start[None, :, :] + t[:, :, None] * seg
            d = np.linalg.norm(chunk[:, None, :] - closest, axis=2)
            out[lo : lo + 4096] = d.min(axis=1)
        return out

    def __call__(self, points: np.ndarray) -> np.ndarray:
        ix = np.clip(((points[:, 0] - self.x0) / self.cell).astype(int), 0, self.nx - 1)
        iy = np.clip(((points[:, 1] - self.y0) / self.cell).astype(int), 0, self.ny - 1)
        labels = self.labels[ix, iy]
        result = labels == 1
        uncertain = labels == 2
        if np.any(uncertain):
            result[uncertain] = inside_track(self.track, points[uncertain])
        return result


def march_ray(inside_fn, origin, angle, max_range=200.0, step=1e-3, chunk=2048):
    """Brute-force range finding: walk the ray in `step` increments until
    the first point outside the track, then report the midpoint of the
    bracketing step. Knows nothing about edges or intersections."""
    direction = np.array([np.cos(angle), np.sin(angle)])
    n_total = int(np.ceil(max_range / step))
    done = 0
    while done < n_total:
        n = min(chunk, n_total - done)
        ts = (done + 1 + np.arange(n)) * step
        pts = origin[None, :] + ts[:, None] * direction[None, :]
        inside = inside_fn(pts)
        if not np.all(inside):
            k = int(np.argmin(inside))
            return ts[k] - 0.5 * step
        done += n
    return max_range
