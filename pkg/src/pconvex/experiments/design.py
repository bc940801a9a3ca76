"""Design points sampled along random line segments in a box."""

from __future__ import annotations

import numpy as np

from ..cone import DesignSet
from ..mathkit import RngStream, sample_sphere_direction


def _chord(p, u, low, high):
    """Parameter range ``[t_lo, t_hi]`` keeping ``p + t u`` inside the box."""
    t_lo, t_hi = -np.inf, np.inf
    for k in range(p.shape[0]):
        if u[k] == 0.0:
            continue
        a = (low[k] - p[k]) / u[k]
        b = (high[k] - p[k]) / u[k]
        t_lo = max(t_lo, min(a, b))
        t_hi = min(t_hi, max(a, b))
    return t_lo, t_hi


def generate_design_points(d: int, rng: RngStream, *, low=-1.0, high=1.0,
                           n_lines: int | None = None, per_line: int = 3) -> DesignSet:
    """Sample ``per_line`` points uniformly on each of ``n_lines`` random chords.

    Each chord passes through a uniform point of the box ``[low, high]^d`` in
    a uniform random direction and is clipped to the box. With the default
    ``n_lines = d + 1`` this yields ``r = 3 (d + 1)`` points.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    low = np.broadcast_to(np.asarray(low, dtype=np.float64), (d,))
    high = np.broadcast_to(np.asarray(high, dtype=np.float64), (d,))
    if np.any(high <= low):
        raise ValueError("box must have positive extent in every coordinate")
    n_lines = d + 1 if n_lines is None else int(n_lines)
    points = []
    for line in range(n_lines):
        attempt = 0
        while True:
            s = rng.substream(line, attempt)
            p = s.uniform(low, high)
            u = sample_sphere_direction(s, d)
            t_lo, t_hi = _chord(p, u, low, high)
            if np.isfinite(t_lo) and np.isfinite(t_hi) and t_hi - t_lo > 1e-9:
                break
            attempt += 1
        t = s.uniform(t_lo, t_hi, size=per_line)
        points.extend(np.clip(p + t[:, None] * u, low, high))
    return DesignSet(np.array(points))


def ambulance_line_count(n_bases: int) -> int:
    """Line count used for base-location designs: ``4 * bases + 1``."""
    return 4 * n_bases + 1
