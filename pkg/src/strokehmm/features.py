"""Per-point observation vectors: chord direction, signed sagitta, turning angle.

For each resampled point ``p_i`` four features are computed:

* ``f1, f2`` -- cosine and sine of the chord ``p[i-1] -> p[i+1]``;
* ``f3`` -- signed distance from ``p_i`` to the chord ``p[i-2] p[i+2]``;
* ``f4`` -- turning angle at ``p_i`` (pi minus the vertex angle).

The sign of ``f3`` follows the cross product ``(p[i+2]-p[i-2]) x (p[i]-p[i-2])``
in a y-up frame, which is positive for clockwise turns. Pass
``handedness="screen"`` for y-down device coordinates; the sign is then
flipped so that visually clockwise ink still yields positive values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import ResampledStroke

WINDOW = 5
HANDEDNESS = ("math", "screen")


class DegenerateChord(ValueError):
    """The chord used by a feature has (near) zero length."""


class TooShort(ValueError):
    """Fewer resampled points than the 5-point feature window."""


class Observation(NamedTuple):
    f1: float
    f2: float
    f3: float
    f4: float


@dataclass(frozen=True)
class ObservationSeq:
    """``(T, 4)`` feature array plus the step it was computed at."""

    array: np.ndarray
    step_d: float
    degenerate: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.array)

    def __getitem__(self, i: int) -> Observation:
        return Observation(*map(float, self.array[i]))

    def __iter__(self):
        return (Observation(*map(float, row)) for row in self.array)


def _sign(handedness: str) -> float:
    if handedness not in HANDEDNESS:
        raise ValueError(f"handedness must be one of {HANDEDNESS}, got {handedness!r}")
    return 1.0 if handedness == "math" else -1.0


def direction_features(points: np.ndarray, i: int) -> tuple[float, float]:
    n = len(points)
    i = min(max(i, 1), n - 2)
    dx, dy = points[i + 1] - points[i - 1]
    norm = math.hypot(dx, dy)
    if norm < 1e-12:
        raise DegenerateChord(f"chord around point {i} has zero length")
    return dx / norm, dy / norm


def curvature_feature(points: np.ndarray, i: int, step_d: float, handedness: str = "math") -> float:
    n = len(points)
    i = min(max(i, 2), n - 3)
    a, b, p = points[i - 2], points[i + 2], points[i]
    cx, cy = b - a
    norm = math.hypot(cx, cy)
    if norm < 1e-12:
        return 0.0
    px, py = p - a
    h = _sign(handedness) * (cx * py - cy * px) / norm
    return float(np.clip(h, -2 * step_d, 2 * step_d))


def direction_change(points: np.ndarray, i: int) -> float:
    n = len(points)
    i = min(max(i, 1), n - 2)
    u = points[i] - points[i - 1]
    v = points[i + 1] - points[i]
    if math.hypot(*u) < 1e-12 or math.hypot(*v) < 1e-12:
        return 0.0
    return math.atan2(abs(u[0] * v[1] - u[1] * v[0]), u @ v)


def extract_observations(rs: ResampledStroke, handedness: str = "math") -> ObservationSeq:
    """Vectorised feature extraction with edge-replicated boundaries.

    Window positions that would run off either end reuse the nearest valid
    centre, so the output has one row per resampled point.
    """
    pts = np.asarray(rs.points, dtype=float)
    n = len(pts)
    if n < WINDOW:
        raise TooShort(f"{n} resampled points, need at least {WINDOW}")
    sign = _sign(handedness)
    d = rs.step_d

    # direction over p[i-1] -> p[i+1], centres 1..n-2
    chord = pts[2:] - pts[:-2]
    cnorm = np.hypot(chord[:, 0], chord[:, 1])
    bad = cnorm < 1e-12
    dirs = np.zeros_like(chord)
    dirs[~bad] = chord[~bad] / cnorm[~bad, None]
    if bad.any():
        # retrace: reuse the previous direction (or the next valid one at the start)
        good = np.flatnonzero(~bad)
        if len(good) == 0:
            dirs[:] = (1.0, 0.0)
        else:
            for k in np.flatnonzero(bad):
                prev = good[good < k]
                dirs[k] = dirs[prev[-1]] if len(prev) else dirs[good[0]]

    # signed sagitta against p[i-2] p[i+2], centres 2..n-3
    wide = pts[4:] - pts[:-4]
    wnorm = np.hypot(wide[:, 0], wide[:, 1])
    rel = pts[2:-2] - pts[:-4]
    cross = wide[:, 0] * rel[:, 1] - wide[:, 1] * rel[:, 0]
    h = np.zeros(len(wide))
    ok = wnorm >= 1e-12
    h[ok] = sign * cross[ok] / wnorm[ok]
    h = np.clip(h, -2 * d, 2 * d)

    # turning angle at p[i], centres 1..n-2
    u = pts[1:-1] - pts[:-2]
    v = pts[2:] - pts[1:-1]
    turn = np.arctan2(np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]), np.sum(u * v, axis=1))

    idx = np.arange(n)
    c1 = np.clip(idx, 1, n - 2) - 1
    c2 = np.clip(idx, 2, n - 3) - 2
    arr = np.column_stack([dirs[c1, 0], dirs[c1, 1], h[c2], turn[c1]])
    return ObservationSeq(array=arr, step_d=float(d), degenerate=bad[c1])


def estimate_jitter(obs: ObservationSeq, corner_curv: float = 0.5) -> float:
    """Robust per-stroke noise level of ``f3``, in multiples of the step.

    Feature windows ``WINDOW`` points apart share no raw input, so on a
    noise-free line or arc their ``f3`` values agree exactly. The spread of
    those lagged differences estimates the jitter. Points within a window of
    a sharp bend (``|f3| >= corner_curv``) are left out when enough remain,
    and the lower quartile of the absolute differences (scaled to a Gaussian
    sigma) is used so that leftover corner pairs do not read as noise.
    """
    f3 = obs.array[:, 2] / obs.step_d
    n = len(f3)
    if n <= WINDOW:
        return 0.0
    sharp = np.abs(f3) >= corner_curv
    near = np.convolve(sharp.astype(float), np.ones(2 * WINDOW - 3), mode="same") > 0
    ok = ~near[WINDOW:] & ~near[:-WINDOW]
    diff = f3[WINDOW:] - f3[:-WINDOW]
    if ok.sum() >= WINDOW:
        diff = diff[ok]
    # lower quartile of |N(0, 1)| is 0.3186
    return float(np.quantile(np.abs(diff), 0.25) / 0.3186 / math.sqrt(2.0))
