"""Stroke containers, equidistant resampling and raw-point curvature."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateStroke(ValueError):
    """Raised when a stroke is too short or too degenerate to process."""


@dataclass(frozen=True)
class RawStroke:
    """Time-ordered pen samples of one stroke.

    ``points`` is an ``(n, 2)`` float array; ``t`` holds optional timestamps
    in milliseconds. Use :meth:`from_points` to build one from untrusted
    input: it drops consecutive duplicates and validates the samples.
    """

    points: np.ndarray
    id: str = ""
    t: np.ndarray | None = None

    @classmethod
    def from_points(cls, points, t=None, id: str = "") -> "RawStroke":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DegenerateStroke(f"stroke {id!r}: points must be an (n, 2) array")
        if not np.all(np.isfinite(pts)):
            raise DegenerateStroke(f"stroke {id!r}: non-finite coordinates")
        ts = None if t is None else np.asarray(t, dtype=float)
        if ts is not None:
            if ts.shape != (len(pts),):
                raise DegenerateStroke(f"stroke {id!r}: timestamp count mismatch")
            if np.any(np.diff(ts) < 0):
                raise DegenerateStroke(f"stroke {id!r}: timestamps decrease")
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            pts = pts[keep]
            if ts is not None:
                ts = ts[keep]
        if len(pts) < 2:
            raise DegenerateStroke(f"stroke {id!r}: fewer than 2 distinct points")
        pts.setflags(write=False)
        return cls(points=pts, id=id, t=ts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def length(self) -> float:
        return polyline_length(self.points)


@dataclass(frozen=True)
class ResampledStroke:
    points: np.ndarray
    step_d: float
    origin_index: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ResampleConfig:
    """Knobs of the adaptive step rule.

    The step is chosen so that any primitive covering at least
    ``min_primitive_fraction`` of the stroke gets ``min_obs_per_primitive``
    resampled points. This is a stand-in for a histogram-driven choice and
    can be overridden with a fixed step in :class:`strokehmm.fragmenter.FragConfig`.
    """

    min_primitive_fraction: float = 0.08
    min_obs_per_primitive: int = 5
    d_min_abs: float = 1e-6
    d_max_abs: float = math.inf


def polyline_length(points: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(points, axis=0).T)))


def cumulative_length(points: np.ndarray) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(seg)])


def choose_resample_step(stroke: RawStroke, config: ResampleConfig = ResampleConfig()) -> float:
    return step_for_length(stroke.length, config)


def step_for_length(length: float, config: ResampleConfig = ResampleConfig()) -> float:
    d = config.min_primitive_fraction * length / config.min_obs_per_primitive
    return float(min(max(d, config.d_min_abs), config.d_max_abs))


def resample(stroke: RawStroke, step_d: float) -> ResampledStroke:
    """Walk the raw polyline emitting points exactly ``step_d`` apart.

    Each new point is the first point further along the polyline whose
    Euclidean distance to the previously emitted point equals ``step_d``.
    The last raw point is appended when it lies more than ``step_d / 2``
    beyond the last emitted point.
    """
    if not step_d > 0:
        raise ValueError("step_d must be positive")
    pts = stroke.points
    if stroke.length < step_d:
        raise DegenerateStroke(
            f"stroke {stroke.id!r}: length {stroke.length:.6g} shorter than step {step_d:.6g}"
        )
    cum = cumulative_length(pts)
    d2 = step_d * step_d

    out = [pts[0]]
    pos = [0.0]  # arc-length position of each emitted point
    q = pts[0]
    seg, t0 = 0, 0.0
    n = len(pts)
    while seg < n - 1:
        a, b = pts[seg], pts[seg + 1]
        v = b - a
        # |a + t v - q|^2 = d^2, take the larger root (q is inside the circle at t0)
        w = a - q
        A = v @ v
        B = 2.0 * (v @ w)
        C = w @ w - d2
        disc = B * B - 4.0 * A * C
        if disc >= 0:
            t = (-B + math.sqrt(disc)) / (2.0 * A)
            if t0 <= t <= 1.0:
                q = a + t * v
                out.append(q)
                pos.append(cum[seg] + t * (cum[seg + 1] - cum[seg]))
                t0 = t
                continue
        seg += 1
        t0 = 0.0

    if np.hypot(*(pts[-1] - out[-1])) > step_d / 2:
        out.append(pts[-1])
        pos.append(cum[-1])

    pos = np.asarray(pos)
    hi = np.clip(np.searchsorted(cum, pos), 1, n - 1)
    lo = hi - 1
    origin = np.where(pos - cum[lo] <= cum[hi] - pos, lo, hi)
    origin = np.maximum.accumulate(origin)
    return ResampledStroke(points=np.array(out), step_d=float(step_d), origin_index=origin)


def chord_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned distance from ``p`` to the chord ``ab`` (0 if ``a == b``)."""
    ab = b - a
    norm = math.hypot(ab[0], ab[1])
    if norm < 1e-12:
        return 0.0
    ap = p - a
    return abs(ab[0] * ap[1] - ab[1] * ap[0]) / norm


def raw_curvature(stroke: RawStroke, index: int, half_window: int) -> float:
    n = len(stroke.points)
    if not 0 <= index < n:
        raise IndexError(index)
    if half_window < 1:
        raise ValueError("half_window must be >= 1")
    pts = stroke.points
    a = pts[max(0, index - half_window)]
    b = pts[min(n - 1, index + half_window)]
    return chord_distance(pts[index], a, b)


def raw_curvature_profile(stroke: RawStroke, half_window: int) -> np.ndarray:
    """Vectorised :func:`raw_curvature` for every raw index."""
    pts = stroke.points
    n = len(pts)
    idx = np.arange(n)
    a = pts[np.maximum(0, idx - half_window)]
    b = pts[np.minimum(n - 1, idx + half_window)]
    ab = b - a
    ap = pts - a
    norm = np.hypot(ab[:, 0], ab[:, 1])
    cross = np.abs(ab[:, 0] * ap[:, 1] - ab[:, 1] * ap[:, 0])
    out = np.zeros(n)
    ok = norm >= 1e-12
    out[ok] = cross[ok] / norm[ok]
    return out


def median_spacing(stroke: RawStroke) -> float:
    return float(np.median(np.hypot(*np.diff(stroke.points, axis=0).T)))
