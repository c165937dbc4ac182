"""Cosmetic least-squares fits used only for drawing segments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LineFit:
    start: np.ndarray
    end: np.ndarray


@dataclass(frozen=True)
class CircleFit:
    center: np.ndarray
    radius: float
    rms: float


def fit_line(points) -> LineFit:
    """Total least-squares line, returned as the span of the projected points."""
    pts = np.asarray(points, dtype=float)
    mean = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - mean, full_matrices=False)
    axis = vt[0]
    proj = (pts - mean) @ axis
    return LineFit(mean + proj[0] * axis, mean + proj[-1] * axis)


def fit_circle(points) -> CircleFit | None:
    """Algebraic (Kasa) circle fit; ``None`` for collinear or too few points.

    Solves ``x^2 + y^2 + a x + b y + c = 0`` in the least-squares sense.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return None
    shift = pts.mean(axis=0)
    p = pts - shift
    A = np.column_stack([p[:, 0], p[:, 1], np.ones(len(p))])
    rhs = -(p[:, 0] ** 2 + p[:, 1] ** 2)
    (a, b, c), *_ , sv = np.linalg.lstsq(A, rhs, rcond=None)
    if sv[-1] < 1e-9 * sv[0]:
        return None
    centre = np.array([-a / 2, -b / 2])
    r2 = centre @ centre - c
    if not r2 > 0:
        return None
    r = float(np.sqrt(r2))
    rms = float(np.sqrt(np.mean((np.hypot(*(p - centre).T) - r) ** 2)))
    return CircleFit(centre + shift, r, rms)
