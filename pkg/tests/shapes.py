"""Analytic test shapes."""
import math

import numpy as np

from strokehmm.geometry import RawStroke, ResampledStroke


def circle_points(radius, step, n, start=0.0, clockwise=False, centre=(0.0, 0.0)):
    """Points exactly ``step`` apart (chord length) on an analytic circle."""
    dtheta = 2 * math.asin(step / (2 * radius))
    sgn = -1.0 if clockwise else 1.0
    ang = start + sgn * dtheta * np.arange(n)
    return np.column_stack([centre[0] + radius * np.cos(ang), centre[1] + radius * np.sin(ang)])


def polyline(vertices, spacing):
    """Sample a polyline at ``spacing``, keeping every vertex as a raw point."""
    out = [np.asarray(vertices[0], dtype=float)]
    corners = []
    for a, b in zip(vertices, vertices[1:]):
        a, b = np.asarray(a, float), np.asarray(b, float)
        n = max(1, math.ceil(np.hypot(*(b - a)) / spacing))
        for k in range(1, n + 1):
            out.append(a + (b - a) * k / n)
        corners.append(len(out) - 1)
    return np.array(out), corners[:-1]


def as_resampled(points, step):
    pts = np.asarray(points, dtype=float)
    return ResampledStroke(points=pts, step_d=float(step), origin_index=np.arange(len(pts)))


def l_stroke(leg=10.0, spacing=1 / 3):
    pts, corners = polyline([(0, 10), (0, 10 - leg), (leg, 10 - leg)], spacing)
    return RawStroke.from_points(pts, id="L"), corners[0]
