"""Likelihood shapes used as HMM emission densities.

Every Gaussian part peaks at 1 and the density never drops below ``floor``.
Direction shapes are used as is; curvature and turn shapes are rescaled to
unit area over their support with :func:`unit_area`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PdfShape:
    """Two half-Gaussians around a (possibly flat) top.

    The Gaussian part is 1 on ``[center, center + width]``, decays with
    ``sigma_left`` below ``center`` and with ``sigma_right`` above
    ``center + width``, and is lifted by ``floor``.
    """

    center: float
    sigma_left: float
    sigma_right: float
    floor: float = 1e-3
    width: float = 0.0

    def __post_init__(self):
        if self.sigma_left <= 0 or self.sigma_right <= 0:
            raise ValueError("sigmas must be positive")
        if self.floor < 0 or self.width < 0:
            raise ValueError("floor and width must be non-negative")

    @property
    def top(self) -> float:
        return self.center + self.width

    def density(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.minimum(x - self.center, 0.0) / self.sigma_left
        hi = np.maximum(x - self.top, 0.0) / self.sigma_right
        g = np.exp(-0.5 * (lo * lo + hi * hi))
        return self.floor + g

    def to_dict(self) -> dict:
        return {
            "type": "half_gaussian",
            "center": self.center,
            "width": self.width,
            "sigma_left": self.sigma_left,
            "sigma_right": self.sigma_right,
            "floor": self.floor,
        }


@dataclass(frozen=True)
class RaisedTailPdf:
    """``base`` with its value lifted to ``raised`` wherever ``|x| > threshold``."""

    base: PdfShape
    threshold: float
    raised: float

    def density(self, x):
        x = np.asarray(x, dtype=float)
        d = self.base.density(x)
        return np.where(np.abs(x) > self.threshold, np.maximum(d, self.raised), d)

    def to_dict(self) -> dict:
        return {"type": "raised_tail", "base": self.base.to_dict(),
                "threshold": self.threshold, "raised": self.raised}


@dataclass(frozen=True)
class MagnitudePdf:
    """``base`` evaluated on ``|x|`` (sign-agnostic band)."""

    base: PdfShape

    def density(self, x):
        return self.base.density(np.abs(np.asarray(x, dtype=float)))

    def to_dict(self) -> dict:
        return {"type": "magnitude", "base": self.base.to_dict()}


@dataclass(frozen=True)
class MixturePdf:
    """Weighted mixture; equal weights when ``weights`` is empty."""

    components: tuple
    weights: tuple = ()

    def density(self, x):
        w = self.weights or (1.0 / len(self.components),) * len(self.components)
        return sum(wi * c.density(x) for wi, c in zip(w, self.components))

    def to_dict(self) -> dict:
        d = {"type": "mixture", "components": [c.to_dict() for c in self.components]}
        if self.weights:
            d["weights"] = list(self.weights)
        return d


@dataclass(frozen=True)
class ScaledPdf:
    base: object
    scale: float

    def density(self, x):
        return self.scale * self.base.density(x)

    def to_dict(self) -> dict:
        return {"type": "scaled", "scale": self.scale, "base": self.base.to_dict()}


def unit_area(pdf, lo: float, hi: float, n: int = 8001) -> ScaledPdf:
    """Rescale ``pdf`` so that it integrates to 1 over ``[lo, hi]``."""
    x = np.linspace(lo, hi, n)
    y = pdf.density(x)
    area = float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2)
    return ScaledPdf(pdf, 1.0 / area)


@dataclass(frozen=True)
class ConstantPdf:
    value: float

    def density(self, x):
        return np.full(np.shape(x), self.value, dtype=float)

    def to_dict(self) -> dict:
        return {"type": "constant", "value": self.value}


def sector_shape(center: float, bound_a: float, bound_b: float, floor: float) -> PdfShape:
    """Half-Gaussians whose density at both sector bounds is ``exp(-2)`` of the peak.

    When both bounds fall on the same side of ``center`` (the peak of cos/sin
    sits at +-1) the shape is made symmetric.
    """
    left = [center - v for v in (bound_a, bound_b) if v < center - 1e-12]
    right = [v - center for v in (bound_a, bound_b) if v > center + 1e-12]
    sl = max(left) / 2 if left else None
    sr = max(right) / 2 if right else None
    sl = sl or sr
    sr = sr or sl
    return PdfShape(center=center, sigma_left=sl, sigma_right=sr, floor=floor)
