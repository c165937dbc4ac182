"""Labelled synthetic strokes built from line and arc pieces.

A shape is a turtle program: start at the origin with a heading, then
alternate optional corner turns with line or arc pieces. Every junction
that is a corner or a change of primitive becomes a ground-truth segment
point, and the raw stroke is sampled so that each junction is itself a raw
point. Coordinates use a y-up frame; ``"cw"`` arcs turn clockwise in it.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fragmenter import PrimitiveKind
from .geometry import RawStroke
from .model_zoo import ARC_CCW, ARC_CW, LINE


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class Piece:
    """One primitive. ``turn`` (radians, + = left) is applied before it."""

    kind: str  # "line" | "arc"
    length: float = 0.0  # lines
    radius: float = 0.0  # arcs
    sweep: float = 0.0  # arcs, radians > 0
    orientation: str = "ccw"  # arcs
    turn: float = 0.0

    def validate(self):
        if self.kind == "line":
            if not self.length > 0:
                raise InvalidSpec("line length must be positive")
        elif self.kind == "arc":
            if not (self.radius > 0 and 0 < self.sweep <= 2 * math.pi + 1e-9):
                raise InvalidSpec("arc needs radius > 0 and 0 < sweep <= 2*pi")
            if self.orientation not in ("cw", "ccw"):
                raise InvalidSpec("arc orientation must be 'cw' or 'ccw'")
        else:
            raise InvalidSpec(f"unknown piece kind {self.kind!r}")

    @property
    def arc_length(self) -> float:
        return self.length if self.kind == "line" else self.radius * self.sweep


@dataclass(frozen=True)
class ShapeSpec:
    pieces: tuple[Piece, ...]
    heading: float = 0.0
    family: str = "custom"

    def to_dict(self) -> dict:
        return {"family": self.family, "heading": self.heading,
                "pieces": [asdict(p) for p in self.pieces]}


@dataclass(frozen=True)
class NoiseSpec:
    """Per-point isotropic jitter plus a slow tremor, both in units of ``step_d``."""

    jitter_sigma: float = 0.0
    wobble_amp: float = 0.0
    wobble_wavelength: float = 40.0
    seed: int = 0

    def __post_init__(self):
        if self.jitter_sigma < 0 or self.wobble_amp < 0 or not self.wobble_wavelength > 0:
            raise InvalidSpec("noise amplitudes must be >= 0 and wavelength > 0")


@dataclass(frozen=True)
class GroundTruth:
    true_segment_points: tuple[int, ...]
    primitives: tuple[PrimitiveKind, ...]
    generator_spec: dict
    step_d: float = 1.0
    family: str = "custom"


def heading_direction(heading: float) -> int:
    """Line direction class (0..7) of a heading in radians."""
    return int(round(heading / (math.pi / 4))) % 8


def generate(spec: ShapeSpec, noise: NoiseSpec = NoiseSpec(), sampling: float = 1 / 3,
             step_d: float = 1.0, stroke_id: str = "") -> tuple[RawStroke, GroundTruth]:
    """Trace ``spec`` at raw spacing ``sampling * step_d`` and apply ``noise``."""
    if not spec.pieces:
        raise InvalidSpec("shape needs at least one piece")
    if not (sampling > 0 and step_d > 0):
        raise InvalidSpec("sampling and step_d must be positive")
    for p in spec.pieces:
        p.validate()
    spacing = sampling * step_d

    pos = np.zeros(2)
    heading = spec.heading
    chunks = [pos[None, :].copy()]
    junctions: list[int] = []
    prims: list[PrimitiveKind] = []
    count = 1
    prev: Piece | None = None
    for piece in spec.pieces:
        heading += piece.turn
        if prev is not None:
            if _is_boundary(prev, piece):
                junctions.append(count - 1)
        n = max(1, math.ceil(piece.arc_length / spacing))
        s = np.arange(1, n + 1) * (piece.arc_length / n)
        if piece.kind == "line":
            u = np.array([math.cos(heading), math.sin(heading)])
            pts = pos + s[:, None] * u
            kind = PrimitiveKind(LINE, heading_direction(heading))
            end_heading = heading
        else:
            sgn = 1.0 if piece.orientation == "ccw" else -1.0
            normal = np.array([-math.sin(heading), math.cos(heading)]) * sgn
            centre = pos + piece.radius * normal
            start_ang = math.atan2(pos[1] - centre[1], pos[0] - centre[0])
            ang = start_ang + sgn * s / piece.radius
            pts = centre + piece.radius * np.column_stack([np.cos(ang), np.sin(ang)])
            kind = PrimitiveKind(ARC_CCW if sgn > 0 else ARC_CW)
            end_heading = heading + sgn * piece.sweep
        if prev is None or _is_boundary(prev, piece):
            prims.append(kind)
        chunks.append(pts)
        count += len(pts)
        pos = pts[-1].copy()
        heading = end_heading
        prev = piece

    clean = np.concatenate(chunks)
    rng = np.random.default_rng(noise.seed)
    noisy = clean.copy()
    if noise.wobble_amp > 0:
        arc = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(clean, axis=0).T))])
        phase = rng.uniform(0, 2 * math.pi, size=2)
        w = 2 * math.pi * arc / (noise.wobble_wavelength * step_d)
        noisy += noise.wobble_amp * step_d * np.column_stack([np.sin(w + phase[0]), np.sin(w + phase[1])])
    if noise.jitter_sigma > 0:
        noisy += rng.normal(0.0, noise.jitter_sigma * step_d, size=noisy.shape)

    stroke = RawStroke.from_points(noisy, id=stroke_id)
    if len(stroke) != len(noisy):
        raise InvalidSpec("shape produced repeated points")
    truth = GroundTruth(
        true_segment_points=tuple(junctions),
        primitives=tuple(prims),
        generator_spec={"shape": spec.to_dict(), "noise": asdict(noise),
                        "sampling": sampling, "step_d": step_d},
        step_d=step_d,
        family=spec.family,
    )
    return stroke, truth


def _is_boundary(prev: Piece, piece: Piece) -> bool:
    if abs(piece.turn) > 1e-9:
        return True
    if prev.kind != piece.kind:
        return True
    return prev.kind == "arc" and prev.orientation != piece.orientation


# --- shape families -------------------------------------------------------

@dataclass(frozen=True)
class Ranges:
    """Parameter ranges for the family samplers, lengths in step units."""

    radius: tuple[float, float] = (12.0, 45.0)
    corner_deg: tuple[float, float] = (45.0, 135.0)
    leg: tuple[float, float] = (8.0, 20.0)


def _u(rng, lo_hi):
    return float(rng.uniform(*lo_hi))


def _sign(rng):
    return 1.0 if rng.random() < 0.5 else -1.0


def _corner(rng, r: Ranges):
    return math.radians(_u(rng, r.corner_deg))


def _orient(rng):
    return "ccw" if rng.random() < 0.5 else "cw"


def _flip(o):
    return "cw" if o == "ccw" else "ccw"


def _osign(o):
    return 1.0 if o == "ccw" else -1.0


def _fam_l(rng, r):
    return [Piece("line", _u(rng, r.leg)), Piece("line", _u(rng, r.leg), turn=_sign(rng) * _corner(rng, r))]


def _fam_square(rng, r):
    s = _sign(rng)
    legs = [Piece("line", _u(rng, r.leg))]
    for _ in range(3):
        legs.append(Piece("line", _u(rng, r.leg), turn=s * math.radians(90 + rng.uniform(-10, 10))))
    return legs


def _fam_zigzag(rng, r):
    s = _sign(rng)
    n = int(rng.integers(4, 7))
    legs = [Piece("line", _u(rng, r.leg))]
    for k in range(1, n):
        legs.append(Piece("line", _u(rng, r.leg), turn=s * (-1) ** k * _corner(rng, r)))
    return legs


def _fam_star(rng, r):
    # five-pointed star outline drawn as one polyline; exterior turns of 144 degrees
    s = _sign(rng)
    leg = _u(rng, (max(r.leg[0], 10.0), max(r.leg[1], 16.0)))
    legs = [Piece("line", leg)]
    for _ in range(4):
        legs.append(Piece("line", leg * rng.uniform(0.9, 1.1), turn=s * math.radians(144 + rng.uniform(-6, 6))))
    return legs


def _fam_arc(rng, r):
    return [Piece("arc", radius=_u(rng, r.radius), sweep=math.radians(rng.uniform(90, 300)), orientation=_orient(rng))]


def _fam_circle(rng, r):
    return [Piece("arc", radius=_u(rng, r.radius), sweep=2 * math.pi, orientation=_orient(rng))]


def _fam_j(rng, r):
    # gentle stem curling into a tight hook, same orientation: one smooth primitive
    o = _orient(rng)
    lo, hi = r.radius
    mid = (lo + hi) / 2
    return [Piece("arc", radius=_u(rng, (mid, hi)), sweep=math.radians(rng.uniform(40, 70)), orientation=o),
            Piece("arc", radius=_u(rng, (lo, mid)), sweep=math.radians(rng.uniform(120, 180)), orientation=o)]


def _fam_s(rng, r):
    o = _orient(rng)
    return [Piece("arc", radius=_u(rng, r.radius), sweep=math.radians(rng.uniform(100, 180)), orientation=o),
            Piece("arc", radius=_u(rng, r.radius), sweep=math.radians(rng.uniform(100, 180)), orientation=_flip(o))]


def _fam_u(rng, r):
    o = _orient(rng)
    rad = _u(rng, (r.radius[0], min(r.radius[1], 30.0)))
    return [Piece("line", _u(rng, r.leg)), Piece("arc", radius=rad, sweep=math.pi, orientation=o),
            Piece("line", _u(rng, r.leg))]


def _fam_d(rng, r):
    o = _orient(rng)
    rad = _u(rng, (r.radius[0], min(r.radius[1], 25.0)))
    turn = _osign(o) * math.pi / 2
    return [Piece("line", 2 * rad), Piece("arc", radius=rad, sweep=math.pi, orientation=o, turn=turn)]


def _fam_two(rng, r):
    # "2"-like: hooked arc, tangent diagonal, corner, base line
    o = "cw"
    rad = _u(rng, (r.radius[0], min(r.radius[1], 25.0)))
    sweep = math.radians(rng.uniform(150, 210))
    return [Piece("arc", radius=rad, sweep=sweep, orientation=o),
            Piece("line", _u(rng, (max(r.leg[0], 10.0), r.leg[1] + 5))),
            Piece("line", _u(rng, r.leg), turn=_corner(rng, r))]


def _fam_nine(rng, r):
    # "9"-like: near-closed loop followed by a tangent stem
    o = _orient(rng)
    rad = _u(rng, (r.radius[0], min(r.radius[1], 25.0)))
    return [Piece("arc", radius=rad, sweep=math.radians(rng.uniform(250, 320)), orientation=o),
            Piece("line", _u(rng, (max(r.leg[0], 10.0), r.leg[1] + 5)))]


FAMILIES = {
    "L": _fam_l,
    "square": _fam_square,
    "zigzag": _fam_zigzag,
    "star": _fam_star,
    "arc": _fam_arc,
    "circle": _fam_circle,
    "J": _fam_j,
    "S": _fam_s,
    "U": _fam_u,
    "D": _fam_d,
    "two": _fam_two,
    "nine": _fam_nine,
}


def sample_shape(family: str, rng: np.random.Generator, ranges: Ranges = Ranges()) -> ShapeSpec:
    if family not in FAMILIES:
        raise InvalidSpec(f"unknown shape family {family!r}; known: {sorted(FAMILIES)}")
    pieces = FAMILIES[family](rng, ranges)
    return ShapeSpec(tuple(pieces), heading=float(rng.uniform(0, 2 * math.pi)), family=family)


@dataclass(frozen=True)
class CorpusSpec:
    counts: dict = field(default_factory=lambda: {name: 50 for name in FAMILIES})
    ranges: Ranges = field(default_factory=Ranges)
    jitter_sigma: float = 0.1
    wobble_amp: float = 0.0
    wobble_wavelength: float = 40.0
    sampling: float = 1 / 3
    step_d: float = 1.0
    seed: int = 2024

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusSpec":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpec(f"unknown recipe keys: {sorted(unknown)}")
        if "ranges" in data:
            data["ranges"] = Ranges(**{k: tuple(v) for k, v in data["ranges"].items()})
        if "counts" in data:
            bad = set(data["counts"]) - set(FAMILIES)
            if bad:
                raise InvalidSpec(f"unknown shape families: {sorted(bad)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ranges"] = {k: list(v) for k, v in d["ranges"].items()}
        return d


def corpus(recipe: CorpusSpec = CorpusSpec()) -> list[tuple[RawStroke, GroundTruth]]:
    """Deterministic labelled corpus; each stroke has its own derived seed."""
    out = []
    for fi, family in enumerate(FAMILIES):
        count = int(recipe.counts.get(family, 0))
        if count < 0:
            raise InvalidSpec("family counts must be non-negative")
        for i in range(count):
            rng = np.random.default_rng([recipe.seed, fi, i])
            spec = sample_shape(family, rng, recipe.ranges)
            noise = NoiseSpec(recipe.jitter_sigma, recipe.wobble_amp, recipe.wobble_wavelength,
                              seed=int(rng.integers(2**31)))
            out.append(generate(spec, noise, recipe.sampling, recipe.step_d, stroke_id=f"{family}-{i:03d}"))
    return out
