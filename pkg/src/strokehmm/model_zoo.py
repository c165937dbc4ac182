"""State catalogue, topologies and hand-set emission densities.

State numbering (fixed):

====================  ==========================================
0-7                   anticlockwise arc, sector k
8-15                  clockwise arc, sector k
16-23                 line, direction k (angle k*pi/4)
24, 25                connectors (uniform emission)
26-81                 line corner (from_dir, to_dir), lexicographic
====================  ==========================================

Curvature densities are expressed in multiples of the resampling step, so a
built model is scale free; ``log_emissions`` divides ``f3`` by the step the
observations were computed at.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, asdict
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np

from .features import HANDEDNESS, Observation, ObservationSeq, estimate_jitter
from .pdfs import ConstantPdf, MagnitudePdf, MixturePdf, PdfShape, RaisedTailPdf, sector_shape, unit_area

ARC_CCW = "arc_ccw"
ARC_CW = "arc_cw"
LINE = "line"
CONNECTOR1 = "connector1"
CONNECTOR2 = "connector2"
LINE_CORNER = "line_corner"

N_DIRECTIONS = 8
N_BASIC = 24
CONNECTOR1_INDEX = 24
CONNECTOR2_INDEX = 25
FIRST_CORNER_INDEX = 26


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class StateId:
    index: int
    kind: str
    direction: int | None = None  # sector / line direction / corner source
    to_dir: int | None = None     # corner target

    @property
    def is_basic(self) -> bool:
        return self.index < N_BASIC

    @property
    def is_boundary(self) -> bool:
        return self.kind in (CONNECTOR1, CONNECTOR2, LINE_CORNER)

    @property
    def label(self) -> str:
        if self.kind == LINE_CORNER:
            return f"q{self.index}:corner({self.direction}->{self.to_dir})"
        if self.direction is None:
            return f"q{self.index}:{self.kind}"
        return f"q{self.index}:{self.kind}({self.direction})"


def _catalogue(with_extras: bool) -> tuple[StateId, ...]:
    states = [StateId(k, ARC_CCW, k) for k in range(8)]
    states += [StateId(8 + k, ARC_CW, k) for k in range(8)]
    states += [StateId(16 + k, LINE, k) for k in range(8)]
    if with_extras:
        states += [StateId(CONNECTOR1_INDEX, CONNECTOR1), StateId(CONNECTOR2_INDEX, CONNECTOR2)]
        idx = FIRST_CORNER_INDEX
        for i in range(8):
            for j in range(8):
                if i != j:
                    states.append(StateId(idx, LINE_CORNER, i, j))
                    idx += 1
    return tuple(states)


def corner_index(from_dir: int, to_dir: int) -> int:
    if from_dir == to_dir:
        raise ValueError("a corner joins two distinct directions")
    return FIRST_CORNER_INDEX + 7 * from_dir + (to_dir if to_dir < from_dir else to_dir - 1)


def line_index(direction: int) -> int:
    return 16 + direction % 8


def arc_index(kind: str, sector: int) -> int:
    return (0 if kind == ARC_CCW else 8) + sector % 8


NOISE_MODES = ("adaptive", "fixed")


@dataclass(frozen=True)
class ModelParams:
    """Flat, config-loadable knob set for both model builders.

    Transition weights are normalised per state, so only their ratios
    matter. Curvature values (``line_curv_2sigma``, ``h_corner`` ...) are in
    multiples of the resampling step; angles are in radians.
    """

    # transitions
    arc_self: float = 0.80
    arc_adjacent: float = 0.10
    arc_exit: float = 0.10
    line_self: float = 0.80
    line_exit: float = 0.10
    line_corner_total: float = 0.10
    corner_self: float = 0.30
    corner_to_line: float = 0.70
    c1_to_c2: float = 0.30
    c1_to_basic: float = 0.70
    ergodic_self: float = 1.0 / 24
    # direction densities
    direction_floor: float = 1e-3
    # curvature densities
    radius_min: float = 10.0
    radius_max: float = 50.0
    arc_tail_fraction: float = 0.25
    line_curv_2sigma: float = 0.04
    h_corner: float = 0.5
    line_raised: float = 0.02
    corner_curv_sigma: float = 0.15
    curv_floor: float = 1e-3
    # direction-change densities
    line_turn_2sigma: float = 0.02
    arc_turn_tail_fraction: float = 0.25
    corner_turn_sigma: float = math.pi / 8
    turn_floor: float = 1e-3
    # sensor jitter added in quadrature to the geometric widths: "adaptive"
    # estimates it per stroke from f3, "fixed" uses noise_curv / noise_turn
    noise_mode: str = "adaptive"
    noise_curv: float = 0.0
    noise_turn: float = 0.0
    noise_turn_ratio: float = 2.0
    noise_quantum: float = 0.01
    noise_max: float = 0.5
    # rescale curvature/turn densities to unit area so that broad and narrow
    # shapes compete fairly
    area_normalise: bool = True
    # connector density per feature; None derives it from the feature box
    uniform_density: float | None = None
    handedness: str = "math"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("handedness", "uniform_density", "noise_curv", "noise_turn",
                          "noise_mode", "area_normalise"):
                continue
            if not (isinstance(v, (int, float)) and v > 0):
                raise InvalidParams(f"{f.name} must be positive, got {v!r}")
        if self.uniform_density is not None and not self.uniform_density > 0:
            raise InvalidParams("uniform_density must be positive")
        if self.noise_mode not in NOISE_MODES:
            raise InvalidParams(f"noise_mode must be one of {NOISE_MODES}")
        if self.noise_curv < 0 or self.noise_turn < 0:
            raise InvalidParams("noise levels must be non-negative")
        if self.handedness not in HANDEDNESS:
            raise InvalidParams(f"handedness must be one of {HANDEDNESS}")
        if self.radius_min >= self.radius_max:
            raise InvalidParams("radius_min must be below radius_max")
        if not self.ergodic_self < 1:
            raise InvalidParams("ergodic_self must be below 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParams(f"unknown model parameters: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **kw) -> "ModelParams":
        return ModelParams(**{**asdict(self), **kw})

    @property
    def connector_density(self) -> float:
        if self.uniform_density is not None:
            return self.uniform_density
        # uniform over [-1,1] x [-1,1] x [-2,2] (step units) x [0, pi], split evenly
        return (1.0 / (2 * 2 * 4 * math.pi)) ** 0.25


def sagitta(radius: float, step: float = 1.0) -> float:
    """Distance from a circle point to the chord spanning two steps each way."""
    return radius * (1.0 - math.cos(2.0 * step / radius))


def turning_angle(radius: float, step: float = 1.0) -> float:
    return 2.0 * math.asin(step / (2.0 * radius))


@dataclass(frozen=True)
class EmissionParams:
    f1: object
    f2: object
    f3: object
    f4: object

    def pdfs(self):
        return (self.f1, self.f2, self.f3, self.f4)

    def to_dict(self) -> dict:
        return {name: pdf.to_dict() for name, pdf in zip(("f1", "f2", "f3", "f4"), self.pdfs())}


def _clean(v: float) -> float:
    return 0.0 if abs(v) < 1e-12 else v


def direction_pdfs(k: int, floor: float) -> tuple[PdfShape, PdfShape]:
    theta = k * math.pi / 4
    a, b = theta - math.pi / 8, theta + math.pi / 8
    f1 = sector_shape(_clean(math.cos(theta)), math.cos(a), math.cos(b), floor)
    f2 = sector_shape(_clean(math.sin(theta)), math.sin(a), math.sin(b), floor)
    return f1, f2


def _turn_steps(i: int, j: int) -> int:
    diff = (j - i) % 8
    return min(diff, 8 - diff)


def _sweep(i: int, j: int) -> list[int]:
    """Directions passed when turning from ``i`` to ``j`` the short way."""
    diff = (j - i) % 8
    if diff < 4:
        return [(i + s) % 8 for s in range(diff + 1)]
    if diff > 4:
        return [(i - s) % 8 for s in range(8 - diff + 1)]
    return list(range(8))


_F3_SUPPORT = (-2.0, 2.0)
_F4_SUPPORT = (0.0, math.pi)
_SHAPE_SUPPORT = (
    [(k, *_F3_SUPPORT) for k in ("func1", "func2", "func3", "corner_curv")]
    + [(k, *_F4_SUPPORT) for k in ("arc_turn", "line_turn")]
    + [(f"corner_turn{n}", *_F4_SUPPORT) for n in range(1, 5)]
)


def _shape_set(p: "ModelParams", noise_curv: float, noise_turn: float) -> dict:
    """Curvature and direction-change shapes, widened by the given jitter."""

    def curv(sigma):
        return math.hypot(sigma, noise_curv)

    def turn(sigma):
        return math.hypot(sigma, noise_turn)

    h_lo, h_hi = sagitta(p.radius_max), sagitta(p.radius_min)
    tail = curv(p.arc_tail_fraction * (h_hi - h_lo))
    sigma3 = curv(p.line_curv_2sigma / 2)
    corner_sigma = curv(p.corner_curv_sigma)
    t_lo, t_hi = turning_angle(p.radius_max), turning_angle(p.radius_min)
    t_tail = turn(p.arc_turn_tail_fraction * (t_hi - t_lo))
    line_sigma4 = turn(p.line_turn_2sigma / 2)
    out = {
        "func1": PdfShape(h_lo, tail, tail, p.curv_floor, width=h_hi - h_lo),
        "func2": PdfShape(-h_hi, tail, tail, p.curv_floor, width=h_hi - h_lo),
        "func3": RaisedTailPdf(PdfShape(0.0, sigma3, sigma3, p.curv_floor), p.h_corner, p.line_raised),
        "corner_curv": MagnitudePdf(
            PdfShape(p.h_corner, corner_sigma, corner_sigma, p.curv_floor, width=2.0 - p.h_corner)),
        "arc_turn": PdfShape(t_lo, t_tail, t_tail, p.turn_floor, width=t_hi - t_lo),
        "line_turn": PdfShape(0.0, line_sigma4, line_sigma4, p.turn_floor),
    }
    for n in range(1, 5):
        angle = n * math.pi / 4
        out[f"corner_turn{n}"] = PdfShape(angle, turn(angle / 2), turn(p.corner_turn_sigma), p.turn_floor)
    return out


def default_emissions(step_d: float = 1.0, params: ModelParams = ModelParams(),
                      noise: tuple[float, float] | None = None) -> tuple[EmissionParams, ...]:
    """Emission densities for all 82 states (the first 24 serve the baseline too).

    ``noise`` is the ``(curvature, turn)`` jitter to widen by; by default it
    comes from the params in fixed mode and is zero in adaptive mode.
    """
    if not step_d > 0:
        raise InvalidParams("step_d must be positive")
    p = params
    dirs = [direction_pdfs(k, p.direction_floor) for k in range(8)]

    if noise is None:
        noise = (p.noise_curv, p.noise_turn) if p.noise_mode == "fixed" else (0.0, 0.0)
    raw = _shape_set(p, *noise)
    shapes = {key: unit_area(raw[key], lo, hi) if p.area_normalise else raw[key]
              for key, lo, hi in _SHAPE_SUPPORT}
    func1, func2, func3 = shapes["func1"], shapes["func2"], shapes["func3"]
    corner_curv, arc_turn, line_turn = shapes["corner_curv"], shapes["arc_turn"], shapes["line_turn"]

    out: list[EmissionParams] = []
    for k in range(8):
        out.append(EmissionParams(dirs[k][0], dirs[k][1], func2, arc_turn))
    for k in range(8):
        out.append(EmissionParams(dirs[k][0], dirs[k][1], func1, arc_turn))
    for k in range(8):
        out.append(EmissionParams(dirs[k][0], dirs[k][1], func3, line_turn))
    cu = ConstantPdf(p.connector_density)
    out += [EmissionParams(cu, cu, cu, cu)] * 2
    for i in range(8):
        for j in range(8):
            if i == j:
                continue
            sweep = _sweep(i, j)
            f4 = shapes[f"corner_turn{_turn_steps(i, j)}"]
            out.append(EmissionParams(
                MixturePdf(tuple(dirs[k][0] for k in sweep)),
                MixturePdf(tuple(dirs[k][1] for k in sweep)),
                corner_curv,
                f4,
            ))
    return tuple(out)


@dataclass(frozen=True)
class HmmModel:
    name: str
    states: tuple[StateId, ...]
    initial_logp: np.ndarray
    transitions: tuple[tuple[int, int, float], ...]
    emissions: tuple[EmissionParams, ...]
    step_d: float
    params: ModelParams = field(default_factory=ModelParams)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def handedness(self) -> str:
        return self.params.handedness

    @cached_property
    def _arrays(self):
        src = np.array([t[0] for t in self.transitions], dtype=np.intp)
        dst = np.array([t[1] for t in self.transitions], dtype=np.intp)
        lp = np.array([t[2] for t in self.transitions], dtype=float)
        return src, dst, lp

    def transition_arrays(self):
        return self._arrays

    def out_transitions(self, state: int) -> dict[int, float]:
        """``{target: probability}`` for one source state."""
        return {b: math.exp(lp) for a, b, lp in self.transitions if a == state}

    def noise_level(self, obs) -> tuple[float, float]:
        """``(curvature, turn)`` jitter the emissions are widened by for ``obs``."""
        p = self.params
        if p.noise_mode == "fixed":
            return p.noise_curv, p.noise_turn
        if not isinstance(obs, ObservationSeq):
            return 0.0, 0.0
        q = p.noise_quantum
        level = min(round(estimate_jitter(obs) / q) * q, p.noise_max)
        return level, p.noise_turn_ratio * level

    def emissions_for(self, obs) -> tuple[EmissionParams, ...]:
        """Emission set used to score ``obs`` (depends on its jitter in adaptive mode)."""
        if self.params.noise_mode == "fixed":
            return self.emissions
        return _emission_set(self.params, self.noise_level(obs), self.n_states)

    def log_emissions(self, obs) -> np.ndarray:
        """``(T, N)`` emission log-likelihoods (features assumed independent)."""
        if isinstance(obs, ObservationSeq):
            arr, step = obs.array, obs.step_d
        else:
            arr, step = np.atleast_2d(np.asarray(obs, dtype=float)), self.step_d
        cols = (arr[:, 0], arr[:, 1], arr[:, 2] / step, arr[:, 3])
        cache: dict[tuple[int, object], np.ndarray] = {}
        out = np.zeros((len(arr), self.n_states))
        for s, em in enumerate(self.emissions_for(obs)):
            for k, pdf in enumerate(em.pdfs()):
                key = (k, pdf)
                if key not in cache:
                    cache[key] = np.log(pdf.density(cols[k]))
                out[:, s] += cache[key]
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "step_d": self.step_d,
            "params": asdict(self.params),
            "states": [
                {"index": s.index, "kind": s.kind, "direction": s.direction, "to_dir": s.to_dir,
                 "label": s.label, "initial_p": float(np.exp(self.initial_logp[s.index])),
                 "emission": self.emissions[s.index].to_dict()}
                for s in self.states
            ],
            "transitions": [
                {"from": a, "to": b, "p": math.exp(lp)} for a, b, lp in self.transitions
            ],
        }


@lru_cache(maxsize=64)
def _emission_set(params: ModelParams, noise: tuple[float, float], n: int) -> tuple[EmissionParams, ...]:
    return default_emissions(1.0, params, noise)[:n]


def emission_log_likelihood(model: HmmModel, state, obs: Observation, step_d: float | None = None) -> float:
    idx = state.index if isinstance(state, StateId) else int(state)
    step = model.step_d if step_d is None else step_d
    f1, f2, f3, f4 = obs
    x = (f1, f2, f3 / step, f4)
    return float(sum(np.log(pdf.density(v)) for pdf, v in zip(model.emissions[idx].pdfs(), x)))


def _normalised(src: int, weighted: Iterable[tuple[int, float]]) -> list[tuple[int, int, float]]:
    merged: dict[int, float] = {}
    for dst, w in weighted:
        merged[dst] = merged.get(dst, 0.0) + w
    total = sum(merged.values())
    return [(src, dst, math.log(w / total)) for dst, w in merged.items()]


def build_structured_model(step_d: float = 1.0, params: ModelParams = ModelParams()) -> HmmModel:
    """The 82-state fragmentation model: arc rings, line star, connectors, corners."""
    if not step_d > 0:
        raise InvalidParams("step_d must be positive")
    p = params
    states = _catalogue(with_extras=True)
    advance = 1 if p.handedness == "math" else -1
    basic = range(N_BASIC)
    trans: list[tuple[int, int, float]] = []

    for kind, step in ((ARC_CCW, advance), (ARC_CW, -advance)):
        for k in range(8):
            s = arc_index(kind, k)
            trans += _normalised(s, [
                (s, p.arc_self), (arc_index(kind, k + step), p.arc_adjacent), (CONNECTOR1_INDEX, p.arc_exit),
            ])
    for i in range(8):
        s = line_index(i)
        trans += _normalised(s, [(s, p.line_self), (CONNECTOR1_INDEX, p.line_exit)]
                             + [(corner_index(i, j), p.line_corner_total / 7) for j in range(8) if j != i])
    trans += _normalised(CONNECTOR1_INDEX, [(CONNECTOR2_INDEX, p.c1_to_c2)]
                         + [(b, p.c1_to_basic / N_BASIC) for b in basic])
    trans += _normalised(CONNECTOR2_INDEX, [(b, 1.0) for b in basic])
    for i in range(8):
        for j in range(8):
            if i != j:
                c = corner_index(i, j)
                trans += _normalised(c, [(c, p.corner_self), (line_index(j), p.corner_to_line)])

    init = np.full(len(states), -np.inf)
    init[:N_BASIC] = -math.log(N_BASIC)
    return HmmModel("structured", states, init, tuple(trans), default_emissions(step_d, p), float(step_d), p)


def build_ergodic_baseline(step_d: float = 1.0, params: ModelParams = ModelParams()) -> HmmModel:
    """Fully connected 24-state model: every state reaches every other."""
    if not step_d > 0:
        raise InvalidParams("step_d must be positive")
    p = params
    states = _catalogue(with_extras=False)
    other = (1.0 - p.ergodic_self) / (N_BASIC - 1)
    trans: list[tuple[int, int, float]] = []
    for s in range(N_BASIC):
        trans += _normalised(s, [(t, p.ergodic_self if t == s else other) for t in range(N_BASIC)])
    init = np.full(N_BASIC, -math.log(N_BASIC))
    emis = default_emissions(step_d, p)[:N_BASIC]
    return HmmModel("ergodic", states, init, tuple(trans), emis, float(step_d), p)


def build_model(name: str, step_d: float = 1.0, params: ModelParams = ModelParams()) -> HmmModel:
    if name == "structured":
        return build_structured_model(step_d, params)
    if name == "ergodic":
        return build_ergodic_baseline(step_d, params)
    raise InvalidParams(f"unknown model {name!r} (expected 'structured' or 'ergodic')")
