"""Stroke -> typed segments: resample, featurise, decode, post-process."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import ObservationSeq, extract_observations
from .geometry import (
    RawStroke,
    ResampleConfig,
    ResampledStroke,
    choose_resample_step,
    median_spacing,
    raw_curvature_profile,
    resample,
)
from .hmm import StatePath, viterbi
from .model_zoo import ARC_CCW, ARC_CW, LINE, HmmModel, StateId, _catalogue

_FULL_CATALOGUE = _catalogue(with_extras=True)


@dataclass(frozen=True)
class PrimitiveKind:
    kind: str  # "line" | "arc_cw" | "arc_ccw"
    direction: int | None = None

    def __post_init__(self):
        if self.kind not in (LINE, ARC_CW, ARC_CCW):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        if (self.kind == LINE) != (self.direction is not None):
            raise ValueError("lines carry a direction, arcs do not")

    @property
    def is_arc(self) -> bool:
        return self.kind != LINE

    def __str__(self) -> str:
        return f"line({self.direction})" if self.kind == LINE else self.kind


@dataclass(frozen=True)
class Segment:
    kind: PrimitiveKind
    raw_start: int
    raw_end: int
    resampled_range: tuple[int, int]  # inclusive


@dataclass(frozen=True)
class Fragmentation:
    segments: tuple[Segment, ...]
    segment_points: tuple[int, ...]
    path: StatePath | None = field(compare=False)
    step_d: float
    # raw indices before refinement, one per segment point (diagnostics)
    candidates: tuple[int, ...] = field(default=(), compare=False)
    stroke_id: str = ""


@dataclass(frozen=True)
class FragConfig:
    """Pipeline knobs.

    ``step_d`` fixes the resampling step; when ``None`` it is chosen per
    stroke by :func:`choose_resample_step`. ``refine_window`` and
    ``curvature_half_window`` are in raw points; ``None`` derives them from
    the step and the median raw spacing.
    """

    step_d: float | None = None
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    min_run: int = 3
    max_boundary_run: int = 3
    refine_window: int | None = None
    curvature_half_window: int | None = None
    refine_scale: float = 1.5
    # |f3| (in steps) above which a line/arc join counts as a corner
    corner_curv: float = 0.35
    # resampled points searched either side of a smooth join
    smooth_reach: int = 4

    def windows(self, raw: RawStroke, step_d: float) -> tuple[int, int]:
        spacing = max(median_spacing(raw), 1e-12)
        refine = self.refine_window
        if refine is None:
            refine = max(1, math.ceil(self.refine_scale * step_d / spacing))
        half = self.curvature_half_window
        if half is None:
            half = max(1, round(2.0 * step_d / spacing))
        return refine, half


def primitive_of(state: StateId) -> PrimitiveKind | None:
    """Primitive a state belongs to, or ``None`` for boundary states."""
    if state.kind == LINE:
        return PrimitiveKind(LINE, state.direction)
    if state.kind in (ARC_CW, ARC_CCW):
        return PrimitiveKind(state.kind)
    return None


@dataclass
class _Run:
    kind: PrimitiveKind | None  # None = boundary run
    start: int
    end: int  # exclusive

    @property
    def length(self) -> int:
        return self.end - self.start


def _runs(kinds: list) -> list[_Run]:
    runs: list[_Run] = []
    for i, k in enumerate(kinds):
        if runs and runs[-1].kind == k:
            runs[-1].end = i + 1
        else:
            runs.append(_Run(k, i, i + 1))
    return runs


def _merge_adjacent(runs: list[_Run]) -> list[_Run]:
    out: list[_Run] = []
    for r in runs:
        if out and out[-1].kind == r.kind:
            out[-1].end = r.end
        else:
            out.append(_Run(r.kind, r.start, r.end))
    return out


def _absorb_short(runs: list[_Run], min_run: int) -> list[_Run]:
    """Fold primitive runs shorter than ``min_run`` into a neighbour.

    A short run next to a primitive run joins the longest such neighbour;
    one wedged between boundary runs becomes boundary itself.
    """
    runs = _merge_adjacent(runs)
    while True:
        short = [i for i, r in enumerate(runs)
                 if r.kind is not None and r.length < min_run and len(runs) > 1]
        if not short:
            return runs
        i = min(short, key=lambda j: (runs[j].length, j))
        nbrs = [j for j in (i - 1, i + 1) if 0 <= j < len(runs) and runs[j].kind is not None]
        if nbrs:
            j = max(nbrs, key=lambda j: (runs[j].length, -j))
            runs[i].kind = runs[j].kind
        else:
            runs[i].kind = None
        runs = _merge_adjacent(runs)


def _dominant(states: np.ndarray, catalogue, run: _Run) -> PrimitiveKind:
    if run.kind.kind != LINE:
        return run.kind
    dirs = [catalogue[s].direction for s in states[run.start:run.end] if catalogue[s].kind == LINE]
    if not dirs:
        return run.kind
    counts = np.bincount(dirs, minlength=8)
    return PrimitiveKind(LINE, int(np.argmax(counts)))


def _weighted_centre(idx: range, weights: np.ndarray) -> int:
    w = np.abs(weights[idx.start:idx.stop])
    pos = np.arange(idx.start, idx.stop)
    if w.sum() <= 0:
        return int(round(pos.mean()))
    return int(round(float((pos * w).sum() / w.sum())))


def _join_kind(a: PrimitiveKind, b: PrimitiveKind, corner_curv: float, f3: np.ndarray, cut: int) -> str:
    """``corner`` for line/line joins or a sharp bend at the cut, else ``smooth``."""
    if not a.is_arc and not b.is_arc:
        return "corner"
    lo, hi = max(0, cut - 2), min(len(f3), cut + 3)
    if np.max(np.abs(f3[lo:hi])) >= corner_curv:
        return "corner"
    return "smooth"


def _changepoint(f3: np.ndarray, cut: int, reach: int) -> int:
    """Least-squares single mean shift of ``f3`` within ``reach`` of ``cut``.

    Both sides are fitted by their mean over a span of ``2 * reach`` points;
    the split with the smallest residual wins, ties going to the one nearest
    ``cut``.
    """
    lo, hi = max(0, cut - 2 * reach), min(len(f3), cut + 2 * reach + 1)
    best, best_cost = cut, None
    for k in range(max(lo + 1, cut - reach), min(hi - 1, cut + reach) + 1):
        left, right = f3[lo:k], f3[k:hi]
        cost = float(((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum())
        if best_cost is None or cost < best_cost - 1e-12 or (
                abs(cost - best_cost) <= 1e-12 and abs(k - cut) < abs(best - cut)):
            best, best_cost = k, cost
    return best


def segments_from_path(
    path: StatePath,
    rs: ResampledStroke,
    raw: RawStroke,
    config: FragConfig = FragConfig(),
    obs: ObservationSeq | None = None,
    states: tuple[StateId, ...] = _FULL_CATALOGUE,
    handedness: str = "math",
) -> Fragmentation:
    """Turn a decoded state path into segments and refined segment points."""
    seq = np.asarray(path.states)
    if len(seq) != len(rs):
        raise ValueError(f"path length {len(seq)} != resampled length {len(rs)}")
    if obs is None:
        obs = extract_observations(rs, handedness)
    f3 = obs.array[:, 2] / rs.step_d  # in steps
    n_raw = len(raw)
    refine, half = config.windows(raw, rs.step_d)
    curvature = raw_curvature_profile(raw, half)

    runs = _absorb_short(_runs([primitive_of(states[s]) for s in seq]), config.min_run)
    # boundary runs with no primitive on one side belong to that neighbour
    if len(runs) > 1 and runs[0].kind is None:
        runs[1].start = 0
        runs = runs[1:]
    if len(runs) > 1 and runs[-1].kind is None:
        runs[-2].end = runs[-1].end
        runs = runs[:-1]

    if runs[0].kind is None:  # nothing but boundary states
        kinds = [primitive_of(states[s]) for s in seq]
        fallback = next((k for k in kinds if k is not None), PrimitiveKind(LINE, 0))
        runs = [_Run(fallback, 0, len(seq))]

    # walk primitive runs; every cut is the candidate resampled index of a boundary
    groups: list[list[_Run]] = [[runs[0]]]
    cuts: list[int] = []
    i = 1
    while i < len(runs):
        r = runs[i]
        if r.kind is None:
            nxt = runs[i + 1]
            lo, hi = max(0, r.start - 1), min(len(f3), r.end + 1)
            sharp = np.max(np.abs(f3[lo:hi])) >= config.corner_curv
            if nxt.kind == groups[-1][-1].kind and r.length <= config.max_boundary_run and not sharp:
                groups[-1] += [r, nxt]
            else:
                cuts.append(_weighted_centre(range(r.start, r.end), f3))
                groups[-1].append(r)
                groups.append([nxt])
            i += 2
        else:
            prev = groups[-1][-1]
            cuts.append(_weighted_centre(range(prev.end - 1, r.start + 1), f3))
            groups.append([r])
            i += 1

    # corners snap to the raw point of maximum curvature nearby; smooth
    # joins move to the best mean shift of f3 around the decoded cut
    candidates: list[int] = []
    points: list[int] = []
    keep_groups = [groups[0]]
    for prev_g, g, cut in zip(groups, groups[1:], cuts):
        before, after = prev_g[-1], g[0]
        if any(r.kind is None for r in prev_g[-1:]):
            before = next(r for r in reversed(prev_g) if r.kind is not None)
        kind = _join_kind(before.kind, after.kind, config.corner_curv, f3, cut)
        if kind != "corner":
            cut = _changepoint(f3, cut, config.smooth_reach)
        cand = int(rs.origin_index[min(max(cut, 0), len(rs) - 1)])
        cand = min(max(cand, 1), n_raw - 2)
        lo, hi = max(1, cand - refine), min(n_raw - 2, cand + refine)
        if kind == "corner" and hi >= lo:
            best = lo + int(np.argmax(curvature[lo:hi + 1]))
        else:
            best = cand
        if points and best <= points[-1] or best >= n_raw - 1:
            keep_groups[-1] = keep_groups[-1] + g  # collision: merge into the previous segment
            continue
        candidates.append(cand)
        points.append(best)
        keep_groups.append(g)

    segments: list[Segment] = []
    bounds = [0] + points + [n_raw - 1]
    for k, g in enumerate(keep_groups):
        prims = [r for r in g if r.kind is not None]
        main = max(prims, key=lambda r: r.length)
        start, end = g[0].start, g[-1].end - 1
        span = _Run(main.kind, start, end + 1)
        if main.kind.kind == LINE:
            kind = _dominant(seq, states, span)
        else:
            kind = main.kind
        segments.append(Segment(kind, bounds[k], bounds[k + 1], (start, end)))

    return Fragmentation(
        segments=tuple(segments),
        segment_points=tuple(points),
        path=path,
        step_d=rs.step_d,
        candidates=tuple(candidates),
        stroke_id=raw.id,
    )


def fragment(stroke: RawStroke, model: HmmModel, config: FragConfig = FragConfig()) -> Fragmentation:
    step = config.step_d if config.step_d is not None else choose_resample_step(stroke, config.resample)
    rs = resample(stroke, step)
    obs = extract_observations(rs, model.handedness)
    path = viterbi(model, obs)
    return segments_from_path(path, rs, stroke, config, obs=obs, states=model.states,
                              handedness=model.handedness)
