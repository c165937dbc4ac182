"""Segment-point matching, false positive / negative rates, model comparison."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .fragmenter import FragConfig, Fragmentation, fragment
from .geometry import RawStroke
from .model_zoo import HmmModel
from .synth import GroundTruth


@dataclass(frozen=True)
class MatchResult:
    matched: tuple[tuple[int, int], ...]  # (predicted, true) raw indices
    unmatched_predicted: tuple[int, ...]
    unmatched_truth: tuple[int, ...]
    tolerance: float
    stroke_id: str = ""

    @property
    def n_predicted(self) -> int:
        return len(self.matched) + len(self.unmatched_predicted)

    @property
    def n_truth(self) -> int:
        return len(self.matched) + len(self.unmatched_truth)


def match_points(predicted, truth, raw: RawStroke, tolerance: float, stroke_id: str | None = None) -> MatchResult:
    """Greedy nearest-first one-to-one matching of raw indices.

    Pairs are taken in order of increasing Euclidean distance between the
    referenced raw points; pairs further apart than ``tolerance`` are never
    matched. The first and last raw points are ignored on both sides.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    last = len(raw) - 1
    pred = sorted({int(i) for i in predicted if 0 < int(i) < last})
    true = sorted({int(i) for i in truth if 0 < int(i) < last})
    pts = raw.points
    pairs = []
    for p in pred:
        for t in true:
            dist = float(np.hypot(*(pts[p] - pts[t])))
            if dist <= tolerance:
                pairs.append((dist, p, t))
    pairs.sort()
    used_p: set[int] = set()
    used_t: set[int] = set()
    matched = []
    for _, p, t in pairs:
        if p in used_p or t in used_t:
            continue
        used_p.add(p)
        used_t.add(t)
        matched.append((p, t))
    matched.sort()
    return MatchResult(
        matched=tuple(matched),
        unmatched_predicted=tuple(p for p in pred if p not in used_p),
        unmatched_truth=tuple(t for t in true if t not in used_t),
        tolerance=float(tolerance),
        stroke_id=raw.id if stroke_id is None else stroke_id,
    )


@dataclass(frozen=True)
class StrokeRecord:
    id: str
    family: str
    n_predicted: int
    n_truth: int
    false_positives: int
    false_negatives: int
    decode_ms: float
    n_observations: int = 0
    kinds_correct: bool | None = None


@dataclass(frozen=True)
class EvalReport:
    false_positive_rate: float
    false_negative_rate: float
    records: tuple[StrokeRecord, ...]
    mean_ms: float
    max_ms: float
    model: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "false_positive_rate": self.false_positive_rate,
            "false_negative_rate": self.false_negative_rate,
            "timing_ms": {"mean": self.mean_ms, "max": self.max_ms},
            "strokes": [asdict(r) for r in self.records],
        }

    def per_family(self) -> dict[str, tuple[float, float]]:
        fams: dict[str, list[StrokeRecord]] = {}
        for r in self.records:
            fams.setdefault(r.family, []).append(r)
        return {f: _rates(rs) for f, rs in fams.items()}


def _rates(records) -> tuple[float, float]:
    n_pred = sum(r.n_predicted for r in records)
    n_true = sum(r.n_truth for r in records)
    fp = sum(r.false_positives for r in records)
    fn = sum(r.false_negatives for r in records)
    return (fp / n_pred if n_pred else 0.0, fn / n_true if n_true else 0.0)


def score(results, timings=None, families=None, model: str = "") -> EvalReport:
    """Corpus-level (micro-averaged) false positive and false negative rates."""
    results = list(results)
    if not results:
        raise ValueError("no results to score")
    timings = list(timings) if timings is not None else [0.0] * len(results)
    families = list(families) if families is not None else [""] * len(results)
    records = tuple(
        StrokeRecord(
            id=m.stroke_id, family=fam, n_predicted=m.n_predicted, n_truth=m.n_truth,
            false_positives=len(m.unmatched_predicted), false_negatives=len(m.unmatched_truth),
            decode_ms=float(ms),
        )
        for m, ms, fam in zip(results, timings, families)
    )
    return _report(records, model)


def _report(records, model: str) -> EvalReport:
    fp, fn = _rates(records)
    ms = [r.decode_ms for r in records]
    return EvalReport(fp, fn, tuple(records), float(np.mean(ms)), float(np.max(ms)), model)


@dataclass(frozen=True)
class EvalConfig:
    tolerance_steps: float = 2.5
    use_nominal_step: bool = True
    frag: FragConfig = field(default_factory=FragConfig)


def _kinds_match(frag: Fragmentation, truth: GroundTruth) -> bool:
    got = [s.kind for s in frag.segments]
    want = list(truth.primitives)
    if len(got) != len(want):
        return False
    return all(g.kind == w.kind for g, w in zip(got, want))


def evaluate(data, model: HmmModel, config: EvalConfig = EvalConfig()):
    """Run the pipeline on every ``(stroke, truth)`` pair and score it.

    Returns the report and the list of fragmentations (in input order).
    """
    records = []
    frags = []
    for stroke, truth in data:
        cfg = config.frag
        if config.use_nominal_step and cfg.step_d is None:
            cfg = FragConfig(**{**cfg.__dict__, "step_d": truth.step_d})
        t0 = time.perf_counter()
        frag = fragment(stroke, model, cfg)
        ms = (time.perf_counter() - t0) * 1000.0
        m = match_points(frag.segment_points, truth.true_segment_points, stroke,
                         config.tolerance_steps * frag.step_d)
        records.append(StrokeRecord(
            id=stroke.id, family=truth.family, n_predicted=m.n_predicted, n_truth=m.n_truth,
            false_positives=len(m.unmatched_predicted), false_negatives=len(m.unmatched_truth),
            decode_ms=ms, n_observations=len(frag.path) if frag.path is not None else 0,
            kinds_correct=_kinds_match(frag, truth),
        ))
        frags.append(frag)
    return _report(records, model.name), frags


@dataclass(frozen=True)
class Comparison:
    structured: EvalReport
    baseline: EvalReport

    def per_family(self) -> dict[str, dict]:
        a, b = self.structured.per_family(), self.baseline.per_family()
        return {f: {"structured": {"fp": a[f][0], "fn": a[f][1]},
                    "baseline": {"fp": b[f][0], "fn": b[f][1]}} for f in a}

    def to_dict(self) -> dict:
        return {"structured": self.structured.to_dict(), "baseline": self.baseline.to_dict(),
                "per_family": self.per_family()}


def compare_models(data, structured: HmmModel, baseline: HmmModel, config: EvalConfig = EvalConfig()) -> Comparison:
    data = list(data)
    s, _ = evaluate(data, structured, config)
    b, _ = evaluate(data, baseline, config)
    return Comparison(s, b)


# --- output formats ---------------------------------------------------------

def report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    fields_ = list(StrokeRecord.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=["model"] + fields_)
    w.writeheader()
    for r in report.records:
        w.writerow({"model": report.model, **asdict(r)})
    return buf.getvalue()


def _pct(x: float) -> str:
    return f"{100 * x:6.2f}%"


def format_table(report: EvalReport, baseline: EvalReport | None = None) -> str:
    """Human-readable summary with a per-family breakdown."""
    lines = []
    if baseline is None:
        lines.append(f"{'family':<10} {'FP':>8} {'FN':>8} {'ms/stroke':>10}")
        fams = report.per_family()
        for f, (fp, fn) in fams.items():
            ms = np.mean([r.decode_ms for r in report.records if r.family == f])
            lines.append(f"{f or '-':<10} {_pct(fp):>8} {_pct(fn):>8} {ms:10.2f}")
        lines.append(f"{'ALL':<10} {_pct(report.false_positive_rate):>8} "
                     f"{_pct(report.false_negative_rate):>8} {report.mean_ms:10.2f}")
        lines.append(f"decode time per stroke: mean {report.mean_ms:.2f} ms, max {report.max_ms:.2f} ms")
        return "\n".join(lines)
    lines.append(f"{'family':<10} {'FP struct':>10} {'FP base':>10} {'FN struct':>10} {'FN base':>10}")
    a, b = report.per_family(), baseline.per_family()
    for f in a:
        lines.append(f"{f or '-':<10} {_pct(a[f][0]):>10} {_pct(b[f][0]):>10} {_pct(a[f][1]):>10} {_pct(b[f][1]):>10}")
    lines.append(f"{'ALL':<10} {_pct(report.false_positive_rate):>10} {_pct(baseline.false_positive_rate):>10} "
                 f"{_pct(report.false_negative_rate):>10} {_pct(baseline.false_negative_rate):>10}")
    lines.append(f"decode time per stroke (ms): structured mean {report.mean_ms:.2f} max {report.max_ms:.2f}; "
                 f"baseline mean {baseline.mean_ms:.2f} max {baseline.max_ms:.2f}")
    return "\n".join(lines)


def report_json(obj) -> str:
    return json.dumps(obj.to_dict(), indent=2)
