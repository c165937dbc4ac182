"""JSON formats: strokes, ground truth sidecars and fragmentation results."""
from __future__ import annotations

import json
from typing import Iterable

from .fragmenter import Fragmentation, PrimitiveKind, Segment
from .geometry import RawStroke
from .synth import GroundTruth


class FormatError(ValueError):
    """Malformed or inconsistent input document."""


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc


def _stroke_entries(doc) -> list:
    if not isinstance(doc, dict) or not isinstance(doc.get("strokes"), list):
        raise FormatError('expected an object with a "strokes" array')
    return doc["strokes"]


def parse_strokes(text: str) -> list[RawStroke]:
    """Read a stroke document ``{"strokes": [{"id", "points": [[x, y(, t)], ...]}]}``.

    Structural problems raise :class:`FormatError`; geometrically unusable
    strokes raise :class:`~strokehmm.geometry.DegenerateStroke` naming the id.
    """
    out = []
    seen = set()
    for k, entry in enumerate(_stroke_entries(_load(text))):
        if not isinstance(entry, dict) or "points" not in entry:
            raise FormatError(f"stroke #{k}: missing points")
        sid = str(entry.get("id", k))
        if sid in seen:
            raise FormatError(f"duplicate stroke id {sid!r}")
        seen.add(sid)
        rows = entry["points"]
        if not isinstance(rows, list) or any(not isinstance(r, list) or len(r) not in (2, 3) for r in rows):
            raise FormatError(f"stroke {sid!r}: points must be [x, y] or [x, y, t] lists")
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise FormatError(f"stroke {sid!r}: mixed point widths")
        try:
            xy = [[float(r[0]), float(r[1])] for r in rows]
            t = [float(r[2]) for r in rows] if widths == {3} else None
        except (TypeError, ValueError) as exc:
            raise FormatError(f"stroke {sid!r}: non-numeric coordinate") from exc
        out.append(RawStroke.from_points(xy, t=t, id=sid))
    return out


def dump_strokes(strokes: Iterable[RawStroke]) -> str:
    docs = []
    for s in strokes:
        if s.t is None:
            pts = [[float(x), float(y)] for x, y in s.points]
        else:
            pts = [[float(x), float(y), float(t)] for (x, y), t in zip(s.points, s.t)]
        docs.append({"id": s.id, "points": pts})
    return json.dumps({"strokes": docs})


def _kind_to_dict(kind: PrimitiveKind) -> dict:
    return {"kind": kind.kind, "direction": kind.direction}


def _kind_from_dict(d: dict) -> PrimitiveKind:
    try:
        return PrimitiveKind(d["kind"], d.get("direction"))
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad primitive {d!r}") from exc


def truth_to_dict(stroke_id: str, truth: GroundTruth) -> dict:
    return {
        "id": stroke_id,
        "true_segment_points": list(truth.true_segment_points),
        "primitives": [_kind_to_dict(p) for p in truth.primitives],
        "step_d": truth.step_d,
        "family": truth.family,
        "generator_spec": truth.generator_spec,
    }


def dump_truth(pairs: Iterable[tuple[RawStroke, GroundTruth]]) -> str:
    return json.dumps({"truth": [truth_to_dict(s.id, t) for s, t in pairs]})


def parse_truth(text: str) -> dict[str, GroundTruth]:
    """Ground-truth sidecar, keyed by stroke id."""
    doc = _load(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("truth"), list):
        raise FormatError('expected an object with a "truth" array')
    out = {}
    for d in doc["truth"]:
        try:
            out[str(d["id"])] = GroundTruth(
                true_segment_points=tuple(int(i) for i in d["true_segment_points"]),
                primitives=tuple(_kind_from_dict(p) for p in d.get("primitives", [])),
                generator_spec=d.get("generator_spec", {}),
                step_d=float(d.get("step_d", 1.0)),
                family=str(d.get("family", "custom")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad truth entry: {exc}") from exc
    return out


def fragmentation_to_dict(frag: Fragmentation) -> dict:
    return {
        "id": frag.stroke_id,
        "step_d": frag.step_d,
        "segment_points": list(frag.segment_points),
        "segments": [
            {**_kind_to_dict(s.kind), "raw_start": s.raw_start, "raw_end": s.raw_end,
             "resampled_range": list(s.resampled_range)}
            for s in frag.segments
        ],
    }


def fragmentation_from_dict(d: dict) -> Fragmentation:
    """Inverse of :func:`fragmentation_to_dict`; the decoder path is not kept."""
    try:
        segs = tuple(
            Segment(_kind_from_dict(s), int(s["raw_start"]), int(s["raw_end"]),
                    tuple(int(v) for v in s.get("resampled_range", (0, 0))))
            for s in d["segments"]
        )
        return Fragmentation(
            segments=segs,
            segment_points=tuple(int(i) for i in d["segment_points"]),
            path=None,
            step_d=float(d["step_d"]),
            stroke_id=str(d.get("id", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad fragmentation entry: {exc}") from exc


def dump_fragmentations(frags: Iterable[Fragmentation]) -> str:
    return json.dumps({"fragmentations": [fragmentation_to_dict(f) for f in frags]}, indent=1)


def parse_fragmentations(text: str) -> list[Fragmentation]:
    doc = _load(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("fragmentations"), list):
        raise FormatError('expected an object with a "fragmentations" array')
    return [fragmentation_from_dict(d) for d in doc["fragmentations"]]
