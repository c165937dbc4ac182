"""SVG sheets of fragmented strokes: coloured segments, circles at segment points."""
from __future__ import annotations

import colorsys
import math
import xml.etree.ElementTree as ET

import numpy as np

from .fitting import fit_circle, fit_line
from .fragmenter import Fragmentation, PrimitiveKind
from .geometry import RawStroke

SVG_NS = "http://www.w3.org/2000/svg"

DEFAULT_COLORS = {
    "arc_cw": "#d62728",
    "arc_ccw": "#1f77b4",
    # lines: one hue per direction class
    **{f"line{k}": "#%02x%02x%02x" % tuple(int(255 * c) for c in colorsys.hls_to_rgb(k / 8 * 0.8 + 0.2, 0.4, 0.7))
       for k in range(8)},
}


def kind_color(kind: PrimitiveKind, colors: dict | None = None) -> str:
    table = {**DEFAULT_COLORS, **(colors or {})}
    key = f"line{kind.direction}" if kind.kind == "line" else kind.kind
    return table[key]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _segment_path(pts: np.ndarray, kind: PrimitiveKind, fitted: bool, to_px) -> str:
    if fitted and kind.kind == "line" and len(pts) >= 2:
        fit = fit_line(pts)
        (x0, y0), (x1, y1) = to_px(fit.start), to_px(fit.end)
        return f"M {_fmt(x0)} {_fmt(y0)} L {_fmt(x1)} {_fmt(y1)}"
    if fitted and kind.is_arc:
        circle = fit_circle(pts)
        if circle is not None:
            return _arc_path(pts, circle, kind, to_px)
    coords = [to_px(p) for p in pts]
    head = f"M {_fmt(coords[0][0])} {_fmt(coords[0][1])}"
    return head + "".join(f" L {_fmt(x)} {_fmt(y)}" for x, y in coords[1:])


def _arc_path(pts, circle, kind, to_px) -> str:
    c, r = circle.center, circle.radius
    a0 = math.atan2(*(pts[0] - c)[::-1])
    a1 = math.atan2(*(pts[-1] - c)[::-1])
    ang = np.unwrap(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
    sweep = abs(ang[-1] - ang[0])
    start = c + r * np.array([math.cos(a0), math.sin(a0)])
    end = c + r * np.array([math.cos(a1), math.sin(a1)])
    (x0, y0), (x1, y1) = to_px(start), to_px(end)
    scale = abs(to_px(c + np.array([r, 0.0]))[0] - to_px(c)[0])
    large = 1 if sweep > math.pi else 0
    # y is flipped on the sheet, which mirrors the turning sense
    flag = 1 if kind.kind == "arc_cw" else 0
    if sweep >= 2 * math.pi - 1e-3:
        return _arc_path(pts[: len(pts) // 2 + 1], circle, kind, to_px) + " " + \
            _arc_path(pts[len(pts) // 2:], circle, kind, to_px).replace("M", "L", 1)
    return (f"M {_fmt(x0)} {_fmt(y0)} A {_fmt(scale)} {_fmt(scale)} 0 {large} {flag} "
            f"{_fmt(x1)} {_fmt(y1)}")


def render_svg(
    strokes: list[RawStroke],
    frags: list[Fragmentation],
    columns: int = 4,
    cell: float = 220.0,
    margin: float = 14.0,
    colors: dict | None = None,
    fitted: bool = False,
    point_radius: float = 3.0,
) -> str:
    """Grid sheet with one cell per stroke, y axis pointing up.

    Every segment becomes one ``<path>``; segment points are drawn as small
    circles. With ``fitted`` the segments are replaced by their least-squares
    line or circle, which is purely cosmetic.
    """
    if len(strokes) != len(frags):
        raise ValueError("need one fragmentation per stroke")
    columns = max(1, columns)
    rows = max(1, math.ceil(len(strokes) / columns))
    width, height = columns * cell, rows * cell
    ET.register_namespace("", SVG_NS)
    root = ET.Element(f"{{{SVG_NS}}}svg", {
        "version": "1.1", "width": _fmt(width), "height": _fmt(height),
        "viewBox": f"0 0 {_fmt(width)} {_fmt(height)}",
    })
    ET.SubElement(root, f"{{{SVG_NS}}}rect", {"width": "100%", "height": "100%", "fill": "white"})
    for k, (stroke, frag) in enumerate(zip(strokes, frags)):
        ox, oy = (k % columns) * cell, (k // columns) * cell
        g = ET.SubElement(root, f"{{{SVG_NS}}}g", {"id": f"stroke-{k}", "data-id": stroke.id})
        title = ET.SubElement(g, f"{{{SVG_NS}}}title")
        title.text = stroke.id
        pts = stroke.points
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = max(float(np.max(hi - lo)), 1e-12)
        s = (cell - 2 * margin) / span
        mid = (lo + hi) / 2

        def to_px(p, ox=ox, oy=oy, s=s, mid=mid):
            return (ox + cell / 2 + s * (p[0] - mid[0]), oy + cell / 2 - s * (p[1] - mid[1]))

        for seg in frag.segments:
            d = _segment_path(pts[seg.raw_start:seg.raw_end + 1], seg.kind, fitted, to_px)
            ET.SubElement(g, f"{{{SVG_NS}}}path", {
                "d": d, "fill": "none", "stroke": kind_color(seg.kind, colors),
                "stroke-width": "2", "stroke-linejoin": "round", "data-kind": str(seg.kind),
            })
        for i in frag.segment_points:
            x, y = to_px(pts[i])
            ET.SubElement(g, f"{{{SVG_NS}}}circle", {
                "cx": _fmt(x), "cy": _fmt(y), "r": _fmt(point_radius),
                "fill": "none", "stroke": "black", "stroke-width": "1",
            })
    return ET.tostring(root, encoding="unicode", xml_declaration=True)
