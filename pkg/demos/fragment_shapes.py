"""Fragment a few hand-built strokes and draw them.

Run from the repository root:

    python3 demos/fragment_shapes.py [out.svg]

An "L", a circle and an "S" are generated with a little jitter, decoded with
the structured model, and the segments and segment points are printed. The
annotated sheet is written to ``fragment_shapes.svg`` by default.
"""
import math
import sys

from strokehmm import FragConfig, build_structured_model, fragment
from strokehmm.svg import render_svg
from strokehmm.synth import NoiseSpec, Piece, ShapeSpec, generate

SHAPES = {
    "L": ShapeSpec((Piece("line", 20.0), Piece("line", 20.0, turn=math.pi / 2))),
    "circle": ShapeSpec((Piece("arc", radius=18.0, sweep=2 * math.pi, orientation="cw"),)),
    "S": ShapeSpec((Piece("arc", radius=15.0, sweep=math.pi, orientation="ccw"),
                    Piece("arc", radius=15.0, sweep=math.pi, orientation="cw"))),
}


def main(out="fragment_shapes.svg"):
    model = build_structured_model()
    strokes, frags = [], []
    for k, (name, spec) in enumerate(SHAPES.items()):
        raw, truth = generate(spec, NoiseSpec(jitter_sigma=0.05, seed=k), stroke_id=name)
        frag = fragment(raw, model, FragConfig(step_d=1.0))
        print(f"{name}: {len(raw)} raw points")
        for seg in frag.segments:
            print(f"  {str(seg.kind):<9} raw {seg.raw_start:>4} .. {seg.raw_end:<4}")
        print(f"  segment points {list(frag.segment_points)}, true {list(truth.true_segment_points)}")
        strokes.append(raw)
        frags.append(frag)
    with open(out, "w") as fh:
        fh.write(render_svg(strokes, frags, columns=3))
    print(f"wrote {out}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
