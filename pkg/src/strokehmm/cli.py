"""Command-line front end.

Exit codes: 0 success, 1 unreadable/invalid input or configuration (bad
JSON, unknown config key, unknown shape family, stroke/truth id mismatch),
2 a degenerate stroke (the message names its id).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

from . import io as sio
from .evaluation import EvalConfig, compare_models, evaluate, format_table, report_csv
from .features import TooShort, extract_observations
from .fragmenter import FragConfig, fragment
from .geometry import DegenerateStroke, ResampleConfig, choose_resample_step, resample
from .hmm import viterbi
from .model_zoo import InvalidParams, ModelParams, build_model
from .svg import DEFAULT_COLORS, render_svg
from .synth import CorpusSpec, InvalidSpec, corpus

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; built from a flat JSON config plus flags."""

    model: str = "structured"
    params: ModelParams = field(default_factory=ModelParams)
    frag: FragConfig = field(default_factory=FragConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    colors: dict = field(default_factory=dict)
    svg_columns: int = 4
    workers: int = 1
    seed: int | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Route flat keys to the component that owns them; reject the rest."""
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        buckets: dict[str, dict] = {"params": {}, "frag": {}, "resample": {}, "eval": {}, "top": {}}
        owners = [
            ("params", {f.name for f in fields(ModelParams)}),
            ("frag", {f.name for f in fields(FragConfig)} - {"resample"}),
            ("resample", {f.name for f in fields(ResampleConfig)}),
            ("eval", {f.name for f in fields(EvalConfig)} - {"frag"}),
            ("top", {"model", "colors", "svg_columns", "workers", "seed"}),
        ]
        for key, value in data.items():
            owner = next((name for name, keys in owners if key in keys), None)
            if owner is None:
                raise UsageError(f"unknown config key {key!r}")
            buckets[owner][key] = value
        top = buckets["top"]
        if "colors" in top:
            bad = set(top["colors"]) - set(DEFAULT_COLORS)
            if bad:
                raise UsageError(f"unknown colour keys: {sorted(bad)}")
        try:
            params = ModelParams.from_dict(buckets["params"])
            frag = FragConfig(resample=ResampleConfig(**buckets["resample"]), **buckets["frag"])
            ev = EvalConfig(frag=frag, **buckets["eval"])
        except (InvalidParams, TypeError, ValueError) as exc:
            raise UsageError(f"invalid config: {exc}") from exc
        return cls(params=params, frag=frag, eval=ev, **top)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(_read(args.config))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config}: invalid JSON: {exc}") from exc
    cfg = RunConfig.from_dict(data)
    if getattr(args, "model", None):
        cfg = replace(cfg, model=args.model)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "workers", None):
        cfg = replace(cfg, workers=args.workers)
    if cfg.model not in ("structured", "ergodic"):
        raise UsageError(f"unknown model {cfg.model!r}")
    return cfg


def _model(cfg: RunConfig, name: str | None = None):
    return build_model(name or cfg.model, 1.0, cfg.params)


def _fragment_one(stroke, model, cfg: RunConfig):
    try:
        return fragment(stroke, model, cfg.frag)
    except (DegenerateStroke, TooShort) as exc:
        raise DegenerateStroke(f"stroke {stroke.id!r}: {exc}") from exc


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))  # map keeps input order
    return [fn(x) for x in items]


def _debug_rows(strokes, model, cfg: RunConfig):
    obs_rows, path_rows = [], []
    for s in strokes:
        step = cfg.frag.step_d if cfg.frag.step_d is not None else choose_resample_step(s, cfg.frag.resample)
        rs = resample(s, step)
        obs = extract_observations(rs, model.handedness)
        path, margins = viterbi(model, obs, return_margins=True)
        for i, (f1, f2, f3, f4) in enumerate(obs.array):
            obs_rows.append([s.id, i, int(rs.origin_index[i]), f1, f2, f3, f4])
        for i, (st, m) in enumerate(zip(path.states, margins)):
            path_rows.append([s.id, i, int(st), model.states[st].label, m])
    return obs_rows, path_rows


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_fragment(args) -> int:
    cfg = load_config(args)
    strokes = sio.parse_strokes(_read(args.input))
    model = _model(cfg)
    frags = _map(lambda s: _fragment_one(s, model, cfg), strokes, cfg.workers)
    _write(args.output, sio.dump_fragmentations(frags))
    if args.svg:
        _write(args.svg, render_svg(strokes, frags, columns=cfg.svg_columns, colors=cfg.colors,
                                    fitted=args.svg_fit))
    if args.debug_observations or args.debug_path:
        obs_rows, path_rows = _debug_rows(strokes, model, cfg)
        if args.debug_observations:
            _write_csv(args.debug_observations,
                       ["stroke_id", "index", "raw_index", "f1", "f2", "f3", "f4"], obs_rows)
        if args.debug_path:
            _write_csv(args.debug_path, ["stroke_id", "index", "state", "label", "margin"], path_rows)
    return EXIT_OK


def cmd_gen(args) -> int:
    recipe = CorpusSpec()
    if args.recipe:
        try:
            recipe = CorpusSpec.from_dict(json.loads(_read(args.recipe)))
        except json.JSONDecodeError as exc:
            raise UsageError(f"recipe {args.recipe}: invalid JSON: {exc}") from exc
        except TypeError as exc:
            raise UsageError(f"recipe {args.recipe}: {exc}") from exc
    if args.seed is not None:
        recipe = replace(recipe, seed=args.seed)
    data = corpus(recipe)
    _write(args.strokes, sio.dump_strokes(s for s, _ in data))
    _write(args.truth, sio.dump_truth(data))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = load_config(args)
    strokes = sio.parse_strokes(_read(args.strokes))
    truth = sio.parse_truth(_read(args.truth))
    ids = [s.id for s in strokes]
    if set(ids) != set(truth):
        missing = sorted(set(ids) ^ set(truth))[:5]
        raise UsageError(f"stroke and truth ids differ (e.g. {missing})")
    data = [(s, truth[s.id]) for s in strokes]
    if not data:
        raise UsageError("no strokes to evaluate")
    try:
        if args.compare:
            cmp = compare_models(data, _model(cfg, "structured"), _model(cfg, "ergodic"), cfg.eval)
            outputs = {"table": format_table(cmp.structured, cmp.baseline),
                       "json": json.dumps(cmp.to_dict(), indent=1),
                       "csv": report_csv(cmp.structured) + report_csv(cmp.baseline).split("\n", 1)[1]}
        else:
            report, _ = evaluate(data, _model(cfg), cfg.eval)
            outputs = {"table": format_table(report), "json": json.dumps(report.to_dict(), indent=1),
                       "csv": report_csv(report)}
    except (DegenerateStroke, TooShort) as exc:
        raise DegenerateStroke(str(exc)) from exc
    _write(args.output, outputs[args.format])
    return EXIT_OK


def cmd_dump_model(args) -> int:
    cfg = load_config(args)
    _write(args.output, json.dumps(_model(cfg).to_dict(), indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strokehmm", description="HMM stroke fragmentation into lines and arcs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_model=True):
        sp.add_argument("--config", metavar="PATH", help="flat JSON config; unknown keys are rejected")
        sp.add_argument("--seed", type=int, default=None)
        if with_model:
            sp.add_argument("--model", choices=("structured", "ergodic"), default=None)

    f = sub.add_parser("fragment", help="fragment strokes from a stroke JSON file")
    f.add_argument("input", help="stroke JSON ('-' for stdin)")
    f.add_argument("-o", "--output", help="fragmentation JSON (default stdout)")
    f.add_argument("--svg", metavar="PATH", help="write an annotated SVG sheet")
    f.add_argument("--svg-fit", action="store_true", help="draw fitted lines/circles instead of raw ink")
    f.add_argument("--debug-observations", metavar="PATH", help="CSV of per-point features")
    f.add_argument("--debug-path", metavar="PATH", help="CSV of the winning state and its margin per point")
    f.add_argument("--workers", type=int, default=None, help="decode strokes on N threads")
    common(f)
    f.set_defaults(func=cmd_fragment)

    g = sub.add_parser("gen", help="generate a labelled synthetic corpus")
    g.add_argument("recipe", nargs="?", help="corpus recipe JSON (default: the acceptance recipe)")
    g.add_argument("--strokes", required=True, help="output stroke JSON")
    g.add_argument("--truth", required=True, help="output ground-truth JSON")
    g.add_argument("--seed", type=int, default=None)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="score fragmentation against ground truth")
    e.add_argument("strokes")
    e.add_argument("truth")
    e.add_argument("--compare", action="store_true", help="run structured and ergodic models side by side")
    e.add_argument("--format", choices=("table", "json", "csv"), default="table")
    e.add_argument("-o", "--output")
    common(e)
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("dump-model", help="print states, transitions and densities as JSON")
    d.add_argument("-o", "--output")
    common(d)
    d.set_defaults(func=cmd_dump_model)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateStroke as exc:
        print(f"error: degenerate stroke: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, sio.FormatError, InvalidSpec, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
