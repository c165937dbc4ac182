import csv
import hashlib
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from strokehmm import io as sio
from strokehmm.cli import EXIT_DEGENERATE, EXIT_INPUT, EXIT_OK, RunConfig, UsageError, main

from shapes import l_stroke


def _write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


@pytest.fixture
def l_file(tmp_path):
    raw, _ = l_stroke()
    return _write(tmp_path / "l.json", {"strokes": [{"id": "L", "points": raw.points.tolist()}]})


def test_fragment_l(tmp_path, l_file):
    out, svg = tmp_path / "out.json", tmp_path / "out.svg"
    assert main(["fragment", l_file, "-o", str(out), "--svg", str(svg), "--config",
                 _write(tmp_path / "c.json", {"step_d": 1.0})]) == EXIT_OK
    (frag,) = sio.parse_fragmentations(out.read_text())
    assert len(frag.segment_points) == 1
    root = ET.parse(svg).getroot()
    assert len(root.findall(".//{http://www.w3.org/2000/svg}path")) == 2
    assert len(root.findall(".//{http://www.w3.org/2000/svg}circle")) == 1


def test_fragment_stdout_and_workers(tmp_path, capsys):
    data = {"strokes": [{"id": str(k), "points": [[0, 0], [10 + k, 0], [10 + k, 10]]} for k in range(6)]}
    path = _write(tmp_path / "s.json", data)
    assert main(["fragment", path]) == EXIT_OK
    serial = capsys.readouterr().out
    assert main(["fragment", path, "--workers", "3"]) == EXIT_OK
    assert capsys.readouterr().out == serial
    ids = [f["id"] for f in json.loads(serial)["fragmentations"]]
    assert ids == [str(k) for k in range(6)]


def test_empty_strokes(tmp_path, capsys):
    assert main(["fragment", _write(tmp_path / "e.json", {"strokes": []})]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"fragmentations": []}


def test_malformed_json(tmp_path, capsys):
    assert main(["fragment", _write(tmp_path / "bad.json", "{not json")]) == EXIT_INPUT
    assert "invalid JSON" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["fragment", "/nonexistent/strokes.json"]) == EXIT_INPUT


def test_degenerate_stroke(tmp_path, capsys):
    path = _write(tmp_path / "d.json", {"strokes": [{"id": "dot", "points": [[1, 1], [1, 1]]}]})
    assert main(["fragment", path]) == EXIT_DEGENERATE
    assert "dot" in capsys.readouterr().err
    path = _write(tmp_path / "t.json", {"strokes": [{"id": "tiny", "points": [[0, 0], [1, 0]]}]})
    assert main(["fragment", path, "--config", _write(tmp_path / "c.json", {"step_d": 1.0})]) == EXIT_DEGENERATE
    assert "tiny" in capsys.readouterr().err


def test_debug_csvs(tmp_path, l_file):
    obs, path = tmp_path / "obs.csv", tmp_path / "path.csv"
    assert main(["fragment", l_file, "-o", str(tmp_path / "o.json"), "--debug-observations", str(obs),
                 "--debug-path", str(path)]) == EXIT_OK
    rows = list(csv.DictReader(obs.open()))
    assert list(rows[0]) == ["stroke_id", "index", "raw_index", "f1", "f2", "f3", "f4"]
    prow = list(csv.DictReader(path.open()))
    assert len(prow) == len(rows)
    assert {"state", "label", "margin"} <= set(prow[0])


def _digest(*paths):
    return hashlib.sha256(b"".join(open(p, "rb").read() for p in paths)).hexdigest()


def test_gen_deterministic(tmp_path):
    a = [str(tmp_path / n) for n in ("s1.json", "t1.json")]
    b = [str(tmp_path / n) for n in ("s2.json", "t2.json")]
    c = [str(tmp_path / n) for n in ("s3.json", "t3.json")]
    assert main(["gen", "--strokes", a[0], "--truth", a[1]]) == EXIT_OK
    assert main(["gen", "--strokes", b[0], "--truth", b[1]]) == EXIT_OK
    assert main(["gen", "--strokes", c[0], "--truth", c[1], "--seed", "99"]) == EXIT_OK
    assert len(json.load(open(a[0]))["strokes"]) == 600
    assert _digest(*a) == _digest(*b) != _digest(*c)


def test_gen_invalid_family(tmp_path):
    recipe = _write(tmp_path / "r.json", {"counts": {"heptagon": 3}})
    assert main(["gen", recipe, "--strokes", str(tmp_path / "s"), "--truth", str(tmp_path / "t")]) == EXIT_INPUT


@pytest.fixture
def clean_corpus(tmp_path):
    recipe = _write(tmp_path / "r.json", {"counts": {"L": 4, "square": 2, "circle": 2}, "jitter_sigma": 0.0})
    s, t = str(tmp_path / "s.json"), str(tmp_path / "t.json")
    assert main(["gen", recipe, "--strokes", s, "--truth", t]) == EXIT_OK
    return s, t


def test_eval_clean(clean_corpus, capsys):
    s, t = clean_corpus
    assert main(["eval", s, t, "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["false_positive_rate"] == 0.0 and rep["false_negative_rate"] == 0.0
    assert all("decode_ms" in r for r in rep["strokes"])
    assert main(["eval", s, t]) == EXIT_OK
    table = capsys.readouterr().out
    assert "ALL" in table and "0.00%" in table and "ms" in table


def test_eval_compare(clean_corpus, capsys):
    s, t = clean_corpus
    assert main(["eval", s, t, "--compare"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FP struct" in out and "FP base" in out
    assert main(["eval", s, t, "--compare", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 + 2 * 8


def test_eval_id_mismatch(clean_corpus, tmp_path, capsys):
    s, t = clean_corpus
    truth = json.load(open(t))
    truth["truth"] = truth["truth"][1:]
    assert main(["eval", s, _write(tmp_path / "t2.json", truth)]) == EXIT_INPUT
    assert "ids differ" in capsys.readouterr().err


def test_dump_model(capsys, tmp_path):
    assert main(["dump-model"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert len(d["states"]) == 82 and d["name"] == "structured"
    assert main(["dump-model", "--model", "ergodic"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["states"]) == 24
    cfg = _write(tmp_path / "c.json", {"arc_self": 0.5, "arc_adjacent": 0.25, "arc_exit": 0.25})
    assert main(["dump-model", "--config", cfg]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    p = {(e["from"], e["to"]): e["p"] for e in d["transitions"]}
    assert p[(0, 0)] == pytest.approx(0.5)


def test_config_routing_and_rejection(tmp_path):
    cfg = RunConfig.from_dict({"min_run": 4, "min_obs_per_primitive": 6, "tolerance_steps": 3.0,
                               "line_self": 0.7, "model": "ergodic", "workers": 2})
    assert cfg.frag.min_run == 4 and cfg.frag.resample.min_obs_per_primitive == 6
    assert cfg.eval.tolerance_steps == 3.0 and cfg.eval.frag == cfg.frag
    assert cfg.params.line_self == 0.7 and cfg.model == "ergodic" and cfg.workers == 2
    for bad in ({"bogus": 1}, {"arc_self": -1}, {"colors": {"purple": "#fff"}}):
        with pytest.raises(UsageError):
            RunConfig.from_dict(bad)
    assert main(["dump-model", "--config", _write(tmp_path / "c.json", {"bogus": 1})]) == EXIT_INPUT


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "strokehmm", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("fragment", "gen", "eval", "dump-model"):
        assert cmd in res.stdout
