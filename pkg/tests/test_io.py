import csv
import io
import json

import numpy as np

from normsol import Field, build_grid
from normsol.continuation import SweepEntry
from normsol.io import (
    atomic_write_text,
    field_from_profile,
    profile_text,
    read_profile,
    sweep_csv_text,
    write_json,
    write_profile,
)

from conftest import BALL3, INTERVAL


def test_atomic_write_leaves_no_temp(tmp_path):
    p = atomic_write_text(tmp_path / "sub" / "f.txt", "hello")
    assert p.read_text() == "hello"
    assert [x.name for x in p.parent.iterdir()] == ["f.txt"]


def test_write_json_sorted(tmp_path):
    p = write_json(tmp_path / "x.json", {"b": 1, "a": [1.5]})
    assert p.read_text() == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'


def test_profile_header_and_rows():
    g = build_grid(INTERVAL, 3)
    text = profile_text(g, [0, 0.1, 0.2, 0.1, 0], {"lambda": 1.5, "note": "x"})
    lines = text.splitlines()
    assert lines[0] == "# kind=interval"
    assert "# lambda=1.5" in lines and "# note=x" in lines
    assert lines[lines.index("coordinate,value") + 1] == "0,0"
    assert lines[-1] == "1,0"


def test_profile_lossless(tmp_path):
    g = build_grid(BALL3, 300)
    rng = np.random.default_rng(0)
    vals = rng.random(g.size) * 1e-3
    vals[-1] = 0.0
    write_profile(tmp_path / "p.csv", g, vals)
    meta, coords, back = read_profile(tmp_path / "p.csv")
    assert np.array_equal(back, vals)
    assert np.array_equal(coords, g.nodes)
    f = field_from_profile(tmp_path / "p.csv")
    assert isinstance(f, Field) and np.array_equal(f.values, vals)
    assert meta["n"] == "300" and meta["ball_dimension"] == "3"


def test_interval_profile_rebuilds_grid(tmp_path):
    g = build_grid(INTERVAL, 10)
    vals = np.linspace(0, 1, g.size) * (1 - np.linspace(0, 1, g.size))
    write_profile(tmp_path / "p.csv", g, vals)
    f = field_from_profile(tmp_path / "p.csv")
    assert f.grid.kind == "interval" and np.array_equal(f.grid.nodes, g.nodes)


def test_sweep_csv_quotes_errors():
    text = sweep_csv_text([SweepEntry(10.0, None, "Boom: a, b")])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1] == ["10", "nan", "nan", "nan", "false", "Boom: a, b"]


def test_json_has_no_timestamps(tmp_path):
    from normsol.cli import main

    assert main(["solve", "--out", str(tmp_path)]) == 0
    blob = (tmp_path / "result.json").read_text()
    assert "time" not in blob.lower()
    assert json.loads(blob)["params"]["rho"] == 0.01
