from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from freeconv.cli import main


def _spec(tmp_path, name, atoms, domain="real", **extra):
    path = tmp_path / name
    doc = {"domain": domain, "atoms": [{"pos": p, "mass": m} for p, m in atoms], **extra}
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def bern(tmp_path):
    return _spec(tmp_path, "b.json", [(0, 0.5), (2, 0.5)])


@pytest.fixture
def sym_spec(tmp_path):
    return _spec(tmp_path, "sym.json", [(-1, 0.5), (1, 0.5)])


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_arcsine_table(tmp_path, bern):
    out = tmp_path / "out.csv"
    assert main(["add-free", bern, bern, "--grid", "0", "4", "2001", "-o", str(out)]) == 0
    header, data = _read_csv(out)
    assert header == ["x", "density"]
    x, d = data[:, 0], data[:, 1]
    inner = (x > 0.05) & (x < 3.95)
    assert np.max(np.abs(d[inner] - 1 / (np.pi * np.sqrt(x[inner] * (4 - x[inner]))))) < 1e-6
    report = json.loads(out.with_suffix(".json").read_text())
    assert report["schema"] == 1 and report["atoms"] == []
    assert 0.999 <= report["mass_account"]["continuous"] <= 1.001
    assert report["residual_diagnostics"]["max_residual"] < 1e-8
    assert not report["residual_diagnostics"]["flagged"]


def test_power_add_atoms(tmp_path, sym_spec, capsys):
    assert main(["power-add", sym_spec, "--t", "1.3333", "--grid", "-3", "3", "301", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    pos = sorted(a["pos"] for a in doc["atoms"])
    assert np.allclose(pos, [-1.3333, 1.3333], atol=1e-8)
    assert all(abs(a["mass"] - (1.3333 * 0.5 - 0.3333)) < 1e-6 for a in doc["atoms"])
    assert len(doc["grid"]["x"]) == 301


def test_domain_mismatch(tmp_path, bern, capsys):
    circ = _spec(tmp_path, "c.json", [(0.5, 1.0)], domain="circle")
    assert main(["add-free", bern, circ]) == 2
    assert "DomainMismatch" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["add-free", "B"], ["power-add", "B"], ["add-free", "B", "B", "--t", "2"],
                                  ["power-add", "B", "B", "--t", "2"]])
def test_job_validation(bern, argv, capsys):
    argv = [bern if a == "B" else a for a in argv]
    assert main(argv) == 2
    assert "ValidationError" in capsys.readouterr().err


def test_bad_grid(bern):
    assert main(["add-free", bern, bern, "--grid", "1", "0", "10"]) == 2
    assert main(["add-free", bern, bern, "--circle", "64"]) == 2


def test_power_mult_on_line(bern):
    assert main(["power-mult", bern, "--t", "2"]) == 2


def test_circle_job(tmp_path, capsys):
    a = _spec(tmp_path, "a.json", [(0.0, 0.5), (np.pi, 0.5)], domain="circle")
    assert main(["mult-free", a, a, "--circle", "64", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert np.allclose(doc["grid"]["density"], 1 / (2 * np.pi))
    assert doc["domain"] == "circle" and "theta" in doc["grid"]


def test_other_operations(tmp_path, sym_spec, capsys):
    h = _spec(tmp_path, "h.json", [(0.5, 0.6), (3, 0.4)], domain="halfline")
    for argv in (["add-boolean", sym_spec, sym_spec], ["add-monotone", sym_spec, sym_spec],
                 ["mult-monotone", h, h], ["mult-free", h, h], ["psi-map", sym_spec, "--t", "2"],
                 ["power-mult", h, "--t", "1.5"]):
        assert main(argv + ["--format", "json"]) == 0, argv
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["mass_account"]["deficit"]) < 1e-3, argv


def test_bool_power_atoms(tmp_path, sym_spec, capsys):
    assert main(["add-boolean", sym_spec, sym_spec, "--grid", "-3", "3", "601", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert np.allclose(sorted(a["pos"] for a in doc["atoms"]), [-np.sqrt(2), np.sqrt(2)], atol=1e-8)


def test_deterministic_output(tmp_path, bern):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.csv"
        assert main(["add-free", bern, bern, "--grid", "0", "4", "201", "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_console_entry(bern):
    proc = subprocess.run([sys.executable, "-m", "freeconv", "add-free", bern, bern, "--grid", "0", "4", "11"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "x,density" and len(lines) == 12
