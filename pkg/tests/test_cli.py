import json
import math
from pathlib import Path

import numpy as np
import pytest

import pulsesim as ps
from pulsesim.cli import main
from pulsesim.sequence_io import read_result_csv

EXAMPLES = Path(__file__).resolve().parent.parent / "docs" / "examples"


def rabi_doc(**overrides):
    d = {
        "dim": 2,
        "operators": {"proj1": "0.5 * id - 0.5 * sz"},
        "recipes": {"drive": {"operator": "0.5 * sx", "envelope": {"kind": "constant"}}},
        "pulses": [{"recipe": "drive", "params": {"amp": 2 * math.pi}, "start": 0.0, "duration": 1.0}],
        "initial_state": {"ket": [[1, 0], [0, 0]]},
        "times": {"start": 0.0, "stop": 1.0, "num": 11},
        "e_ops": ["proj1"],
        "ode": {"rtol": 1e-10, "atol": 1e-12},
    }
    d.update(overrides)
    return d


def write_doc(tmp_path, d, name="seq.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


def test_run_rabi_example_file(tmp_path, capsys):
    out = str(tmp_path / "rabi.csv")
    code = main(["run", "-i", str(EXAMPLES / "rabi.json"), "-o", out])
    assert code == 0
    assert "engine=segmented" in capsys.readouterr().out
    _, header, data = read_result_csv(out)
    assert header == ["time_s", "e0"]
    # population of |1> under H = (Omega/2) sx: sin^2(Omega t / 2)
    omega = 2 * math.pi
    exact = np.sin(omega * data[:, 0] / 2) ** 2
    assert np.max(np.abs(data[:, 1] - exact)) <= 1e-6


def test_run_engines_agree(tmp_path):
    doc = rabi_doc()
    src = write_doc(tmp_path, doc)
    out_a = str(tmp_path / "a.csv")
    out_b = str(tmp_path / "b.csv")
    assert main(["run", "-i", src, "-o", out_a, "--engine", "segmented"]) == 0
    assert main(["run", "-i", src, "-o", out_b, "--engine", "naive"]) == 0
    _, _, a = read_result_csv(out_a)
    meta_b, _, b = read_result_csv(out_b)
    assert meta_b["engine"] == "naive"
    assert np.max(np.abs(a - b)) <= 1e-6


def test_run_unreadable_input_exits_2(tmp_path, capsys):
    out = tmp_path / "never.csv"
    code = main(["run", "-i", str(tmp_path / "missing.json"), "-o", str(out)])
    assert code == 2
    assert not out.exists()
    assert "I/O error" in capsys.readouterr().err


def test_run_invalid_file_exits_3(tmp_path, capsys):
    doc = rabi_doc()
    doc["pulses"][0]["duration"] = -1
    code = main(["run", "-i", write_doc(tmp_path, doc), "-o", str(tmp_path / "o.csv")])
    assert code == 3
    assert "duration" in capsys.readouterr().err


def test_run_numerical_failure_exits_4(tmp_path, capsys):
    doc = rabi_doc(ode={"rtol": 1e-10, "atol": 1e-12, "max_steps": 3})
    code = main(["run", "-i", write_doc(tmp_path, doc), "-o", str(tmp_path / "o.csv")])
    assert code == 4
    assert "BudgetError" in capsys.readouterr().err


def test_run_tolerance_overrides(tmp_path, capsys):
    src = write_doc(tmp_path, rabi_doc())
    out = str(tmp_path / "o.csv")
    assert main(["run", "-i", src, "-o", out, "--rtol", "1e-6", "--atol", "1e-9"]) == 0


def test_plan_three_spaced_pulses(capsys):
    code = main(["plan", "-i", str(EXAMPLES / "three_spaced_pulses.json")])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "3 pulses / 5 segments"
    assert len(out.splitlines()) == 6


def test_plan_single_spanning_pulse(tmp_path, capsys):
    doc = rabi_doc()
    src = write_doc(tmp_path, doc)
    assert main(["plan", "-i", src]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "1 pulses / 1 segments"


def test_plan_overlapping_pair(tmp_path, capsys):
    doc = rabi_doc(times=[0.0, 3.0])
    doc["pulses"] = [
        {"recipe": "drive", "params": {"amp": 1.0}, "start": 0.0, "duration": 2.0},
        {"recipe": "drive", "params": {"amp": 1.0}, "start": 1.0, "duration": 2.0},
    ]
    assert main(["plan", "-i", write_doc(tmp_path, doc)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "2 pulses / 3 segments"
    assert "p0[drive],p1[drive]" in lines[2]


def test_bench_and_fit_roundtrip(tmp_path, capsys):
    raw = str(tmp_path / "bench.csv")
    code = main([
        "bench", "--n", "1,2", "--tau", "0.5,1.0", "--repeats", "3",
        "--rtol", "1e-6", "--atol", "1e-9", "-o", raw,
    ])
    assert code == 0
    slopes_path = tmp_path / "bench.slopes.csv"
    assert slopes_path.exists()
    capsys.readouterr()

    out2 = str(tmp_path / "refit.csv")
    assert main(["fit", "-i", raw, "-o", out2]) == 0
    assert Path(out2).read_text() == slopes_path.read_text()


def test_fit_missing_columns_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["fit", "-i", str(bad)]) == 3


def test_version_smoke(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "pulsesim 0.1.0" in capsys.readouterr().out
