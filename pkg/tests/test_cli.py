import json
import subprocess
import sys

import numpy as np
import pytest

from greedypursuit import atoms as A
from greedypursuit import geometry, harness, objectives
from greedypursuit.cli import main
from greedypursuit.solvers import SolverSpec, Trace, run


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def corollary_config(tmp_path):
    write(tmp_path / "atoms.json", {"generator": "l1-vertices", "d": 10})
    write(tmp_path / "objective.json", {"kind": "least-squares", "y": [1.0] * 10})
    cfg = {
        "atoms": "atoms.json",
        "objective": "objective.json",
        "solver": {"algorithm": "mp", "T": 10},
        "x0": [0.0] * 10,
    }
    return write(tmp_path / "run.json", cfg)


def test_solve_writes_trace_and_csv(corollary_config, tmp_path):
    out = tmp_path / "out" / "trace.json"
    assert main(["solve", str(corollary_config), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    tr = Trace.from_dict(doc)
    assert tr.subopt[-1] <= 1e-12
    assert len(tr.records) == 11
    assert out.with_suffix(".csv").read_text().startswith("t,f,subopt")
    # the CLI is a thin shell over the library
    lib = run(SolverSpec("mp", T=10), objectives.LeastSquares(np.ones(10)), A.l1_vertices(10), np.zeros(10))
    np.testing.assert_array_equal(tr.iterates, lib.iterates)
    np.testing.assert_array_equal(tr.subopt, lib.subopt)


def test_solve_zero_steps(tmp_path, capsys):
    cfg = {
        "atoms": {"generator": "l1-vertices", "d": 3},
        "objective": {"kind": "least-squares", "y": [1, 2, 3]},
        "solver": {"algorithm": "fw", "variant": 1, "T": 0},
    }
    assert main(["solve", str(write(tmp_path / "c.json", cfg))]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["records"]) == 1


def test_solve_input_errors(tmp_path):
    cfg = {"atoms": "missing.json", "objective": {"kind": "least-squares", "y": [1]}, "solver": {"algorithm": "mp"}}
    assert main(["solve", str(write(tmp_path / "c.json", cfg))]) == 2
    assert main(["solve", str(tmp_path / "nope.json")]) == 2
    bad = {"atoms": {"generator": "l1-vertices", "d": 2}, "objective": {"kind": "x"}, "solver": {"algorithm": "mp"}}
    assert main(["solve", str(write(tmp_path / "b.json", bad))]) == 2
    (tmp_path / "broken.json").write_text("{")
    assert main(["solve", str(tmp_path / "broken.json")]) == 2


def test_solve_solver_error_exits_one(tmp_path):
    cfg = {
        "atoms": {"dimension": 2, "atoms": [[0.0, 0.0]]},
        "objective": {"kind": "least-squares", "y": [1.0, 0.0]},
        "solver": {"algorithm": "mp", "T": 1},
        "x0": [0.0, 0.0],
    }
    assert main(["solve", str(write(tmp_path / "c.json", cfg))]) == 1


@pytest.mark.parametrize("doc,expected", [
    ({"generator": "l1-vertices", "d": 4}, 0.5),
    ({"generator": "theta-pair", "theta": np.pi / 2}, 1 / np.sqrt(2)),
])
def test_geometry_command(tmp_path, doc, expected):
    out = tmp_path / "g.json"
    assert main(["geometry", str(write(tmp_path / "a.json", doc)), "--out", str(out), "--seed", "0"]) == 0
    rep = json.loads(out.read_text())
    assert abs(rep["mdw"]["value"] - expected) <= 1e-9
    lib = geometry.analyze(A.from_dict(doc)).to_dict()
    assert rep["mdw"]["value"] == lib["mdw"]["value"]
    assert rep["coherence_profile"] == pytest.approx(lib["coherence_profile"])


def test_geometry_unsupported_inradius(tmp_path, capsys):
    path = write(tmp_path / "a.json", {"generator": "simplex-vertices", "d": 3})
    assert main(["geometry", str(path), "--inradius"]) == 2
    assert "unsupported" in capsys.readouterr().err


def test_geometry_with_objective(tmp_path):
    a = write(tmp_path / "a.json", {"generator": "l1-vertices", "d": 3})
    o = write(tmp_path / "o.json", {"kind": "least-squares", "y": [1, 0, 0]})
    out = tmp_path / "g.json"
    assert main(["geometry", str(a), "--objective", str(o), "--rho", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["Cf"]["value"] == pytest.approx(4.0)
    assert rep["CfMP"]["value"] == pytest.approx(4.0)


def test_experiment_corollary2(tmp_path, capsys):
    assert main(["experiment", "corollary2", "--d", "10", "--out", str(tmp_path / "exp")]) == 0
    rep = json.loads((tmp_path / "exp" / "report.json").read_text())
    lib = harness.run_corollary2(10)
    assert rep["aggregates"]["eps"] == lib.aggregates["eps"]
    assert (tmp_path / "exp" / "mp.csv").exists()
    assert "PASS" in capsys.readouterr().err


def test_experiment_global_flags_before_subcommand(capsys):
    assert main(["--seed", "3", "experiment", "corollary2", "--d", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["params"]["seed"] == 3


def test_experiment_errors():
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "unknown"])
    assert exc.value.code == 2
    assert main(["experiment", "corollary2", "--set", "bogus=1"]) == 2
    assert main(["experiment", "corollary2", "--set", "noequals"]) == 2


def test_experiment_fw_to_mp_with_params(capsys):
    assert main(["experiment", "fw-to-mp", "--set", "alpha_grid=[256, 512, 1024, 2048]"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["params"]["alphas"] == [256, 512, 1024, 2048]


def test_verify_fw_trace(tmp_path, capsys):
    cfg = {
        "atoms": {"generator": "l1-vertices", "d": 20},
        "objective": {"kind": "least-squares", "y": list(np.linspace(-2, 2, 20))},
        "solver": {"algorithm": "fw", "variant": 0, "T": 100},
    }
    trace = tmp_path / "t.json"
    assert main(["solve", str(write(tmp_path / "c.json", cfg)), "--out", str(trace)]) == 0
    assert main(["verify", str(trace), "--kind", "thm1", "--delta", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["aggregates"]["violations"] == 0
    # an impossible envelope fails with exit 1
    assert main(["verify", str(trace), "--kind", "thm1", "--param", "L=1e-9", "--param", "eps0=1e-9"]) == 1
    assert main(["verify", str(trace), "--kind", "nonsense"]) == 2


def test_verify_linear_rate_on_mp_trace(tmp_path):
    cfg = {
        "atoms": {"generator": "l1-vertices", "d": 6},
        "objective": {"kind": "least-squares", "y": [1.0] * 6},
        "solver": {"algorithm": "mp", "T": 6},
        "x0": [0.0] * 6,
    }
    trace = tmp_path / "t.json"
    assert main(["solve", str(write(tmp_path / "c.json", cfg)), "--out", str(trace)]) == 0
    assert main(["verify", str(trace), "--kind", "thm3", "--eps-floor", "1e-14"]) == 0
    assert main(["verify", str(trace), "--kind", "thm4", "--eps-floor", "1e-14"]) == 0


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "greedypursuit", "experiment", "corollary2", "--d", "4"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["verdicts"]["terminates"]
