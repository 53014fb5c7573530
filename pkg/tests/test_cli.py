import json
import subprocess
import sys

import pytest

from robin_shapes.cli import EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, config_from_args, main
from robin_shapes.geometry import save_domain, square_with_slit, unit_square


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.json"
    save_domain(unit_square(), path)
    return path


def test_solve_writes_ascending_csv(square_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["solve", "--geometry", str(square_file), "--beta", "1", "--k", "4", "--h", "0.1",
                 "--out", str(out), "--export", "csv,svg,mesh"])
    assert code == EXIT_OK
    rows = (out / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "k,lambda,residual" and len(rows) == 5
    vals = [float(r.split(",")[1]) for r in rows[1:]]
    assert vals == sorted(vals)
    assert (out / "eigenfunction_1.svg").exists()
    assert "values 1" in (out / "mesh.txt").read_text()


def test_solve_bad_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--geometry", str(bad), "--k", "2"]) == EXIT_INPUT
    assert "malformed" in capsys.readouterr().err


def test_solve_invalid_geometry(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"components": [{"outer": [[0, 0], [1, 1], [1, 0], [0, 1]]}]}))
    assert main(["solve", "--geometry", str(path)]) == EXIT_INPUT


def test_solve_k_above_dofs(square_file, capsys):
    assert main(["solve", "--geometry", str(square_file), "--k", "500", "--h", "0.3"]) == EXIT_SOLVER
    assert "unknowns" in capsys.readouterr().err


def test_negative_beta_is_bad_input(square_file):
    assert main(["solve", "--geometry", str(square_file), "--beta", "-1"]) == EXIT_INPUT


def test_oracle_disk(capsys):
    assert main(["oracle", "disk", "--beta", "1", "--k", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,lambda" and len(lines) == 6


def test_oracle_rectangle(capsys):
    assert main(["oracle", "rectangle", "--width", "2", "--height", "1", "--k", "3"]) == EXIT_OK


def test_verify_filter_and_perturbation(capsys):
    assert main(["verify", "--filter", "scaling"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("\n") == 1 and "PASS" in out
    assert main(["verify", "--filter", "scaling", "--perturb-boundary", "1.01"]) == EXIT_VERIFY
    assert main(["verify", "--filter", "nonsense"]) == EXIT_INPUT


def test_config_file_and_override(tmp_path, square_file):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"geometry": str(square_file), "beta": 2.0, "k": 3, "h": 0.2}))
    config = config_from_args(["solve", "--config", str(cfg), "--k", "2"])
    assert config.beta == 2.0 and config.k == 2 and config.h == 0.2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["solve", "--config", str(cfg)]) == EXIT_INPUT


def test_optimize_outputs_are_reproducible(tmp_path):
    args = ["optimize", "--k", "1", "--perimeter", "6.2832", "--budget", "12", "--seed", "4", "--h", "0.15"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("evaluations.jsonl", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    lines = (tmp_path / "a" / "evaluations.jsonl").read_text().splitlines()
    assert len(lines) == 12
    assert set(json.loads(lines[0])) == {"iter", "params", "prob", "lambdas", "objective", "status"}
    meta = json.loads((tmp_path / "a" / "metadata.json").read_text())
    assert len(meta["wall_ms"]) == 12
    assert (tmp_path / "a" / "best.svg").exists()


def test_optimize_penalty_and_pnorm(tmp_path):
    code = main(["optimize", "--objective", "pnorm:2", "--indices", "1,2", "--penalty", "0.5", "--budget", "6",
                 "--h", "0.3", "--out", str(tmp_path), "--export", "jsonl"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["objective"]["penalty"] == 0.5 and len(summary["best_lambdas"]) == 2


def test_optimize_bad_objective(tmp_path):
    assert main(["optimize", "--objective", "pnorm", "--out", str(tmp_path)]) == EXIT_INPUT
    assert main(["optimize", "--objective", "max", "--out", str(tmp_path)]) == EXIT_INPUT


def test_widen_small(tmp_path, capsys):
    code = main(["widen", "--widths", "0.08,0.04", "--k", "2", "--h", "0.1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = (tmp_path / "widen.csv").read_text().splitlines()
    assert len(rows) == 3


def test_mesh_command(tmp_path):
    path = tmp_path / "slit.json"
    save_domain(square_with_slit(), path)
    assert main(["mesh", "--geometry", str(path), "--h", "0.1", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "mesh.txt").read_text().startswith("nodes ")
    assert (tmp_path / "mesh.svg").exists()


def test_usage_error_exit_code():
    assert main(["solve", "--k", "notanint"]) == EXIT_INPUT


def test_console_script_module_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "robin_shapes.cli", "oracle", "interval", "--k", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("k,lambda")
