import csv
import io
import json
import subprocess
import sys

import pytest

from twfront.cli import main, worker_count
from twfront.exceptions import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 1 and "usage" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "check", "--bogus")
    assert code == 1 and "--bogus" in err


def test_missing_config_names_flag(capsys):
    code, _, err = run(capsys, "check")
    assert code == 1 and "--config" in err


def test_check_reference(capsys, configs_dir):
    code, out, _ = run(capsys, "check", "--config", str(configs_dir / "reference.yaml"))
    body = json.loads(out)
    assert code == 0
    assert body["report"]["verdict"] == "Exists"
    assert body["manifest"]["subcommand"] == "check"
    assert body["manifest"]["config"]["p"] == 2.0


def test_check_nonexistence(capsys, configs_dir):
    code, out, _ = run(capsys, "check", "--config", str(configs_dir / "nonexistence.yaml"))
    assert code == 2 and json.loads(out)["report"]["verdict"] == "NoSolution"


def test_check_inconclusive(capsys, tmp_path):
    cfg = tmp_path / "inc.yaml"
    cfg.write_text("p: 2\ntheta: 0.5\nreaction: {g0: 2}\nconvection: {coeffs: [0.5, -0.5]}\n")
    code, _, _ = run(capsys, "check", "--config", str(cfg))
    assert code == 3


def test_bad_config_names_key(capsys, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("p: 2\ntheta: 0.5\nreaction: {g0: fast}\n")
    code, _, err = run(capsys, "check", "--config", str(cfg))
    assert code == 1 and "reaction.g0" in err


def test_divergent_integral_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "div.yaml"
    cfg.write_text("p: 2\ntheta: 0.5\ndiffusion: {beta: -3}\n")
    code, _, _ = run(capsys, "check", "--config", str(cfg))
    assert code == 1


def test_solve_reference_with_y_table(capsys, configs_dir, tmp_path):
    ytab = tmp_path / "y.csv"
    out_json = tmp_path / "solve.json"
    code, _, _ = run(
        capsys, "solve", "--config", str(configs_dir / "reference.yaml"), "--emit-y", str(ytab),
        "--out", str(out_json), "--quiet",
    )
    assert code == 0
    body = json.loads(out_json.read_text())
    assert body["solution"]["status"] == "Found"
    assert body["solution"]["c_star"] == pytest.approx(0.3643707233611424, abs=1e-9)
    rows = list(csv.reader(io.StringIO(ytab.read_text())))
    assert rows[0] == ["u", "y", "y_pow_1_over_pconj"]
    side = json.loads((tmp_path / "y.csv.manifest.json").read_text())
    assert side["subcommand"] == "solve" and side["duration_s"] >= 0


def test_solve_nonexistence(capsys, configs_dir):
    code, out, _ = run(capsys, "solve", "--config", str(configs_dir / "nonexistence.yaml"))
    assert code == 2 and json.loads(out)["solution"]["status"] == "NoSolution"


def test_profile_csv(capsys, configs_dir, tmp_path):
    target = tmp_path / "prof.csv"
    code, out, _ = run(
        capsys, "profile", "--config", str(configs_dir / "degenerate.yaml"), "--xi-min", "-5", "--xi-max", "5",
        "--out", str(target),
    )
    assert code == 0
    lines = target.read_text().splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["xi1"] == "-inf" and isinstance(meta["xi2"], float)
    assert lines[1] == "xi,u,du_dxi,flux"
    assert (tmp_path / "prof.csv.manifest.json").exists()
    assert json.loads(out)["rows"] == len(lines) - 2


def test_profile_bad_grid(capsys, configs_dir):
    code, _, _ = run(capsys, "profile", "--config", str(configs_dir / "reference.yaml"), "--xi-step", "0")
    assert code == 1


def test_classify(capsys, configs_dir, tmp_path):
    code, out, _ = run(capsys, "classify", "--config", str(configs_dir / "degenerate.yaml"))
    body = json.loads(out)
    assert code == 0
    assert body["classification"]["at_zero"] == "FiniteEdge"
    assert body["region"] == "M12"
    cfg = tmp_path / "scope.yaml"
    cfg.write_text("p: 2\ntheta: 0.5\ndiffusion: {beta: -3}\n")
    code, _, _ = run(capsys, "classify", "--config", str(cfg))
    assert code == 3


def test_simulate(capsys, configs_dir, tmp_path):
    target = tmp_path / "sim.csv"
    code, _, _ = run(
        capsys, "simulate", "--config", str(configs_dir / "reference.yaml"), "--cells", "400", "--L", "20",
        "--t-end", "20", "--out", str(target), "--quiet",
    )
    assert code == 0
    lines = target.read_text().splitlines()
    assert lines[0] == "t,x_front"
    assert lines[-1].startswith("# fitted_speed=")
    assert (tmp_path / "sim.csv.manifest.json").exists()


def test_simulate_refuses_nonexistence(capsys, configs_dir):
    code, _, _ = run(capsys, "simulate", "--config", str(configs_dir / "nonexistence.yaml"), "--cells", "200")
    assert code == 2


def test_simulate_bad_cells(capsys, configs_dir):
    code, _, _ = run(capsys, "simulate", "--config", str(configs_dir / "reference.yaml"), "--cells", "5")
    assert code == 1


def _sweep(capsys, configs_dir, target, *extra):
    return run(capsys, "sweep", "--config", str(configs_dir / "reference.yaml"), "--out", str(target), *extra)


def test_sweep_g0_scaling(capsys, configs_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "1")
    target = tmp_path / "g0.csv"
    code, _, _ = _sweep(capsys, configs_dir, target, "--axis", "g0", "--values", "1,4,16")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    c = [float(r["c_star"]) for r in rows]
    assert c[1] / c[0] == pytest.approx(2.0, rel=1e-6)
    assert c[2] / c[0] == pytest.approx(4.0, rel=1e-6)
    assert {r["region_at_one"] for r in rows} == {"M12"}
    assert {r["xi2_finite"] for r in rows} == {"false"}


def test_sweep_is_deterministic_across_workers(capsys, configs_dir, tmp_path, monkeypatch):
    args = ("--axis", "p", "--range", "1.8", "2.6", "--steps", "3")
    monkeypatch.setenv("TWFRONT_THREADS", "1")
    _sweep(capsys, configs_dir, tmp_path / "a.csv", *args)
    monkeypatch.setenv("TWFRONT_THREADS", "3")
    _sweep(capsys, configs_dir, tmp_path / "b.csv", *args)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_records_errors_in_row(capsys, configs_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "1")
    target = tmp_path / "bad.csv"
    code, _, _ = _sweep(capsys, configs_dir, target, "--axis", "p", "--values", "0.5,2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert rows[0]["status"] == "Error" and "p" in rows[0]["error"]
    assert rows[1]["status"] == "Found"


def test_sweep_needs_values(capsys, configs_dir, tmp_path):
    code, _, _ = _sweep(capsys, configs_dir, tmp_path / "x.csv", "--axis", "p")
    assert code == 1


def test_worker_count(monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("TWFRONT_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.setenv("TWFRONT_THREADS", "0")
    with pytest.raises(ConfigError):
        worker_count()


def test_bad_thread_count_exits_usage(capsys, configs_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "-2")
    code, _, err = _sweep(capsys, configs_dir, tmp_path / "x.csv", "--axis", "g0", "--values", "1,2")
    assert code == 1 and "TWFRONT_THREADS" in err


def test_verify_quick(capsys, tmp_path):
    target = tmp_path / "verify.json"
    code, out, _ = run(capsys, "verify", "--quick", "--out", str(target))
    assert code == 0
    assert len(out.strip().splitlines()) == 4
    assert all(r["ok"] for r in json.loads(target.read_text())["reports"])


def test_module_entry_point(configs_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "twfront", "check", "--config", str(configs_dir / "reference.yaml"), "--quiet"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == ""


def test_sweep_p_axis_is_finite(capsys, configs_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "2")
    target = tmp_path / "p.csv"
    code, _, _ = _sweep(capsys, configs_dir, target, "--axis", "p", "--range", "1.2", "4", "--steps", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert len(rows) == 5
    assert all(r["status"] == "Found" and float(r["c_star"]) > 0 for r in rows)


def test_sweep_convection_scale(capsys, configs_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("TWFRONT_THREADS", "1")
    target = tmp_path / "k.csv"
    code, _, _ = run(
        capsys, "sweep", "--config", str(configs_dir / "shifted.yaml"), "--axis", "convection-scale",
        "--values", "0,0.05,0.2", "--out", str(target),
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    c = [float(r["c_star"]) for r in rows]
    assert c[1] == pytest.approx(c[0] - 0.05, abs=1e-8)
    assert c[2] == pytest.approx(c[0] - 0.2, abs=1e-8)
