import csv
import io
import json
import subprocess
import sys

import pytest

from dualaoi.cli import SWEEP_COLUMNS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("DUALAOI_SEED", raising=False)


def _table(out):
    return {k: float(v) for k, v in (line.split() for line in out.splitlines())}


def test_analytic_mm(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--system", "mm", "--mu-a", "1", "--mu-b", "1")
    assert code == 0
    t = _table(out)
    assert t["avg_aoi"] == 1.25
    assert t["avg_paoi"] == pytest.approx(1.3333, abs=1e-4)


def test_analytic_md(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--system", "md", "--mu", "1", "--period", "1")
    assert code == 0
    t = _table(out)
    assert t["avg_aoi"] == pytest.approx(1.2052, abs=1e-4)
    assert t["avg_paoi"] == pytest.approx(1.4459, abs=1e-4)


def test_analytic_metric_selection_and_json(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--system", "single", "--mu", "2", "--avg-aoi", "--json")
    assert code == 0
    assert json.loads(out) == {"avg_aoi": 1.0}


def test_analytic_preemptive(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--system", "mm11", "--lam", "4", "--mu", "1", "--avg-aoi")
    assert code == 0 and _table(out) == {"avg_aoi": 1.25}


@pytest.mark.parametrize(
    "argv",
    [
        ("--system", "dd", "--period-a", "1", "--period-b", "1"),
        ("--system", "mm2", "--lam", "1.12", "--mu", "1"),
    ],
)
def test_analytic_without_closed_form(capsys, argv):
    code, _, err = run_cli(capsys, "analytic", *argv)
    assert code != 0
    assert "no closed form" in err and "use simulate" in err


def test_analytic_missing_parameter(capsys):
    code, _, err = run_cli(capsys, "analytic", "--system", "mm", "--mu-a", "1")
    assert code != 0 and "--mu-b" in err


def test_simulate_json(capsys):
    argv = ("simulate", "--system", "mm", "--mu-a", "1", "--mu-b", "1", "--seed", "12", "--accepted", "20000")
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"] == {
        "system": "mm", "mu_a": 1.0, "mu_b": 1.0, "seed": 12,
        "accepted": 20000, "warmup": 1000, "batch_count": 32,
    }
    for key in ("avg_aoi", "avg_paoi", "effective_arrival_rate", "obsolete_ratio", "n_accepted",
                "n_obsolete", "sim_time", "half_width_aoi", "half_width_paoi"):
        assert key in doc["stats"]
    assert doc["stats"]["n_accepted"] == 20000
    assert doc["reference"]["avg_aoi"] == 1.25
    assert doc["relative_error"]["avg_aoi"] < 0.02
    # same seed, same bytes
    assert run_cli(capsys, *argv)[1] == out


def test_simulate_defaults_echoed(capsys, monkeypatch):
    monkeypatch.setenv("DUALAOI_SEED", "3")
    code, out, _ = run_cli(capsys, "simulate", "--system", "mm11", "--lam", "4", "--mu", "1", "--accepted", "2000")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["seed"] == 3 and doc["config"]["warmup"] == 1000 and doc["config"]["batch_count"] == 32


def test_simulate_without_closed_form_has_no_reference(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--system", "dd", "--period-a", "1", "--period-b", "1",
                           "--seed", "1", "--accepted", "1000")
    doc = json.loads(out)
    assert code == 0
    assert "reference" not in doc
    assert doc["config"]["dd_offset"] == "randomized"
    assert 0 <= doc["config"]["dd_offset_used"] < 1


def test_simulate_requires_seed(capsys):
    code, _, err = run_cli(capsys, "simulate", "--system", "mm", "--mu-a", "1", "--mu-b", "1")
    assert code != 0 and "seed" in err


@pytest.mark.parametrize(
    "argv, field",
    [
        (("--system", "mm", "--mu-a", "-1", "--mu-b", "1"), "rate"),
        (("--system", "md", "--mu", "1", "--period", "0"), "period"),
        (("--system", "dd", "--period-a", "1", "--period-b", "1", "--offset", "2"), "dd_offset"),
        (("--system", "mm2", "--lam", "0", "--mu", "1"), "arrival_rate"),
        (("--system", "mm", "--mu-a", "1", "--mu-b", "1", "--batches", "0"), "batch_count"),
        (("--system", "mm", "--mu-a", "1", "--mu-b", "1", "--warmup", "-2"), "warmup"),
        (("--system", "mm", "--mu-a", "1", "--mu-b", "1", "--seed", "-2"), "seed"),
    ],
)
def test_simulate_invalid_names_field(capsys, argv, field):
    if "--seed" not in argv:
        argv = argv + ("--seed", "1")
    code, _, err = run_cli(capsys, "simulate", *argv)
    assert code != 0
    assert field in err


def test_simulate_trace_file(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    code, _, _ = run_cli(capsys, "simulate", "--system", "md", "--mu", "1", "--period", "1", "--seed", "2",
                         "--accepted", "500", "--warmup", "10", "--batches", "4", "--trace", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 500
    assert list(rows[0]) == ["t", "gen_time", "sensor", "prev_state", "new_state", "path_l", "Y", "T_service"]


def test_simulate_unwritable_output_reports_path(capsys, tmp_path):
    bad = tmp_path / "missing" / "out.json"
    code, _, err = run_cli(capsys, "simulate", "--system", "mm", "--mu-a", "1", "--mu-b", "1", "--seed", "1",
                           "--accepted", "100", "--warmup", "1", "--batches", "2", "--output", str(bad))
    assert code != 0 and str(bad) in err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scenario\nsystem = md\nmu = 1\nperiod = 1\nseed = 5\naccepted = 2000\n")
    code, out, _ = run_cli(capsys, "--config", str(cfg), "simulate")
    doc = json.loads(out)
    assert code == 0 and doc["config"]["system"] == "md" and doc["config"]["seed"] == 5
    code, out, _ = run_cli(capsys, "--config", str(cfg), "simulate", "--seed", "6", "--accepted", "1000")
    doc = json.loads(out)
    assert doc["config"]["seed"] == 6 and doc["config"]["accepted"] == 1000


def test_config_file_bad_value(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("accepted = lots\n")
    code, _, err = run_cli(capsys, "--config", str(cfg), "simulate", "--system", "mm")
    assert code != 0 and "accepted" in err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_sweep_analytic_csv(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--systems", "mm,md", "--variable", "rate_ratio",
                           "--start", "0.2", "--stop", "1", "--steps", "5", "--metrics", "avg_aoi,obsolete_ratio")
    assert code == 0
    rows = _rows(out)
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 1 + 2 * 5 * 2
    last = {(r[0], r[2]): r for r in rows[1:] if r[1] == "1"}
    assert float(last[("mm", "avg_aoi")][3]) == 1.25
    assert float(last[("md", "obsolete_ratio")][3]) == pytest.approx(0.2484, abs=1e-4)
    assert all(r[4] == "" and r[6] == "" for r in rows[1:])


def test_sweep_invalid_ranges(capsys):
    base = ("sweep", "--systems", "mm")
    assert run_cli(capsys, *base, "--start", "2", "--stop", "1", "--steps", "3")[0] != 0
    assert run_cli(capsys, *base, "--start", "1", "--stop", "2", "--steps", "1")[0] != 0
    assert run_cli(capsys, *base, "--start", "1", "--stop", "2", "--steps", "3", "--metrics", "x")[0] != 0
    code, _, err = run_cli(capsys, *base, "--start", "1", "--stop", "2", "--steps", "3", "--mode", "simulate")
    assert code != 0 and "seed" in err


def test_sweep_both_mode_invariant(capsys, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run_cli(capsys, "sweep", "--systems", "mm,md", "--variable", "service_rate", "--start", "2",
                         "--stop", "5", "--steps", "4", "--mode", "both", "--seed", "314", "--output", str(out_path))
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 2 * 4 * 4
    for r in rows:
        analytic, simulated = float(r["analytic"]), float(r["simulated"])
        half = float(r["ci_half_width"]) if r["ci_half_width"] else 0.0
        assert abs(simulated - analytic) <= max(3 * half, 0.02 * analytic), r
    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert meta["accepted"] == 100000 and meta["warmup"] == 1000 and meta["batch_count"] == 32


def test_sweep_workers_preserve_order(capsys):
    argv = ("sweep", "--systems", "mm,mm2,dd", "--variable", "rate_ratio", "--start", "0.5", "--stop", "1",
            "--steps", "3", "--mode", "simulate", "--seed", "2", "--accepted", "2000", "--replications", "2")
    code1, serial, _ = run_cli(capsys, *argv)
    code2, parallel, _ = run_cli(capsys, *argv, "--workers", "3")
    assert code1 == code2 == 0
    assert serial == parallel
    rows = _rows(serial)[1:]
    assert all(r[3] == "" and r[4] != "" and r[6] == "2" for r in rows)


def test_validate_fast(capsys):
    code, out, _ = run_cli(capsys, "validate", "--fast")
    assert code == 0
    assert out.count("[PASS]") == 6 and "[FAIL]" not in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dualaoi", "analytic", "--system", "mm", "--mu-a", "1", "--mu-b", "2", "--avg-aoi"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout == "avg_aoi 0.814814814815\n"
