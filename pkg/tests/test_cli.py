import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from lossy_su11 import analytic, fock
from lossy_su11.cli import EXIT_CONFIG, EXIT_FIT, EXIT_OK, EXIT_PROPERTY, main
from lossy_su11.model import InterferometerConfig, Observable

DOCS = Path(__file__).resolve().parents[1] / "docs" / "examples"


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def _run_json(argv, tmp_path):
    out = tmp_path / "out.json"
    code = main(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


@pytest.mark.parametrize("verb", ["probe", "compare", "calibrate"])
def test_documented_examples_run(verb, tmp_path):
    code, report = _run_json([verb, "--config", str(DOCS / f"{verb}.yaml")], tmp_path)
    assert code == EXIT_OK and report


def test_probe_lossless_balanced_unit_visibility(tmp_path):
    cfg = _write(tmp_path, "c.yaml", {"interferometer": {"g1": 0.05, "g2": 0.05}})
    code, report = _run_json(["probe", "--config", cfg, "--engines", "analytic"], tmp_path)
    assert code == EXIT_OK
    assert report["engines"]["analytic"]["visibilities"]["V_CC"] == pytest.approx(1.0, abs=1e-15)


def test_probe_matches_analytic_engine(tmp_path):
    params = {"g1": 0.05, "g2": 0.04, "T_A": 0.2, "T_B": 0.22, "phi": 1.0}
    cfg = _write(tmp_path, "c.yaml", {"interferometer": params})
    code, report = _run_json(["probe", "--config", cfg], tmp_path)
    assert code == EXIT_OK
    p = analytic.click_probabilities(InterferometerConfig(**params))
    assert report["engines"]["analytic"]["click_probabilities"]["p_A"] == p.p_A
    assert set(report["deltas"]) == {"bogoliubov-analytic", "fock-analytic"}


def test_probe_reports_regime_breakdown(tmp_path):
    cfg = _write(tmp_path, "c.yaml", {"interferometer": {"g1": 0.5, "g2": 0.5}})
    code, report = _run_json(["probe", "--config", cfg, "--engines", "analytic,fock"], tmp_path)
    assert code == EXIT_OK
    assert report["engines"]["analytic"]["click_probabilities"] is None
    assert "out_of_regime" in report["engines"]["analytic"]


@pytest.mark.parametrize("text", [
    "interferometer: [1, 2\n",
    "just a string\n",
    "interferometer:\n  g1: 0.05\n  g2: 0.1\n  T_A: 1.5\n",
    "interferometer:\n  g1: 0.05\n",
    "interferometer:\n  g1: 0.05\n  g2: 0.1\n  gain: 3\n",
    "interferometer:\n  g1: yes\n  g2: 0.1\n",
])
def test_malformed_config_exit_2(text, tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    assert main(["probe", "--config", str(path)]) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_out_of_range_message_names_field(tmp_path, capsys):
    cfg = _write(tmp_path, "c.yaml", {"interferometer": {"g1": 0.05, "g2": 0.1, "eta_B": 2}})
    assert main(["probe", "--config", cfg]) == EXIT_CONFIG
    assert "eta_B" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["probe", "--config", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG


def test_usage_error_exit_2():
    assert main(["sweep"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_json_config_and_string_numbers(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"interferometer": {"g1": "5e-2", "g2": 0.03}, "engines": "analytic"}))
    code, report = _run_json(["probe", "--config", str(path)], tmp_path)
    assert code == EXIT_OK and report["config"]["g1"] == 0.05


def _sweep_doc(**over):
    doc = {
        "interferometer": {"g1": 0.05, "T_A": 0.95, "T_B": 0.9},
        "sweep": {"g2_min": 1e-3, "g2_max": 1.0, "points": 25},
        "engines": "analytic,fock",
    }
    doc.update(over)
    return doc


def test_sweep_csv_schema_and_determinism(tmp_path):
    cfg = _write(tmp_path, "s.yaml", _sweep_doc())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--config", cfg, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    header = lines[0].split(",")
    assert header[:10] == ["g2", "p_A", "p_B", "p_CC", "V_A", "V_B", "V_CC", "FI_A_max", "FI_B_max", "FI_CC_max"]
    assert "FI_CC_num" in header and header[-1] == "loss_balanced"
    g2 = [float(l.split(",")[0]) for l in lines[1:]]
    assert len(g2) == 25 and all(np.diff(g2) > 0)
    assert sum(int(l.split(",")[-1]) for l in lines[1:]) == 1


def test_sweep_fock_breakdown_only_above_threshold(tmp_path):
    cfg = _write(tmp_path, "s.yaml", _sweep_doc(sweep={"g2_min": 1e-3, "g2_max": 1.0, "points": 60}))
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = np.genfromtxt(out, delimiter=",", names=True)
    dev = np.abs(rows["FI_CC_num"] / rows["FI_CC_max"] - 1)
    assert np.all(dev[rows["g2"] <= 0.15] <= 0.1)
    assert np.any(dev[rows["g2"] > 0.15] > 0.1)


def test_sweep_json_format(tmp_path):
    cfg = _write(tmp_path, "s.yaml", _sweep_doc(engines="bogoliubov"))
    code, report = _run_json(["sweep", "--config", cfg, "--format", "json"], tmp_path)
    assert code == EXIT_OK
    assert report["columns"] == ["g2", "n_a", "n_b", "n_ab", "loss_balanced"]
    assert len(report["rows"]) == 25


@pytest.mark.parametrize("sweep_sec", [{"points": 1}, {"g2_min": 0}, {"spacing": "cubic"}, {"points": 2.5}])
def test_sweep_spec_errors(sweep_sec, tmp_path):
    cfg = _write(tmp_path, "s.yaml", _sweep_doc(sweep=sweep_sec))
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG
    assert not (tmp_path / "x.csv").exists()


def test_sweep_cutoff_flag(tmp_path):
    cfg = _write(tmp_path, "s.yaml", _sweep_doc(sweep={"points": 3}))
    assert main(["sweep", "--config", cfg, "--cutoff", "1"]) == EXIT_CONFIG


@pytest.mark.parametrize("T, conditional, unconditional", [(0.6, True, False), (0.75, True, True), (0.5, False, False)])
def test_compare_asymptotic_verdicts(T, conditional, unconditional, tmp_path):
    cfg = _write(tmp_path, "c.yaml", {"interferometer": {"g1": 0.05, "g2": 0.05, "T_A": T, "T_B": T}})
    code, report = _run_json(["compare", "--config", cfg], tmp_path)
    assert code == EXIT_OK
    assert report["asymptotic"] == {"conditional": conditional, "unconditional": unconditional}
    assert len(report["verdicts"]) == 6


def test_compare_edge_sum_exactly_one(tmp_path):
    cfg = _write(tmp_path, "c.yaml", {"interferometer": {"g1": 0.05, "g2": 0.05, "T_A": 0.25, "T_B": 0.75}})
    code, report = _run_json(["compare", "--config", cfg], tmp_path)
    assert report["asymptotic"]["conditional"] is False


def _visibility_doc(T_A, T_B, values=None):
    g2 = np.linspace(0.005, 0.1, 12)
    vis = values if values is not None else [analytic.visibility(0.05, g2, T_A, T_B, o).tolist() for o in Observable]
    return {"visibility_sweep": {"g1": 0.05, "g2": g2.tolist(), "V_A": vis[0], "V_B": vis[1], "V_CC": vis[2]}}


def test_calibrate_roundtrip_through_file(tmp_path):
    doc = _visibility_doc(0.8123, 0.7041)
    doc["klyshko"] = {"singles_A": 1000, "singles_B": 800, "coincidences": 400}
    code, report = _run_json(["calibrate", "--config", _write(tmp_path, "d.yaml", doc)], tmp_path)
    assert code == EXIT_OK
    assert report["T_A"] == pytest.approx(0.8123, abs=1e-9) and report["T_B"] == pytest.approx(0.7041, abs=1e-9)
    assert (report["eta_A"], report["eta_B"]) == (0.5, 0.4)
    assert report["method"] == "visibility-fit"


def test_calibrate_loss_balanced(tmp_path):
    doc = {"loss_balanced": {"V_A": 2 * 0.7 / 1.7, "V_B": 2 * 0.8 / 1.8}}
    code, report = _run_json(["calibrate", "--config", _write(tmp_path, "d.yaml", doc)], tmp_path)
    assert code == EXIT_OK
    assert (report["T_A"], report["T_B"]) == pytest.approx((0.8, 0.7), abs=1e-12)
    assert report["method"] == "loss-balanced-inversion"


def test_calibrate_fit_failure_exit_3(tmp_path, capsys):
    doc = _visibility_doc(0, 0, values=[[0.0] * 12] * 3)
    assert main(["calibrate", "--config", _write(tmp_path, "d.yaml", doc)]) == EXIT_FIT
    assert "fit diverged" in capsys.readouterr().out


def test_calibrate_bad_counts_exit_2(tmp_path):
    doc = {"klyshko": {"singles_A": 100, "singles_B": 50, "coincidences": 60}}
    assert main(["calibrate", "--config", _write(tmp_path, "d.yaml", doc)]) == EXIT_CONFIG


def test_validate_fast_deterministic_and_quick(tmp_path):
    t0 = time.perf_counter()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["validate", "--fast", "--out", str(a)]) == EXIT_OK
    assert time.perf_counter() - t0 < 60
    assert main(["validate", "--level", "fast", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_validate_fault_injection_exit_1(tmp_path, monkeypatch):
    def flipped(T, d):
        K = np.zeros((d, d, d))
        for k in range(d):
            for n in range(k, d):
                K[k, n - k, n] = math.sqrt(math.comb(n, k) * T ** (n - k) * (1.0 + T) ** k)
        return K

    monkeypatch.setattr(fock, "loss_kraus", flipped)
    code, report = _run_json(["validate", "--fast"], tmp_path)
    assert code == EXIT_PROPERTY
    assert report["first_failure"]["name"] == "trace-preservation"
    assert report["first_failure"]["counterexample"]


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lossy_su11", "compare", "--config", str(DOCS / "compare.yaml")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["resource_ratio"] == pytest.approx(1.2)
