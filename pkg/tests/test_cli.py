"""CLI contract: subcommands, exit codes, output files, reproducibility."""

import csv
import json
import os

import pytest

from qnslab.cli import MONITOR_COLUMNS, main
from qnslab.functionals import DISSIPATION_KEYS


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


RUN_DOC = {
    "scenario": "acoustic-1d",
    "n": 64,
    "params": {"nu": 1.0, "kappa": 0.0909, "eps": 1e-3},
    "integrator": {"scheme": "imex", "dt_init": 1e-3, "dt_min": 1e-4,
                   "dt_max": 1e-3, "t_end": 0.01, "monitor_every": 2},
}


class TestRun:
    def test_success_writes_artifacts(self, tmp_path):
        cfg = _write(tmp_path, "run.json", RUN_DOC)
        out = str(tmp_path / "out")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "monitors.csv"))
        assert os.path.exists(os.path.join(out, "summary.json"))
        assert os.path.exists(os.path.join(out, "final_rho.dat"))
        assert os.path.exists(os.path.join(out, "final_vel.dat"))
        with open(os.path.join(out, "summary.json")) as fh:
            summary = json.load(fh)
        assert summary["status"] == "completed"
        assert summary["final_time"] == pytest.approx(0.01)

    def test_monitor_columns_contract(self, tmp_path):
        cfg = _write(tmp_path, "run.json", RUN_DOC)
        out = str(tmp_path / "out")
        main(["run", "--config", cfg, "--out", out])
        with open(os.path.join(out, "monitors.csv"), newline="") as fh:
            header = next(csv.reader(fh))
        assert tuple(header) == MONITOR_COLUMNS
        assert header[-len(DISSIPATION_KEYS):] == list(DISSIPATION_KEYS)

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2

    def test_invalid_json_exits_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", "--config", str(path)]) == 2

    def test_strict_inadmissible_exits_2(self, tmp_path, capsys):
        doc = dict(RUN_DOC)
        doc["params"] = {"nu": 1.0, "kappa": 0.5, "strict": True}
        cfg = _write(tmp_path, "run.json", doc)
        assert main(["run", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2
        assert "11*kappa <= nu" in capsys.readouterr().err

    def test_unknown_scenario_exits_2(self, tmp_path):
        doc = dict(RUN_DOC, scenario="warp-drive")
        cfg = _write(tmp_path, "run.json", doc)
        assert main(["run", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_uniform_rest_monitors_constant(self, tmp_path):
        doc = dict(RUN_DOC, scenario="uniform-rest")
        doc["params"] = {"nu": 1.0, "kappa": 0.0909}
        cfg = _write(tmp_path, "run.json", doc)
        out = str(tmp_path / "out")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        with open(os.path.join(out, "monitors.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        energies = {row["energy"] for row in rows}
        assert len(energies) == 1

    def test_rerun_bit_identical(self, tmp_path):
        cfg = _write(tmp_path, "run.json", RUN_DOC)
        outs = []
        for sub in ("a", "b"):
            out = str(tmp_path / sub)
            main(["run", "--config", cfg, "--out", out])
            with open(os.path.join(out, "monitors.csv"), "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1]

    def test_positivity_failure_exits_3(self, tmp_path):
        doc = {
            "scenario": "acoustic-1d", "n": 32,
            "params": {"nu": 1e-8, "eps": 0.0},
            "integrator": {"scheme": "rk4-explicit", "dt_init": 0.5,
                           "dt_min": 0.5, "dt_max": 0.5, "t_end": 10.0,
                           "positivity_floor": 0.9},
        }
        cfg = _write(tmp_path, "run.json", doc)
        assert main(["run", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 3


class TestVerify:
    def test_default_suites_pass(self, tmp_path):
        cfg = _write(tmp_path, "v.json", {
            "suites": ["identity", "inequality"],
            "num_seeds": 3, "grids": [[64]],
        })
        out = str(tmp_path / "out")
        assert main(["verify", "--config", cfg, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "identity_report.json"))
        assert os.path.exists(os.path.join(out, "identity_results.jsonl"))

    def test_canary_exits_1(self, tmp_path):
        cfg = _write(tmp_path, "v.json", {
            "suites": ["identity"], "num_seeds": 2, "grids": [[64]],
            "canary": True, "checks": ["bohm-forms"],
        })
        assert main(["verify", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 1

    def test_unknown_check_exits_2(self, tmp_path):
        cfg = _write(tmp_path, "v.json", {
            "suites": ["identity"], "checks": ["no-such-check"],
        })
        assert main(["verify", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_unknown_suite_exits_2(self, tmp_path):
        cfg = _write(tmp_path, "v.json", {"suites": ["mystery"]})
        assert main(["verify", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2


class TestSweep:
    def test_eps_sweep_three_rows(self, tmp_path):
        doc = dict(RUN_DOC, sweep={"eps": [1e-2, 1e-3, 1e-4]})
        cfg = _write(tmp_path, "s.json", doc)
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        with open(os.path.join(out, "sweep.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        assert all(r["status"] == "completed" for r in rows)

    def test_single_point_sweep(self, tmp_path):
        doc = dict(RUN_DOC, sweep={"kappa": [0.05]})
        cfg = _write(tmp_path, "s.json", doc)
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        with open(os.path.join(out, "sweep.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1

    def test_unknown_axis_exits_2(self, tmp_path):
        doc = dict(RUN_DOC, sweep={"gamma": [2.0]})
        cfg = _write(tmp_path, "s.json", doc)
        assert main(["sweep", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_threads_option(self, tmp_path):
        doc = dict(RUN_DOC, sweep={"eps": [1e-3, 1e-4]})
        cfg = _write(tmp_path, "s.json", doc)
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out,
                     "--threads", "2"]) == 0


class TestReport:
    def test_renders_monitor_table(self, tmp_path, capsys):
        cfg = _write(tmp_path, "run.json", RUN_DOC)
        out = str(tmp_path / "out")
        main(["run", "--config", cfg, "--out", out])
        capsys.readouterr()
        assert main(["report", "--monitors",
                     os.path.join(out, "monitors.csv")]) == 0
        text = capsys.readouterr().out
        assert "energy" in text and "mass_balance_residual" in text

    def test_missing_monitors_exits_2(self, tmp_path):
        assert main(["report", "--monitors",
                     str(tmp_path / "nope.csv")]) == 2
