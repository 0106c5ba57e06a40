"""Command-line interface: exit codes, artifacts, resume, sweeps."""

import csv
import json

import numpy as np
import pytest

from hydrofatigue.cli import main

TINY_PLATE = {
    "version": 1,
    "scenario": "plate",
    "material": {"E": 210e3, "nu": 0.3, "Gc": 2.7, "ell": 0.25},
    "load": {"amplitude": 0.002, "R": -1.0, "freq": 1.0,
             "waveform": "triangle", "increments_per_cycle": 20,
             "n_cycles": 2},
    "mesh": {"h_fine": 0.05, "h_coarse": 0.1},
    "output": {"directory": "tiny", "snapshot_every": 2,
               "checkpoint_every": 2},
}

TINY_SN = {
    "version": 1,
    "scenario": "smooth_sn",
    "material": {"preset": "JIS-SM490B"},
    "environment": {"preset": "h2-gas"},
    "load": {"stress_amplitude": 380.0},
    "output": {"directory": "sn"},
}


def write_cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestValidate:
    def test_valid_file(self, tmp_path, capsys):
        assert main(["validate", write_cfg(tmp_path, TINY_PLATE)]) == 0
        assert "ok: valid plate" in capsys.readouterr().out

    def test_echo_prints_resolved_json(self, tmp_path, capsys):
        assert main(["validate", "--echo",
                     write_cfg(tmp_path, TINY_PLATE)]) == 0
        doc = json.loads(capsys.readouterr().out)
        # defaults were resolved into the echo
        assert doc["solver"]["stag_tol"] > 0
        assert doc["load"]["waveform"] == "triangle"

    def test_valid_preset(self, capsys):
        assert main(["validate", "--preset", "cracked-plate-inert"]) == 0

    def test_semantic_error_exits_2(self, tmp_path, capsys):
        doc = json.loads(json.dumps(TINY_PLATE))
        doc["mesh"]["h_fine"] = 0.2
        assert main(["validate", write_cfg(tmp_path, doc)]) == 2
        assert "ell/5" in capsys.readouterr().err

    def test_missing_file_exits_4(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "absent.json")]) == 4

    def test_file_and_preset_conflict(self, tmp_path, capsys):
        rc = main(["validate", write_cfg(tmp_path, TINY_PLATE),
                   "--preset", "notched-bar"])
        assert rc == 2

    def test_neither_file_nor_preset(self, capsys):
        assert main(["validate"]) == 2


class TestPresets:
    def test_listing(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out
        assert "cracked-plate-inert" in out
        assert "smooth-sn-scm435-h2" in out

    def test_single_preset_is_json(self, capsys):
        assert main(["presets", "notched-bar"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["scenario"] == "notched_bar"

    def test_unknown_preset(self, capsys):
        assert main(["presets", "no-such"]) == 2


class TestRunSmooth:
    def test_artifacts_and_frozen_life(self, tmp_path, capsys):
        rc = main(["run", write_cfg(tmp_path, TINY_SN),
                   "--out", str(tmp_path / "res")])
        assert rc == 0
        outdir = tmp_path / "res" / "sn"
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["N_f"] == 376
        assert summary["runout"] is False
        assert summary["C_wtppm"] == pytest.approx(0.044988, rel=1e-3)
        rows = read_rows(outdir / "sn.csv")
        assert rows[0] == ["material", "environment", "stress_amp_MPa", "N_f"]
        assert rows[1][0] == "JIS-SM490B"
        assert json.loads((outdir / "config.echo.json").read_text())


class TestRunPlate:
    def test_artifacts(self, tmp_path, capsys):
        rc = main(["run", write_cfg(tmp_path, TINY_PLATE),
                   "--out", str(tmp_path / "res")])
        assert rc == 0
        outdir = tmp_path / "res" / "tiny"
        for name in ("config.echo.json", "traces.csv", "summary.json",
                     "checkpoint.npz", "fields_0002.vtk"):
            assert (outdir / name).exists(), name
        rows = read_rows(outdir / "traces.csv")
        assert rows[0][0] == "cycle"
        assert [r[0] for r in rows[1:]] == ["1", "2"]
        # fully reversed cycling: reactions antisymmetric up to the tiny
        # tension/compression asymmetry of the damage field, no growth
        peak, valley = float(rows[1][2]), float(rows[1][3])
        assert peak > 0 > valley
        assert peak == pytest.approx(-valley, rel=1e-3)
        assert float(rows[2][1]) == 0.0
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["cycles_run"] == 2
        assert summary["failure_cycle"] is None

    def test_cycle_override(self, tmp_path):
        rc = main(["run", write_cfg(tmp_path, TINY_PLATE),
                   "--out", str(tmp_path / "res"), "--cycles", "1"])
        assert rc == 0
        rows = read_rows(tmp_path / "res" / "tiny" / "traces.csv")
        assert [r[0] for r in rows[1:]] == ["1"]


class TestResume:
    def test_continues_and_merges_traces(self, tmp_path, capsys):
        cfgfile = write_cfg(tmp_path, TINY_PLATE)
        out = str(tmp_path / "res")
        assert main(["run", cfgfile, "--out", out]) == 0
        rundir = tmp_path / "res" / "tiny"
        assert main(["resume", str(rundir), "--cycles", "2"]) == 0
        rows = read_rows(rundir / "traces.csv")
        assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4"]
        summary = json.loads((rundir / "summary.json").read_text())
        assert summary["cycles_run"] == 4

    def test_missing_checkpoint_exits_4(self, tmp_path, capsys):
        assert main(["resume", str(tmp_path / "nowhere")]) == 4

    def test_smooth_runs_not_resumable(self, tmp_path, capsys):
        rundir = tmp_path / "sn"
        rundir.mkdir()
        (rundir / "config.echo.json").write_text(json.dumps(TINY_SN))
        (rundir / "checkpoint.npz").write_bytes(b"")
        assert main(["resume", str(rundir)]) == 2
        assert "not checkpointed" in capsys.readouterr().err


class TestSweep:
    def test_smooth_grid(self, tmp_path, capsys):
        doc = json.loads(json.dumps(TINY_SN))
        doc["output"]["directory"] = "grid"
        rc = main(["sweep", write_cfg(tmp_path, doc),
                   "--grid", "load.stress_amplitude=380,340",
                   "--out", str(tmp_path / "res")])
        assert rc == 0
        root = tmp_path / "res" / "grid"
        assert (root / "stress_amplitude=380" / "summary.json").exists()
        assert (root / "stress_amplitude=340" / "summary.json").exists()
        rows = read_rows(root / "sweep.csv")
        assert rows[0][:2] == ["load.stress_amplitude", "N_f"]
        lives = {r[0]: int(r[1]) for r in rows[1:]}
        assert lives == {"380": 376, "340": 1971}

    def test_bad_grid_syntax(self, tmp_path, capsys):
        assert main(["sweep", write_cfg(tmp_path, TINY_SN),
                     "--grid", "just-a-name",
                     "--out", str(tmp_path / "res")]) == 2

    def test_grid_point_revalidated(self, tmp_path, capsys):
        # driving a value out of range must fail before any run starts
        assert main(["sweep", write_cfg(tmp_path, TINY_SN),
                     "--grid", "load.stress_amplitude=380,-10",
                     "--out", str(tmp_path / "res")]) == 2
