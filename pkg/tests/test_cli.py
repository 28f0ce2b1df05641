"""End-to-end command-line behavior: exit codes, file layout, determinism.

All runs here use deliberately tiny resolutions so the whole module stays
fast; physical accuracy at these settings is checked elsewhere.
"""
import json
import math
import os
import shutil

import numpy as np
import pytest

from lagflow.cli import main
from lagflow.flow import DIAGNOSTIC_COLUMNS
from lagflow.geometry import PlaneCurve
from lagflow.runio import read_snapshot, write_snapshot


def write_config(path, **overrides):
    doc = {
        "scenario": {"name": "circle", "params": {"rho": 1.0}},
        "resolution": 64,
    }
    doc.update(overrides)
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return str(path)


@pytest.fixture(scope="module")
def circle_run(tmp_path_factory, capsysbinary=None):
    """One tiny full collapse (rho = 1, lifespan 1/4), reused read-only."""
    root = tmp_path_factory.mktemp("runs")
    cfg = write_config(root / "config.json")
    code = main(["run", "--config", cfg, "--out", str(root)])
    assert code == 2
    (run_dir,) = [p for p in root.iterdir() if p.is_dir()]
    return run_dir


def load_manifest(run_dir):
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        return json.load(fh)


class TestScenariosList:
    def test_table_contents(self, capsys):
        assert main(["scenarios", "list"]) == 0
        out = capsys.readouterr().out
        for name in ("circle", "ellipse", "slag_cone", "x_cone", "custom"):
            assert name in out
        assert "semi-minor fixed at 2" in out
        assert "rho^2/4" in out
        assert "analysis fixture, stationary" in out


class TestConfigValidation:
    def test_missing_file(self, capsys):
        assert main(["run", "--config", "/nonexistent/nowhere.json"]) == 1
        assert "not found" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text('{"scenario": ')
        assert main(["run", "--config", str(p)]) == 1
        assert "line" in capsys.readouterr().err

    def test_unknown_flow_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", flow={"bogus": 1})
        assert main(["run", "--config", cfg]) == 1
        assert "flow.bogus" in capsys.readouterr().err

    def test_wrong_type(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", flow={"safety": "fast"})
        assert main(["run", "--config", cfg]) == 1
        assert "flow.safety" in capsys.readouterr().err

    def test_unknown_scenario_param(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json")
        with open(cfg) as fh:
            doc = json.load(fh)
        doc["scenario"]["params"]["a"] = 3.0
        with open(cfg, "w") as fh:
            json.dump(doc, fh)
        assert main(["run", "--config", cfg]) == 1
        assert "scenario.params.a" in capsys.readouterr().err

    def test_unknown_top_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", verbosity=3)
        assert main(["run", "--config", cfg]) == 1
        assert "verbosity" in capsys.readouterr().err

    def test_normalize_open_curve_rejected(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.json",
            scenario={"name": "x_cone", "params": {}},
            normalize=True,
        )
        assert main(["run", "--config", cfg]) == 1
        assert "bad config" in capsys.readouterr().err


class TestRunOutputs:
    def test_exit_code_and_layout(self, circle_run):
        manifest = load_manifest(circle_run)
        assert manifest["exit_status"] == 2
        sing = manifest["singularity"]
        assert sing["detected"] is True
        assert sing["trigger"] == "origin_contact"
        # exact lifespan rho^2/4 = 0.25 up to the coarse-grid overshoot
        assert 0.24 < sing["t_low"] <= sing["t_high"] < 0.26
        assert os.path.exists(os.path.join(circle_run, "diagnostics.csv"))
        assert os.path.exists(os.path.join(circle_run, "curve.svg"))
        snaps = sorted(os.listdir(os.path.join(circle_run, "snapshots")))
        assert len(snaps) >= 3
        assert snaps[0] == "snapshot_000000.json"

    def test_manifest_echoes_scenario_and_config(self, circle_run):
        manifest = load_manifest(circle_run)
        assert manifest["scenario"]["name"] == "circle"
        assert manifest["config"]["resolution"] == 64
        assert manifest["config"]["flow"]["scheme"] == "euler"
        assert manifest["normalize_factor"] == 1.0
        assert manifest["initial_constant"] == pytest.approx(0.5, rel=1e-4)

    def test_acceptance_summary(self, circle_run):
        acc = load_manifest(circle_run)["acceptance"]
        assert acc["area_law"]["passed"] is True
        assert acc["monotone_defect"]["passed"] is True

    def test_diagnostics_columns(self, circle_run):
        with open(os.path.join(circle_run, "diagnostics.csv")) as fh:
            header = fh.readline().strip().split(",")
        assert tuple(header) == DIAGNOSTIC_COLUMNS
        assert len(header) == 11

    def test_snapshot_roundtrip_precision(self, circle_run, tmp_path):
        path = os.path.join(circle_run, "snapshots", "snapshot_000000.json")
        curve, t = read_snapshot(path)
        assert t == 0.0
        assert curve.closed
        # repr-level serialization: write-read must be bit-exact
        again = tmp_path / "snap.json"
        write_snapshot(str(again), curve, t)
        curve2, _ = read_snapshot(str(again))
        assert np.array_equal(curve.points, curve2.points)

    def test_run_is_deterministic(self, circle_run, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "other")]) == 2
        (other,) = [p for p in (tmp_path / "other").iterdir() if p.is_dir()]
        assert other.name == circle_run.name  # config-hash run id
        a = load_manifest(circle_run)["files"]
        b = load_manifest(other)["files"]
        assert a == b

    def test_env_var_sets_output_root(self, tmp_path, monkeypatch):
        cfg = write_config(
            tmp_path / "c.json",
            scenario={"name": "x_cone", "params": {}},
            stop={"t_end": 0.01},
        )
        monkeypatch.setenv("LAGFLOW_RUNS", str(tmp_path / "env_runs"))
        assert main(["run", "--config", cfg]) == 0
        assert (tmp_path / "env_runs").is_dir()
        assert any((tmp_path / "env_runs").iterdir())


class TestStationaryRun:
    def test_cone_is_stationary(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.json",
            scenario={"name": "slag_cone", "params": {"phi": 0.3}},
            stop={"t_end": 0.01},
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
        (run_dir,) = [p for p in (tmp_path / "r").iterdir() if p.is_dir()]
        manifest = load_manifest(run_dir)
        assert manifest["singularity"]["detected"] is False
        acc = manifest["acceptance"]
        assert acc["stationary_displacement"]["passed"] is True
        assert acc["stationary_displacement"]["value"] < 1e-10


class TestCustomScenario:
    def test_roundtrip(self, tmp_path):
        u = 2 * np.pi * np.arange(48) / 48
        pts = np.column_stack([2.5 * np.cos(u), 1.5 * np.sin(u)])
        snap = tmp_path / "seed.json"
        write_snapshot(str(snap), PlaneCurve(pts), 0.0)
        cfg = write_config(
            tmp_path / "c.json",
            scenario={"name": "custom", "params": {"path": str(snap)}},
            stop={"t_end": 0.005},
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
        (run_dir,) = [p for p in (tmp_path / "r").iterdir() if p.is_dir()]
        manifest = load_manifest(run_dir)
        # the seed is resampled onto the requested resolution
        first, t0 = read_snapshot(os.path.join(run_dir, "snapshots", "snapshot_000000.json"))
        assert first.node_count == 64
        assert t0 == 0.0

    def test_missing_path_rejected(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.json", scenario={"name": "custom", "params": {}}
        )
        assert main(["run", "--config", cfg]) == 1
        assert "path" in capsys.readouterr().err


class TestVerify:
    def test_clean_run_verifies(self, circle_run, capsys):
        assert main(["verify", str(circle_run)]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_tampering_detected(self, circle_run, tmp_path, capsys):
        copy = tmp_path / "tampered"
        shutil.copytree(circle_run, copy)
        with open(copy / "diagnostics.csv", "a") as fh:
            fh.write("tamper\n")
        assert main(["verify", str(copy)]) == 1
        out = capsys.readouterr()
        assert "hash mismatch: diagnostics.csv" in out.out

    def test_missing_file_detected(self, circle_run, tmp_path, capsys):
        copy = tmp_path / "gutted"
        shutil.copytree(circle_run, copy)
        os.remove(copy / "curve.svg")
        assert main(["verify", str(copy)]) == 1
        assert "missing: curve.svg" in capsys.readouterr().out

    def test_no_manifest(self, tmp_path):
        assert main(["verify", str(tmp_path)]) == 1


class TestAnalyze:
    def test_density(self, circle_run, capsys):
        assert main(["analyze", str(circle_run), "density"]) == 0
        out = capsys.readouterr().out
        assert "monotone within" in out
        path = os.path.join(circle_run, "analysis", "density.csv")
        with open(path) as fh:
            lines = fh.read().strip().splitlines()
        assert lines[0] == "t,theta"
        assert len(lines) >= 3

    def test_spectrum(self, circle_run):
        assert main(["analyze", str(circle_run), "spectrum", "--bins", "24"]) == 0
        path = os.path.join(circle_run, "analysis", "spectrum.csv")
        with open(path) as fh:
            lines = fh.read().strip().splitlines()
        assert lines[0] == "angle_lo,angle_hi,mass"
        assert len(lines) == 25

    def test_lemmas(self, circle_run, capsys):
        assert main(["analyze", str(circle_run), "lemmas"]) == 0
        out = capsys.readouterr().out
        path = os.path.join(circle_run, "analysis", "lemmas.json")
        with open(path) as fh:
            doc = json.load(fh)
        assert set(doc) == {
            "monotone_defect",
            "radius_nonincreasing",
            "quadrant_monotonicity",
            "density_ratio_bound",
        }
        assert doc["monotone_defect"]["passed"] is True
        assert doc["radius_nonincreasing"]["passed"] is True
        assert "monotone_defect" in out

    def test_rescale_produces_views(self, circle_run):
        assert (
            main(
                [
                    "analyze",
                    str(circle_run),
                    "rescale",
                    "--sigma",
                    "2",
                    "--s",
                    "-1",
                ]
            )
            == 0
        )
        path = os.path.join(circle_run, "analysis", "rescaled_s-1_sigma2.json")
        curve, _ = read_snapshot(path)
        # self-similar circle: magnified view has radius 2*c0^(1/2)... the
        # rho=1 circle rescaled at sigma with s=-1 sits at radius 2
        radii = np.linalg.norm(curve.points, axis=1)
        assert np.max(np.abs(radii - 2.0)) < 0.05

    def test_rescale_out_of_range(self, circle_run, capsys):
        code = main(
            ["analyze", str(circle_run), "rescale", "--sigma", "100000", "--s", "-1"]
        )
        assert code == 4
        assert "outside" in capsys.readouterr().err

    def test_cones_on_circle_run(self, circle_run, capsys):
        # rescaled shrinking circle stays a closed loop: one component,
        # no line direction
        code = main(
            ["analyze", str(circle_run), "cones", "--sigma", "2", "--s", "-1", "--R", "2.5"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "1 component(s)" in out
        assert "closed" in out
        path = os.path.join(circle_run, "analysis", "cones_s-1_sigma2.json")
        with open(path) as fh:
            doc = json.load(fh)
        assert doc["s"] == -1.0
        assert doc["sigma"] == 2.0
        assert len(doc["components"]) == 1
        comp = doc["components"][0]
        assert comp["direction"] is None
        assert comp["mass"] > 0

    def test_missing_run_dir(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "ghost"), "density"]) == 4
        assert "cannot load" in capsys.readouterr().err

    def test_missing_T_without_detection(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.json",
            stop={"t_end": 0.05},
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
        (run_dir,) = [p for p in (tmp_path / "r").iterdir() if p.is_dir()]
        assert main(["analyze", str(run_dir), "density"]) == 4
        assert "--T" in capsys.readouterr().err
