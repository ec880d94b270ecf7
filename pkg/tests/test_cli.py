import json
import math
import os
import warnings

import numpy as np
import pytest

from fanocavity.cli import discrepancy_report, main
from fanocavity.model import (EffectiveParams, ParameterConsistencyWarning,
                              SystemParams, normalize)
from fanocavity.sweep import validate_grid_csv, validate_spectrum_csv


def params(**kw):
    merged = dict(kappa=0.1, gamma_b=7.5e-7, U_eff=1.0, nu=100.0,
                  Delta=1.0, g=0.1)
    merged.update(kw)
    return EffectiveParams(**merged)


def run(argv, tmp_path, monkeypatch):
    monkeypatch.setenv("FANOCAVITY_OUTDIR", str(tmp_path))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterConsistencyWarning)
        return main(argv)


class TestDiscrepancyReport:
    def test_report_structure(self):
        # The two evaluation paths legitimately differ away from the mode
        # frequency, so the report only has to be well formed and ordered.
        p = params(g=0.01, Delta=0.8)
        deltas = np.linspace(0.5, 1.5, 201)
        rep = discrepancy_report(p, deltas)
        assert rep["n_points"] == 201
        assert rep["n_excluded"] == 0
        assert 0.0 <= rep["median_rel_diff"] <= rep["max_rel_diff"]
        assert 0.5 <= rep["delta_at_max"] <= 1.5

    def test_decoupled_grid_disagrees_at_pole(self):
        # With the coupling off the closed form has a pole at the mode
        # frequency while the solver stays finite, so the report must count
        # the excluded point and flag a large residual nearby.
        p = params(g=0.0, gamma_b=0.0)
        deltas = np.linspace(0.5, 1.5, 11)  # hits delta = 1 exactly
        rep = discrepancy_report(p, deltas)
        assert rep["n_excluded"] >= 1
        assert rep["n_points"] == 11 - rep["n_excluded"]

    def test_dip_location_agreement(self):
        # On resonance the two evaluation paths must put the absorption
        # feature at the same detuning even if amplitudes differ.
        from fanocavity.response import output_field
        p = params(g=0.1, Delta=1.0)
        deltas = np.linspace(0.97, 1.03, 601)
        mu_s = np.array([
            output_field(p, float(d), "solver", False).real
            for d in deltas])
        mu_p = np.array([
            output_field(p, float(d), "printed").real for d in deltas])
        d_s = deltas[int(np.argmin(np.abs(mu_s)))]
        d_p = deltas[int(np.argmin(np.abs(mu_p)))]
        assert abs(d_s - d_p) <= 2 * (deltas[1] - deltas[0])


class TestSpectrumCommand:
    def test_preset_writes_csv_and_sidecar(self, tmp_path, monkeypatch):
        assert run(["spectrum", "--preset", "fig2a"], tmp_path,
                   monkeypatch) == 0
        csv = tmp_path / "fig2a.csv"
        side = tmp_path / "fig2a.json"
        validate_spectrum_csv(csv)
        record = json.loads(side.read_text())
        assert len(record["panels"]) == 6
        assert sum(p["rows"] for p in record["panels"]) == 6 * 2001

    def test_overwrite_protection(self, tmp_path, monkeypatch):
        args = ["spectrum", "--preset", "fig7"]
        assert run(args, tmp_path, monkeypatch) == 0
        assert run(args, tmp_path, monkeypatch) == 2
        assert run(args + ["--force"], tmp_path, monkeypatch) == 0

    def test_unknown_preset_is_config_error(self, tmp_path, monkeypatch):
        assert run(["spectrum", "--preset", "fig99"], tmp_path,
                   monkeypatch) == 2

    def test_preset_rejects_config_mix(self, tmp_path, monkeypatch):
        assert run(["spectrum", "--preset", "fig7", "--set", "g_wb=1"],
                   tmp_path, monkeypatch) == 2

    def test_config_driven_spectrum(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[drive]\ng_wb = 0.01\n[cavity]\nDelta_wb = 0.8\n")
        assert run(["spectrum", "--config", str(cfg), "--points", "101"],
                   tmp_path, monkeypatch) == 0
        validate_spectrum_csv(tmp_path / "spectrum.csv")
        record = json.loads((tmp_path / "spectrum.json").read_text())
        assert record["config"]["g"] == pytest.approx(
            0.01 * 2 * math.pi * 1e4)

    def test_discrepancy_flag_adds_report(self, tmp_path, monkeypatch,
                                          capsys):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[drive]\ng_wb = 0.01\n[cavity]\nDelta_wb = 0.8\n")
        assert run(["spectrum", "--config", str(cfg), "--points", "101",
                    "--discrepancy"], tmp_path, monkeypatch) == 0
        record = json.loads((tmp_path / "spectrum.json").read_text())
        assert "max_rel_diff" in record["discrepancy"]
        assert "max_rel_diff" in capsys.readouterr().out

    def test_config_round_trip_reproduces_csv(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[drive]\ng_wb = 0.05\n[cavity]\nDelta_wb = 0.9\n")
        out1 = tmp_path / "first.csv"
        assert run(["spectrum", "--config", str(cfg), "--points", "101",
                    "--out", str(out1)], tmp_path, monkeypatch) == 0
        record = json.loads((tmp_path / "first.json").read_text())
        resolved = tmp_path / "resolved.json"
        resolved.write_text(json.dumps(record["config"]))
        out2 = tmp_path / "second.csv"
        assert run(["spectrum", "--config", str(resolved), "--points",
                    "101", "--out", str(out2)], tmp_path, monkeypatch) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestSweepCommand:
    def test_preset_grid(self, tmp_path, monkeypatch):
        assert run(["sweep", "--preset", "fig5b"], tmp_path,
                   monkeypatch) == 0
        validate_grid_csv(tmp_path / "fig5b.csv")

    def test_manual_axes(self, tmp_path, monkeypatch):
        assert run(["sweep", "--axis1", "delta:0.8:1.2:5",
                    "--axis2", "Delta=0.9,1.1",
                    "--set", "g_wb=0.01"], tmp_path, monkeypatch) == 0
        path = tmp_path / "sweep.csv"
        validate_grid_csv(path)
        assert len(path.read_text().splitlines()) == 3

    def test_bad_axis_syntax(self, tmp_path, monkeypatch):
        assert run(["sweep", "--axis1", "delta:0.8:1.2"], tmp_path,
                   monkeypatch) == 2

    def test_axis_required_without_preset(self, tmp_path, monkeypatch):
        assert run(["sweep"], tmp_path, monkeypatch) == 2


class TestDelayCommand:
    def test_preset_curve(self, tmp_path, monkeypatch):
        assert run(["delay", "--preset", "fig8"], tmp_path,
                   monkeypatch) == 0
        lines = (tmp_path / "fig8.csv").read_text().splitlines()
        assert lines[0] == "P_l_w,tau_g_us"
        assert len(lines) == 102
        taus = [float(l.split(",")[1]) for l in lines[1:]]
        assert all(t > 0 for t in taus)

    def test_non_power_preset_rejected(self, tmp_path, monkeypatch):
        assert run(["delay", "--preset", "fig2a"], tmp_path,
                   monkeypatch) == 2


class TestFitFanoCommand:
    def test_fit_from_generated_spectrum(self, tmp_path, monkeypatch,
                                         capsys):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[drive]\ng_wb = 0.001\n[cavity]\nDelta_wb = 0.8\n")
        assert run(["spectrum", "--config", str(cfg)], tmp_path,
                   monkeypatch) == 0
        capsys.readouterr()
        assert run(["fit-fano", "--input", str(tmp_path / "spectrum.csv"),
                    "--config", str(cfg)], tmp_path, monkeypatch) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["converged"]
        assert report["q_fit"] > 0

    def test_rejects_non_spectrum_csv(self, tmp_path, monkeypatch):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert run(["fit-fano", "--input", str(bad)], tmp_path,
                   monkeypatch) == 2


class TestOracleCheckCommand:
    def test_small_run_passes(self, tmp_path, monkeypatch, capsys):
        assert run(["oracle-check", "--n", "3", "--seed", "7"], tmp_path,
                   monkeypatch) == 0
        out = capsys.readouterr().out
        assert "max relative error" in out

    def test_impossible_tolerance_fails(self, tmp_path, monkeypatch):
        assert run(["oracle-check", "--n", "1", "--seed", "7",
                    "--tolerance", "1e-12"], tmp_path, monkeypatch) == 3


class TestPresetCommand:
    def test_list(self, tmp_path, monkeypatch, capsys):
        assert run(["preset"], tmp_path, monkeypatch) == 0
        names = capsys.readouterr().out.split()
        assert "fig2a" in names and "fig11" in names

    def test_show(self, tmp_path, monkeypatch, capsys):
        assert run(["preset", "--name", "fig9"], tmp_path,
                   monkeypatch) == 0
        spec = json.loads(capsys.readouterr().out)
        assert spec["mode"] == "printed"
        assert spec["observable"] == "tau_g"
