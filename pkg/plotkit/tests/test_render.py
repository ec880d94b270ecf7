import json
import os

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.render import PlotSpec, load_spec, render, split_panels
from plotkit.schema import (SchemaError, read_delay_csv, read_grid_csv,
                            read_spectrum_csv)

DATA = os.path.join(os.path.dirname(__file__), "data")

SPECTRUM_HEADER = ("delta_norm,mu,nu_out,t_re,t_im,t_abs2,"
                   "phase_rad,tau_g_us")


def write_spec(tmp_path, **kw):
    path = tmp_path / "fig.json"
    path.write_text(json.dumps(kw))
    return str(path)


class TestSchemaReaders:
    def test_spectrum_reader(self):
        table = read_spectrum_csv(os.path.join(DATA, "fig2a.csv"))
        assert table["delta_norm"].size == 6 * 2001
        assert np.nanmin(table["delta_norm"]) == pytest.approx(0.5)

    def test_grid_reader(self):
        a1, a2, grid = read_grid_csv(os.path.join(DATA, "fig4c.csv"))
        assert grid.shape == (a2.size, a1.size) == (201, 201)

    def test_delay_reader(self):
        P, tau = read_delay_csv(os.path.join(DATA, "fig8.csv"))
        assert P.size == 101
        assert np.all(tau > 0)

    def test_empty_body_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(SPECTRUM_HEADER + "\n")
        with pytest.raises(SchemaError):
            read_spectrum_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_spectrum_csv(path)

    def test_ragged_grid_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",1,2\n0.5,3\n")
        with pytest.raises(SchemaError):
            read_grid_csv(path)

    def test_empty_cells_become_nan(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text(SPECTRUM_HEADER + "\n" + "1," + "," * 6 + "\n")
        table = read_spectrum_csv(path)
        assert np.isnan(table["mu"][0])


class TestPanelSplit:
    def test_concatenated_panels(self):
        deltas = np.concatenate([np.linspace(0.5, 1.5, 11)] * 3)
        assert split_panels(deltas) == [(0, 11), (11, 22), (22, 33)]

    def test_single_panel(self):
        assert split_panels(np.linspace(0, 1, 5)) == [(0, 5)]


class TestSpecLoading:
    def test_missing_required_key(self, tmp_path):
        path = write_spec(tmp_path, kind="line", out_path="x.png")
        with pytest.raises(SchemaError):
            load_spec(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_spec(tmp_path, input_csv="a.csv", kind="line",
                          out_path="x.png", colour="red")
        with pytest.raises(SchemaError):
            load_spec(path)

    def test_unknown_kind_rejected(self, tmp_path):
        spec = PlotSpec(input_csv=os.path.join(DATA, "fig8.csv"),
                        kind="scatter", out_path=str(tmp_path / "x.png"))
        with pytest.raises(SchemaError):
            spec.validate()


class TestRenderCriterion:
    def _run(self, tmp_path, name, kind, csv, **extra):
        out = tmp_path / ("%s.png" % name)
        spec = write_spec(tmp_path, input_csv=os.path.join(DATA, csv),
                          kind=kind, out_path=str(out), **extra)
        assert main([spec]) == 0
        first = out.read_bytes()
        assert main([spec]) == 0
        assert out.read_bytes() == first
        return first

    def test_fig2a_stacked_deterministic(self, tmp_path):
        png = self._run(tmp_path, "fig2a", "stacked-spectra", "fig2a.csv")
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

    def test_fig4c_heatmap_deterministic(self, tmp_path):
        self._run(tmp_path, "fig4c", "heatmap", "fig4c.csv")

    def test_fig8_line_deterministic(self, tmp_path):
        self._run(tmp_path, "fig8", "line", "fig8.csv", log_x=True)

    def test_delay_surface_kind(self, tmp_path):
        out = tmp_path / "surface.png"
        render(PlotSpec(input_csv=os.path.join(DATA, "fig4c.csv"),
                        kind="delay-surface", out_path=str(out)))
        assert out.exists()

    def test_schema_mismatch_exits_nonzero_no_partial_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text(SPECTRUM_HEADER + "\n")  # valid header, empty body
        out = tmp_path / "never.png"
        spec = write_spec(tmp_path, input_csv=str(bad),
                          kind="stacked-spectra", out_path=str(out))
        assert main([spec]) == 2
        assert not out.exists()
        assert not os.path.exists(str(out) + ".tmp")

    def test_missing_input_exits_nonzero(self, tmp_path):
        spec = write_spec(tmp_path, input_csv=str(tmp_path / "absent.csv"),
                          kind="line", out_path=str(tmp_path / "x.png"))
        assert main([spec]) == 2
