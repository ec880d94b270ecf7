"""
Figure rendering from validated CSV inputs.

Four figure kinds:

- stacked-spectra: one curve per panel of a concatenated spectrum CSV,
  offset vertically, bottom to top in input order.
- heatmap: a 2D grid CSV as a color map.
- line: a power-versus-delay CSV (or a single-panel spectrum) as one curve.
- delay-surface: a 2D grid CSV of delays as a filled contour map with a
  logarithmic power axis.

Rendering is deterministic: fixed style, fixed dpi, and the image metadata
is pinned so identical inputs give identical bytes. Output is written to a
temporary file and moved into place only on success, so a failed render
never leaves a partial image behind.
"""

import json
import math
import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import (SchemaError, read_delay_csv, read_grid_csv,
                     read_spectrum_csv)

KINDS = ("stacked-spectra", "heatmap", "line", "delay-surface")

# Pinned so the PNG text chunk does not carry a library version string.
_METADATA = {"Software": "plotkit"}


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    kind: str
    out_path: str
    labels: dict = field(default_factory=dict)
    column: str = "mu"        # spectrum column for stacked/line kinds
    offset: float | None = None
    cmap: str = "viridis"
    dpi: int = 150
    log_x: bool = False

    def validate(self):
        if self.kind not in KINDS:
            raise SchemaError("unknown figure kind %r; valid: %s"
                              % (self.kind, ", ".join(KINDS)))
        if not os.path.exists(self.input_csv):
            raise SchemaError("input file not found: %s" % self.input_csv)


def load_spec(path) -> PlotSpec:
    """Read a figure description from a JSON file."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError("cannot read figure spec %s: %s" % (path, exc))
    if not isinstance(raw, dict):
        raise SchemaError("%s: figure spec must be a JSON object" % path)
    known = {f_.name for f_ in PlotSpec.__dataclass_fields__.values()}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError("%s: unknown spec keys: %s"
                          % (path, ", ".join(sorted(unknown))))
    for key in ("input_csv", "kind", "out_path"):
        if key not in raw:
            raise SchemaError("%s: figure spec needs %r" % (path, key))
    return PlotSpec(**raw)


def split_panels(deltas):
    """Index ranges of concatenated spectrum panels.

    Panels are concatenated back to back, so a new panel starts wherever
    the detuning axis stops increasing.
    """
    starts = [0]
    for i in range(1, deltas.size):
        if deltas[i] <= deltas[i - 1]:
            starts.append(i)
    starts.append(deltas.size)
    return [(a, b) for a, b in zip(starts, starts[1:])]


def _axis_labels(ax, spec, default_x, default_y):
    ax.set_xlabel(spec.labels.get("x", default_x))
    ax.set_ylabel(spec.labels.get("y", default_y))
    if "title" in spec.labels:
        ax.set_title(spec.labels["title"])


def _draw_stacked(spec, ax):
    table = read_spectrum_csv(spec.input_csv)
    if spec.column not in table:
        raise SchemaError("no column %r in %s" % (spec.column,
                                                  spec.input_csv))
    deltas = table["delta_norm"]
    y = table[spec.column]
    panels = split_panels(deltas)
    finite = y[np.isfinite(y)]
    if finite.size == 0:
        raise SchemaError("%s: column %r is all gaps"
                          % (spec.input_csv, spec.column))
    span = float(np.max(finite) - np.min(finite))
    offset = spec.offset if spec.offset is not None \
        else (1.2 * span if span > 0 else 1.0)
    for k, (a, b) in enumerate(panels):
        ax.plot(deltas[a:b], y[a:b] + k * offset, lw=1.0)
    _axis_labels(ax, spec, "probe detuning (units of mode frequency)",
                 spec.column + " (offset per curve)")


def _draw_line(spec, ax):
    try:
        P, tau = read_delay_csv(spec.input_csv)
        x, y = P, tau
        dx = "pump power (W)"
        dy = "group delay (us)"
    except SchemaError:
        table = read_spectrum_csv(spec.input_csv)
        if spec.column not in table:
            raise SchemaError("no column %r in %s" % (spec.column,
                                                      spec.input_csv))
        x, y = table["delta_norm"], table[spec.column]
        dx = "probe detuning (units of mode frequency)"
        dy = spec.column
    ax.plot(x, y, lw=1.2)
    if spec.log_x:
        ax.set_xscale("log")
    _axis_labels(ax, spec, dx, dy)


def _draw_grid(spec, ax, fig, contour=False):
    axis1, axis2, grid = read_grid_csv(spec.input_csv)
    masked = np.ma.masked_invalid(grid)
    if contour:
        art = ax.contourf(axis1, axis2, masked, levels=24, cmap=spec.cmap)
    else:
        art = ax.pcolormesh(axis1, axis2, masked, cmap=spec.cmap,
                            shading="auto")
    if spec.log_x:
        ax.set_xscale("log")
    fig.colorbar(art, ax=ax, label=spec.labels.get("z", ""))
    _axis_labels(ax, spec, "axis 1", "axis 2")


def render(spec: PlotSpec) -> str:
    """Draw the figure and move it into place atomically."""
    spec.validate()
    with plt.rc_context({"figure.figsize": (6.0, 4.0),
                         "font.size": 9.0,
                         "svg.hashsalt": "plotkit"}):
        fig, ax = plt.subplots()
        try:
            if spec.kind == "stacked-spectra":
                _draw_stacked(spec, ax)
            elif spec.kind == "line":
                _draw_line(spec, ax)
            elif spec.kind == "heatmap":
                _draw_grid(spec, ax, fig)
            else:
                _draw_grid(spec, ax, fig, contour=True)
            out_dir = os.path.dirname(spec.out_path)
            if out_dir:
                os.makedirs(out_dir, exist_ok=True)
            tmp = spec.out_path + ".tmp"
            fmt = os.path.splitext(spec.out_path)[1].lstrip(".") or "png"
            fig.savefig(tmp, dpi=spec.dpi, format=fmt, metadata=_METADATA)
            os.replace(tmp, spec.out_path)
        finally:
            plt.close(fig)
    return spec.out_path
