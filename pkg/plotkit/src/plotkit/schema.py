"""
Independent readers for the two CSV layouts the simulator publishes.

The renderer never imports the simulation package; it validates the files
against the published schemas on its own so a malformed input fails here,
before any drawing starts.
"""

import math

import numpy as np

SPECTRUM_COLUMNS = ("delta_norm", "mu", "nu_out", "t_re", "t_im", "t_abs2",
                    "phase_rad", "tau_g_us")

DELAY_COLUMNS = ("P_l_w", "tau_g_us")


class SchemaError(Exception):
    """The input file does not match a published CSV schema."""


def _cell(text, path, ln):
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise SchemaError("%s line %d: not a number: %r" % (path, ln, text))


def read_spectrum_csv(path):
    """Parse the 8-column spectrum layout into {column: array}.

    Empty cells become NaN. A file with only the header is rejected: there
    is nothing to draw.
    """
    with open(path) as f:
        header = f.readline().rstrip("\n")
        if header.split(",") != list(SPECTRUM_COLUMNS):
            raise SchemaError("%s: bad spectrum header %r" % (path, header))
        rows = []
        for ln, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(SPECTRUM_COLUMNS):
                raise SchemaError("%s line %d: expected %d columns, got %d"
                                  % (path, ln, len(SPECTRUM_COLUMNS),
                                     len(parts)))
            rows.append([_cell(c, path, ln) for c in parts])
    if not rows:
        raise SchemaError("%s: spectrum has a header but no rows" % path)
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(SPECTRUM_COLUMNS)}


def read_grid_csv(path):
    """Parse the 2D layout: first row axis1, first column axis2.

    Returns (axis1, axis2, grid) with grid shaped (len(axis2), len(axis1)).
    """
    with open(path) as f:
        first = f.readline().rstrip("\n").split(",")
        if not first or first[0] != "":
            raise SchemaError("%s: grid must start with a blank corner"
                              % path)
        try:
            axis1 = np.array([float(v) for v in first[1:]])
        except ValueError:
            raise SchemaError("%s: non-numeric axis row" % path)
        if axis1.size == 0:
            raise SchemaError("%s: grid has no axis-1 values" % path)
        axis2 = []
        rows = []
        for ln, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != axis1.size + 1:
                raise SchemaError("%s line %d: ragged row" % (path, ln))
            axis2.append(_cell(parts[0], path, ln))
            rows.append([_cell(c, path, ln) for c in parts[1:]])
    if not rows:
        raise SchemaError("%s: grid has an axis row but no data rows" % path)
    return axis1, np.asarray(axis2), np.asarray(rows)


def read_delay_csv(path):
    """Parse the power-versus-delay layout into (powers, delays_us)."""
    with open(path) as f:
        header = f.readline().rstrip("\n")
        if header.split(",") != list(DELAY_COLUMNS):
            raise SchemaError("%s: bad delay header %r" % (path, header))
        P, tau = [], []
        for ln, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != 2:
                raise SchemaError("%s line %d: expected 2 columns"
                                  % (path, ln))
            P.append(_cell(parts[0], path, ln))
            tau.append(_cell(parts[1], path, ln))
    if not P:
        raise SchemaError("%s: delay file has no rows" % path)
    return np.asarray(P), np.asarray(tau)
