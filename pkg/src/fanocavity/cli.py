"""
Command line front end.

Subcommands: spectrum, sweep, delay, fit-fano, oracle-check, preset.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Output files are never overwritten without --force. The default output
directory comes from --outdir, then the FANOCAVITY_OUTDIR environment
variable, then the working directory.
"""

import argparse
import json
import os
import sys
import warnings
from dataclasses import asdict, replace as dc_replace

import numpy as np

from . import __version__
from .config import load_config, resolved_config
from .errors import (ConfigError, DegenerateResponseError, DivergenceError,
                     FanocavityError, InvalidParameterError,
                     InvalidSpecError, InvalidWindowError,
                     PhaseUndefinedError, PoleError)
from .fano import fano_params_from_system, fit_fano
from .langevin import draw_stable_params, oracle_compare
from .model import EffectiveParams, ParameterConsistencyWarning, normalize
from .response import output_field
from .sweep import (PRESET_NAMES, SweepSpec, build_preset, delay_curve,
                    preset_spectrum_tables, provenance_record, run_sweep,
                    write_delay_csv, write_grid_csv, write_provenance,
                    write_spectrum_csv)

CONFIG_ERRORS = (ConfigError, InvalidSpecError, InvalidParameterError)
NUMERICAL_ERRORS = (PoleError, DivergenceError, DegenerateResponseError,
                    PhaseUndefinedError, InvalidWindowError)


def discrepancy_report(p: EffectiveParams, deltas,
                       include_counter_sideband: bool = True) -> dict:
    """Quantify the mismatch between the two evaluation paths.

    Evaluates the absorptive quadrature mu through both the sideband solver
    and the closed form over the grid and reports the max and median
    relative difference plus the detuning of maximal disagreement. The
    denominator is floored at 1e-12 of the solver's scale so zero crossings
    do not blow the ratio up. Pole-hit points are excluded and counted.
    """
    deltas = np.asarray(deltas, dtype=float)
    mu_s = np.full(deltas.size, np.nan)
    mu_p = np.full(deltas.size, np.nan)
    excluded = 0
    for i, d in enumerate(deltas):
        try:
            mu_s[i] = output_field(p, float(d), "solver",
                                   include_counter_sideband).real
            mu_p[i] = output_field(p, float(d), "printed").real
        except (PoleError, DegenerateResponseError):
            excluded += 1
    ok = ~(np.isnan(mu_s) | np.isnan(mu_p))
    if not np.any(ok):
        raise PoleError(float(deltas[0]), "all grid points hit poles")
    scale = max(float(np.max(np.abs(mu_s[ok]))), 1e-300)
    rel = np.abs(mu_p[ok] - mu_s[ok]) / np.maximum(np.abs(mu_s[ok]),
                                                   1e-12 * scale)
    i_max = int(np.argmax(rel))
    return {
        "max_rel_diff": float(np.max(rel)),
        "median_rel_diff": float(np.median(rel)),
        "delta_at_max": float(deltas[ok][i_max]),
        "n_excluded": excluded,
        "n_points": int(np.sum(ok)),
    }


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="fanocavity",
        description="Probe response and Fano lineshapes of a "
                    "condensate-loaded cavity")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--out", help="output file path")
        p.add_argument("--outdir", help="output directory")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")

    def add_params(p):
        p.add_argument("--config", help="config file (ini sections or "
                                        "flat JSON)")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--mode", choices=("solver", "printed"))
        p.add_argument("--drop-counter-sideband", action="store_true",
                       help="drop the counter sideband in solver mode")

    sp = sub.add_parser("spectrum", help="detuning spectrum CSV")
    sp.add_argument("--preset", help="figure preset name")
    add_params(sp)
    sp.add_argument("--delta-min", type=float, default=0.5)
    sp.add_argument("--delta-max", type=float, default=1.5)
    sp.add_argument("--points", type=int, default=2001)
    sp.add_argument("--discrepancy", action="store_true",
                    help="include a solver-vs-closed-form report")
    add_io(sp)

    sw = sub.add_parser("sweep", help="1D/2D parameter sweep CSV")
    sw.add_argument("--preset", help="figure preset name")
    add_params(sw)
    sw.add_argument("--axis1", help="name:lo:hi:n or name=v1,v2,...")
    sw.add_argument("--axis2", help="same syntax as --axis1")
    sw.add_argument("--observable",
                    choices=("mu", "nu_out", "t_abs2", "phase", "tau_g"),
                    default="mu")
    sw.add_argument("--stability-policy", choices=("gap", "evaluate"))
    add_io(sw)

    dl = sub.add_parser("delay", help="group delay vs pump power")
    dl.add_argument("--preset", help="delay preset name (e.g. fig8)")
    add_params(dl)
    dl.add_argument("--pmin", type=float, default=1e-4,
                    help="lowest pump power, W")
    dl.add_argument("--pmax", type=float, default=1e-2,
                    help="highest pump power, W")
    dl.add_argument("--points", type=int, default=101)
    add_io(dl)

    ff = sub.add_parser("fit-fano", help="fit a spectrum CSV to the "
                                         "asymmetric lineshape")
    ff.add_argument("--input", required=True, help="8-column spectrum CSV")
    add_params(ff)
    add_io(ff)

    oc = sub.add_parser("oracle-check",
                        help="time-domain integrator vs sideband solver")
    oc.add_argument("--n", type=int, default=20)
    oc.add_argument("--seed", type=int, default=7)
    oc.add_argument("--tolerance", type=float, default=0.01)

    pr = sub.add_parser("preset", help="list or show figure presets")
    pr.add_argument("--name", help="show this preset's resolved definition")
    return ap


def _out_path(args, default_name):
    if args.out:
        path = args.out
    else:
        outdir = args.outdir or os.environ.get("FANOCAVITY_OUTDIR") or "."
        path = os.path.join(outdir, default_name)
    side = os.path.splitext(path)[0] + ".json"
    for f in (path, side):
        if os.path.exists(f) and not args.force:
            raise ConfigError(
                "refusing to overwrite %s (use --force)" % f)
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    return path, side


def _spec_from_args(args):
    """Resolve a SweepSpec from --preset or config + axis flags."""
    if args.preset:
        spec = build_preset(args.preset)
        if args.overrides or args.config:
            raise ConfigError("--preset does not combine with --config/--set")
    else:
        params, options = load_config(args.config, args.overrides)
        spec = SweepSpec(axis1=_parse_axis(getattr(args, "axis1", None)),
                         axis2=_parse_axis(getattr(args, "axis2", None),
                                           optional=True),
                         observable=getattr(args, "observable", "mu"),
                         base=params,
                         mode=options["mode"],
                         include_counter_sideband=options[
                             "include_counter_sideband"],
                         delta=options["delta"], h=options["h"])
    if args.mode:
        spec = dc_replace(spec, mode=args.mode)
    if getattr(args, "drop_counter_sideband", False):
        spec = dc_replace(spec, include_counter_sideband=False)
    if getattr(args, "stability_policy", None):
        spec = dc_replace(spec, stability_policy=args.stability_policy)
    return spec


def _parse_axis(text, optional=False):
    from .sweep import SweepAxis
    if text is None:
        if optional:
            return None
        raise ConfigError("an axis definition is required without --preset")
    if "=" in text:
        name, vals = text.split("=", 1)
        values = tuple(float(v) for v in vals.split(","))
        return SweepAxis(name.strip(), values=values)
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError("axis syntax: name:lo:hi:n or name=v1,v2,...")
    return SweepAxis(parts[0].strip(), float(parts[1]), float(parts[2]),
                     int(parts[3]))


def _cmd_spectrum(args):
    if args.preset:
        spec = _spec_from_args(args)
        if args.points != 2001 or args.delta_min != 0.5 \
                or args.delta_max != 1.5:
            from .sweep import SweepAxis
            spec = dc_replace(spec, axis1=SweepAxis(
                "delta", args.delta_min, args.delta_max, args.points))
        panels = preset_spectrum_tables(spec)
        default_name = "%s.csv" % args.preset
        record = provenance_record(spec)
    else:
        params, options = load_config(args.config, args.overrides)
        if args.mode:
            options["mode"] = args.mode
        if args.drop_counter_sideband:
            options["include_counter_sideband"] = False
        eff = normalize(params)
        deltas = np.linspace(args.delta_min, args.delta_max, args.points)
        from .response import spectrum as full_spectrum
        table = full_spectrum(eff, deltas, options["mode"],
                              options["include_counter_sideband"],
                              options["h"])
        panels = [(None, table)]
        default_name = "spectrum.csv"
        record = {"tool": "fanocavity", "version": __version__,
                  "config": resolved_config(params, options)}

    path, side = _out_path(args, default_name)
    merged = {k: np.concatenate([tab[k] for _, tab in panels])
              for k in panels[0][1]}
    write_spectrum_csv(path, merged)
    record["panels"] = [
        {"axis2_value": v, "rows": len(tab["delta_norm"])}
        for v, tab in panels]
    if args.discrepancy:
        if args.preset:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ParameterConsistencyWarning)
                eff0 = normalize(spec.base)
            deltas0 = spec.axis1.grid()
            record["discrepancy"] = discrepancy_report(
                eff0, deltas0, spec.include_counter_sideband)
        else:
            record["discrepancy"] = discrepancy_report(
                eff, deltas, options["include_counter_sideband"])
        print(json.dumps(record["discrepancy"], sort_keys=True))
    write_provenance(side, record)
    print("wrote %s" % path)
    return 0


def _cmd_sweep(args):
    spec = _spec_from_args(args)
    result = run_sweep(spec)
    path, side = _out_path(args, "%s.csv" % (args.preset or "sweep"))
    write_grid_csv(path, result)
    write_provenance(side, result.provenance)
    print("wrote %s" % path)
    return 0


def _cmd_delay(args):
    if args.preset:
        spec = build_preset(args.preset)
        if spec.axis1.name != "P_l":
            raise ConfigError("preset %r does not sweep pump power"
                              % args.preset)
        powers = spec.axis1.grid()
        base, cal = spec.base, spec.calibration
        mode, keep = spec.mode, spec.include_counter_sideband
        h = spec.h
    else:
        params, options = load_config(args.config, args.overrides)
        powers = np.linspace(args.pmin, args.pmax, args.points)
        base, cal = params, None
        mode, keep = options["mode"], options["include_counter_sideband"]
        h = options["h"]
    if args.mode:
        mode = args.mode
    if args.drop_counter_sideband:
        keep = False
    powers, tau = delay_curve(powers, base, cal, mode, keep, h)
    path, side = _out_path(args, "%s.csv" % (args.preset or "delay"))
    write_delay_csv(path, powers, tau)
    write_provenance(side, {
        "tool": "fanocavity", "version": __version__,
        "preset": args.preset, "mode": mode,
        "include_counter_sideband": keep,
        "powers_w": powers.tolist(),
    })
    print("wrote %s" % path)
    return 0


def _cmd_fit_fano(args):
    data = np.genfromtxt(args.input, delimiter=",", names=True)
    if data.dtype.names is None or "delta_norm" not in data.dtype.names \
            or "mu" not in data.dtype.names:
        raise ConfigError("%s is not an 8-column spectrum CSV" % args.input)
    deltas = np.asarray(data["delta_norm"], dtype=float)
    mu = np.asarray(data["mu"], dtype=float)
    keep = np.isfinite(deltas) & np.isfinite(mu)
    init = None
    if args.config or args.overrides:
        params, _ = load_config(args.config, args.overrides)
        init = fano_params_from_system(normalize(params))
    report = fit_fano(deltas[keep], mu[keep], init=init)
    print(json.dumps(report, sort_keys=True))
    if args.out:
        path, _ = _out_path(args, "fit.json")
        with open(path, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    return 0


def _cmd_oracle_check(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for i in range(args.n):
        p = draw_stable_params(rng)
        delta = float(rng.uniform(0.5, 1.5))
        res = oracle_compare(p, delta)
        worst = max(worst, res["rel_error"])
        print("set %2d: delta=%.4f rel_error=%.3e"
              % (i + 1, delta, res["rel_error"]))
    print("max relative error over %d sets: %.3e" % (args.n, worst))
    if worst >= args.tolerance:
        print("FAIL: exceeds tolerance %.3g" % args.tolerance,
              file=sys.stderr)
        return 3
    return 0


def _cmd_preset(args):
    if args.name:
        spec = build_preset(args.name)
        print(json.dumps(asdict(spec), indent=2, sort_keys=True,
                         default=lambda o: getattr(o, "tolist", repr)(o)))
    else:
        for name in PRESET_NAMES:
            print(name)
    return 0


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    handlers = {
        "spectrum": _cmd_spectrum,
        "sweep": _cmd_sweep,
        "delay": _cmd_delay,
        "fit-fano": _cmd_fit_fano,
        "oracle-check": _cmd_oracle_check,
        "preset": _cmd_preset,
    }
    try:
        return handlers[args.command](args)
    except CONFIG_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    except FanocavityError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
