"""
Configuration loading.

Sectioned key-value files ([cavity], [condensate], [drive], [mode]) with a
unit-suffix convention for rates: "_hz" means the value is a frequency in Hz
(multiplied by 2 pi into rad/s), "_wb" means units of omega_b. A flat JSON
file with the same keys is accepted too, which lets a resolved-parameter
provenance record be fed straight back in.

Keys are case-insensitive except for one collision: lowercase "delta" is
the probe detuning option (omega_b units, no suffix), while "Delta",
"delta_hz" or "delta_wb" mean the pump-cavity detuning rate.
"""

import configparser
import json
import math
from dataclasses import fields

from .errors import ConfigError
from .model import OMEGA_B_DEFAULT, SystemParams

TWO_PI = 2.0 * math.pi

# Keys carrying rad/s values, eligible for the _hz/_wb suffixes.
RATE_KEYS = ("kappa", "gamma_b", "omega_b", "Delta", "g", "U_eff", "nu",
             "omega_l", "omega_p", "Delta_c", "U0")
INT_KEYS = ("N", "M")
FLOAT_KEYS = ("P_l", "P_p", "J0", "E0", "V_cl", "U")
BOOL_KEYS = ("derive_omega_b", "include_counter_sideband")

# Run options that live beside the physical parameters.
OPTION_KEYS = ("mode", "include_counter_sideband", "delta", "h")

DEFAULT_OPTIONS = {
    "mode": "solver",
    "include_counter_sideband": True,
    "delta": 1.0,
    "h": 1e-4,
}

_CANONICAL = {k.lower(): k for k in
              RATE_KEYS + INT_KEYS + FLOAT_KEYS + BOOL_KEYS + OPTION_KEYS}


def _parse_bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError("not a boolean: %r" % s)


def _flatten_file(path) -> dict:
    """Read an ini-style or flat-JSON config into {key: string}."""
    if str(path).endswith(".json"):
        with open(path) as f:
            data = json.load(f)
        flat = {}
        for k, v in data.items():
            if isinstance(v, dict):
                flat.update({ik: iv for ik, iv in v.items()})
            else:
                flat[k] = v
        return {str(k): v for k, v in flat.items()}
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError("cannot read config file %s" % path)
    flat = {}
    for section in cp.sections():
        for k, v in cp.items(section):
            flat[k] = v
    return flat


def _split_suffix(key):
    if key.endswith("_hz"):
        return key[:-3], "hz"
    if key.endswith("_wb"):
        return key[:-3], "wb"
    return key, None


def load_config(path=None, overrides=()):
    """Build (SystemParams, options dict) from a file plus overrides.

    Overrides are "key=value" strings applied after the file in order, so
    the last duplicate wins. Keys are case-insensitive and may carry the
    _hz/_wb unit suffixes.
    """
    raw = _flatten_file(path) if path is not None else {}
    items = list(raw.items())
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError("override must be key=value: %r" % ov)
        k, v = ov.split("=", 1)
        items.append((k.strip(), v.strip()))

    # Two passes: omega_b has to be known before _wb suffixes resolve.
    entries = []
    omega_b = OMEGA_B_DEFAULT
    for key, val in items:
        base, suffix = _split_suffix(str(key).lower())
        # Keys are case-insensitive, so the cavity detuning Delta and the
        # probe detuning option delta collide. A unit suffix settles it:
        # only the cavity detuning is a rate, the probe option is always
        # in omega_b units and takes no suffix.
        if base == "delta" and (suffix is not None
                                or str(key).startswith("D")):
            entries.append(("Delta", suffix, val))
            continue
        if base not in _CANONICAL:
            raise ConfigError(
                "unknown config key %r (known: %s)"
                % (key, ", ".join(sorted(_CANONICAL.values()))))
        entries.append((_CANONICAL[base], suffix, val))
        if _CANONICAL[base] == "omega_b":
            try:
                x = float(val)
            except (TypeError, ValueError):
                raise ConfigError("bad value for %s: %r" % (key, val))
            if suffix == "hz":
                x *= TWO_PI
            elif suffix == "wb":
                raise ConfigError("omega_b cannot be given in omega_b units")
            omega_b = x

    params_kw = {"omega_b": omega_b}
    options = dict(DEFAULT_OPTIONS)
    for name, suffix, val in entries:
        try:
            if name == "mode":
                v = str(val).strip()
                if v not in ("solver", "printed"):
                    raise ConfigError("mode must be solver or printed")
                options["mode"] = v
                continue
            if name in ("delta", "h"):
                options[name] = float(val)
                continue
            if name == "include_counter_sideband":
                options[name] = _parse_bool(val)
                continue
            if name in BOOL_KEYS:
                params_kw[name] = _parse_bool(val)
                continue
            if name in INT_KEYS:
                params_kw[name] = int(val)
                continue
            x = float(val)
        except ConfigError:
            raise
        except (TypeError, ValueError):
            raise ConfigError("bad value for %s: %r" % (name, val))
        if name in RATE_KEYS:
            if suffix == "hz":
                x *= TWO_PI
            elif suffix == "wb":
                x *= omega_b
        elif suffix is not None:
            raise ConfigError("%s does not take a unit suffix" % name)
        params_kw[name] = x

    try:
        params = SystemParams(**params_kw)
        params.validate()
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    return params, options


def resolved_config(params: SystemParams, options: dict) -> dict:
    """Flat SI-valued dict that load_config accepts back unchanged."""
    out = {}
    for f in fields(SystemParams):
        v = getattr(params, f.name)
        if v is None:
            continue
        out[f.name] = v
    out.update({k: options[k] for k in OPTION_KEYS if k in options})
    return out
