"""Run configuration: YAML files, overrides, unit handling, snapshots.

Frequencies may be plain numbers, interpreted in units of the atomic
splitting omega_0, or strings with a unit suffix ("500 MHz", "2.5 kHz").
If any field carries a unit, omega_0 must carry one too; everything is
then converted to the omega_0 = 1 internal system.  Only ratios enter the
dynamics, so the absolute scale never needs to survive parsing.
"""

import copy
import hashlib
import json
import re

import yaml

from .errors import ConfigError
from .model import DriveParams, StaticParams
from .core import HilbertDims
from .propagator import IntegratorConfig
from .runners import MODELS, RunSetup, ScanSettings

DEFAULTS = {
    "model": "driven",
    "n_atoms": 10,
    "fock_cutoff": 30,
    "delta_p": 1.0,
    "omega_0": 1.0,
    "g": 0.0,
    "g_d": 0.0,
    "omega": 0.0,
    "seed": None,
    "integrator": {
        "dt": 0.0,
        "method": "midpoint",
        "norm_tol": 1.0e-8,
        "steps_per_drive_period": 64,
    },
    "scan": {
        "horizon": 0.0,
        "coarse_dt": 0.0,
        "refine": True,
    },
    "sweep": {
        "parameter": None,
        "values": [],
    },
}

FREQ_FIELDS = ("delta_p", "omega_0", "g", "g_d", "omega")
SWEEPABLE = ("g", "g_d", "omega", "delta_p", "n_atoms", "fock_cutoff")

_UNIT_HZ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_FREQ_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zA-Z]+)\s*$")


def parse_frequency(raw, where):
    """Return (value, unit_scale_or_None); unit-less input passes through."""
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw), None
    if isinstance(raw, str):
        m = _FREQ_RE.match(raw)
        if m:
            unit = m.group(2).lower()
            if unit in _UNIT_HZ:
                try:
                    return float(m.group(1)) * _UNIT_HZ[unit], 1.0
                except ValueError:
                    pass
        raise ConfigError(
            f"{where}: cannot parse frequency {raw!r} "
            "(use a number in omega_0 units, or '<number> Hz|kHz|MHz|GHz')"
        )
    raise ConfigError(f"{where}: expected a number or unit string, got {type(raw).__name__}")


def _merge(base, over, path=""):
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where} must be a mapping")
            _merge(base[key], val, where + ".")
        else:
            base[key] = val
    return base


def _apply_set(cfg, dotted, raw_value):
    value = yaml.safe_load(raw_value)
    node = cfg
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config key {dotted!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {dotted!r}")
    node[parts[-1]] = value


def load_config(path=None, sets=()):
    """Config dict from defaults, an optional YAML file and --set overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        _merge(cfg, data)
    for dotted, raw in sets:
        _apply_set(cfg, dotted, raw)
    return normalize_units(cfg)


def normalize_units(cfg):
    """Convert unit-suffixed frequencies to the omega_0 = 1 system."""
    parsed = {}
    any_unit = False
    for field in FREQ_FIELDS:
        val, unit = parse_frequency(cfg[field], field)
        parsed[field] = (val, unit)
        any_unit = any_unit or unit is not None
    if any_unit:
        ref, ref_unit = parsed["omega_0"]
        if ref_unit is None:
            raise ConfigError(
                "unit-suffixed frequencies need omega_0 given with a unit as well"
            )
        if ref <= 0:
            raise ConfigError(f"omega_0 must be > 0, got {ref}")
        for field, (val, unit) in parsed.items():
            cfg[field] = val / ref if unit is not None else val
    else:
        for field, (val, _) in parsed.items():
            cfg[field] = val
    return cfg


def canonical_json(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def setup_from_config(cfg):
    """Build the RunSetup described by a normalized config dict."""
    model = cfg["model"]
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {MODELS}")
    try:
        n_atoms = int(cfg["n_atoms"])
        fock_cutoff = int(cfg["fock_cutoff"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"n_atoms and fock_cutoff must be integers: {exc}") from exc
    p = StaticParams(
        n_atoms=n_atoms,
        delta_p=float(cfg["delta_p"]),
        omega_0=float(cfg["omega_0"]),
        g=float(cfg["g"]),
    )
    drive = None
    if model != "static":
        if not cfg["omega"] or cfg["omega"] <= 0:
            raise ConfigError(f"model {model!r} needs a positive drive frequency 'omega'")
        drive = DriveParams(g_d=float(cfg["g_d"]), omega=float(cfg["omega"]))
    dims = HilbertDims(n_atoms, 0 if model == "effective-largen" else fock_cutoff)
    integ = cfg["integrator"]
    integrator = IntegratorConfig(
        dt=float(integ["dt"]),
        method=str(integ["method"]),
        norm_tol=float(integ["norm_tol"]),
        steps_per_drive_period=int(integ["steps_per_drive_period"]),
    )
    sc = cfg["scan"]
    scan = ScanSettings(
        horizon=float(sc["horizon"]),
        coarse_dt=float(sc["coarse_dt"]),
        refine=bool(sc["refine"]),
    )
    return RunSetup(model=model, p=p, dims=dims, drive=drive, integrator=integrator, scan=scan)


def sweep_spec(cfg):
    """(parameter, values) of the sweep section, validated."""
    param = cfg["sweep"]["parameter"]
    values = cfg["sweep"]["values"]
    if param is None:
        raise ConfigError("sweep requires sweep.parameter in the config")
    if param not in SWEEPABLE:
        raise ConfigError(f"sweep.parameter must be one of {SWEEPABLE}, got {param!r}")
    if not isinstance(values, (list, tuple)) or len(values) == 0:
        raise ConfigError("sweep.values must be a non-empty list")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"sweep.values must be numeric, got {v!r}")
        out.append(float(v))
    return param, out
