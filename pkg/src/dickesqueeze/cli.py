"""Command line interface.

Subcommands:

* simulate  - one run: observable trace to CSV, MSF summary to JSON/stdout
* sweep     - MSF over a parameter grid from the config's sweep section
* fig       - shipped curve presets (fig2 ... fig6)
* converge  - Fock-cutoff convergence check of the configured scenario
* report    - closed-form squeezing report for experimental parameters

Exit codes: 0 success, 1 configuration errors, 2 numerical failures
(norm drift, no valid squeezing samples, out-of-regime formulas),
3 a sweep that completed with failed points.
"""

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analytic import experiment_report
from .config import (
    canonical_json,
    config_hash,
    load_config,
    setup_from_config,
    sweep_spec,
)
from .errors import (
    ConfigError,
    DickeSqueezeError,
    InstabilityError,
    NormDriftError,
    ParameterError,
    RegimeError,
    UndefinedSpinDirectionError,
)
from .propagator import check_fock_convergence, kernel_name
from .runners import CURVES, FIGURES, run_msf, run_trace, scan_grid, xi_trace

log = logging.getLogger("dickesqueeze")

TWO_PI = 2.0 * math.pi

# Experimental parameter sets for `report`.  The quoted entries are
# commonly cited reference values for the same inputs; the report
# recomputes everything and notes disagreements instead of adopting them.
REPORT_PRESETS = {
    "rb87": {
        "delta_p": TWO_PI * 5.0e7,
        "g_d": TWO_PI * 5.0e8,
        "omega": TWO_PI * 5.0e8,
        "omega_0": TWO_PI * 2.5e3,
        "n_atoms": 100000,
        "gamma": TWO_PI * 3.0e6,
        "kappa": TWO_PI * 1.3e6,
        "quoted": {"q": TWO_PI * 2.5e8, "t_first_optimal": 0.5e-9},
    },
    # pure-ratio presets (omega_0 = 1): q = delta_p g_d^2 / (2 omega^2)
    "q1e4": {
        "delta_p": 100.0,
        "g_d": 14142.135623730951,  # sqrt(2e8), so q = 1e4 exactly
        "omega": 1000.0,
        "omega_0": 1.0,
        "n_atoms": 1000000,
    },
    "q1e3": {
        "delta_p": 100.0,
        "g_d": 4472.135954999579,  # sqrt(2e7), so q = 1e3 exactly
        "omega": 1000.0,
        "omega_0": 1.0,
        "n_atoms": 100000,
    },
}


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.11e}"
    return str(x)


def write_csv(path, cols, rows, snapshot=None):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# dickesqueeze {__version__}"]
    if snapshot is not None:
        js = canonical_json(snapshot)
        lines.append(f"# config_sha256: {config_hash(snapshot)}")
        lines.append(f"# config: {js}")
    lines.append(",".join(cols))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _add_common(sub):
    sub.add_argument("--config", help="YAML config file")
    sub.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (dotted keys, e.g. scan.horizon=30)",
    )
    sub.add_argument("--out", help="output path (file, or directory for fig)")
    sub.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    sub.add_argument("--seed", type=int, default=None, help="seed recorded in the snapshot")
    sub.add_argument("-v", "--verbose", action="store_true")


def _parse_sets(pairs):
    out = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set needs KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out.append((key.strip(), value))
    return out


def _load(args):
    cfg = load_config(args.config, _parse_sets(args.set))
    if args.seed is not None:
        cfg["seed"] = int(args.seed)
    return cfg


def cmd_simulate(args):
    cfg = _load(args)
    setup = setup_from_config(cfg)
    times, traj, xi = run_trace(setup)
    cols = ["t", "xi_sq", "db", "sx", "sy", "sz", "spin_length", "photon", "excluded"]
    rows = []
    for i, t in enumerate(times):
        x = xi[i]
        excluded = math.isnan(x)
        rows.append([
            float(t),
            x,
            math.nan if excluded or x <= 0 else -10.0 * math.log10(x),
            float(traj.means[i][0]),
            float(traj.means[i][1]),
            float(traj.means[i][2]),
            float(np.linalg.norm(traj.means[i])),
            math.nan if traj.photon is None else float(traj.photon[i]),
            excluded,
        ])
    res, meta = run_msf(setup)
    out = Path(args.out) if args.out else Path("simulate.csv")
    write_csv(out, cols, rows, snapshot=cfg)
    summary = {
        "config": cfg,
        "config_sha256": config_hash(cfg),
        "kernel": kernel_name(),
        "msf": {
            "xi_m_sq": res.xi_m_sq,
            "db": res.db,
            "t_star": res.t_star,
            "n_excluded": res.n_excluded,
            "refined": res.refined,
        },
        "meta": meta,
        "version": __version__,
    }
    write_json(out.with_suffix(".json"), summary)
    print(f"model {setup.model}: xi_M^2 = {res.xi_m_sq:.6g} ({res.db:.3f} dB) at t = {res.t_star:.6g}")
    print(f"trace -> {out}, summary -> {out.with_suffix('.json')}")
    return 0


def _sweep_point(cfg_json, param, value):
    cfg = json.loads(cfg_json)
    cfg[param] = value if param not in ("n_atoms", "fock_cutoff") else int(value)
    t0 = time.perf_counter()
    try:
        setup = setup_from_config(cfg)
        res, meta = run_msf(setup)
        record = {
            "value": value,
            "xi_m_sq": res.xi_m_sq,
            "db": res.db,
            "t_star": res.t_star,
            "status": "ok",
            "fock_cutoff": meta["fock_cutoff"],
            "horizon": meta["horizon"],
        }
    except Exception as exc:  # per-point isolation; the sweep carries on
        record = {
            "value": value,
            "xi_m_sq": math.nan,
            "db": math.nan,
            "t_star": math.nan,
            "status": f"error:{type(exc).__name__}",
            "fock_cutoff": cfg.get("fock_cutoff", -1),
            "horizon": math.nan,
        }
    record["wall_time"] = time.perf_counter() - t0
    return record


def cmd_sweep(args):
    cfg = _load(args)
    param, values = sweep_spec(cfg)
    setup_from_config(cfg)  # validate the base config before spawning workers
    cfg_json = canonical_json(cfg)
    records = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_sweep_point, cfg_json, param, v) for v in values]
            records = [f.result() for f in futures]
    else:
        records = [_sweep_point(cfg_json, param, v) for v in values]
    hash12 = config_hash(cfg)[:12]
    cols = ["parameter", "value", "xi_m_sq", "db", "t_star", "status", "fock_cutoff", "horizon", "config"]
    rows = [
        [param, r["value"], r["xi_m_sq"], r["db"], r["t_star"], r["status"],
         r["fock_cutoff"], r["horizon"], hash12]
        for r in records
    ]
    out = Path(args.out) if args.out else Path("sweep.csv")
    write_csv(out, cols, rows, snapshot=cfg)
    failed = [r for r in records if r["status"] != "ok"]
    for r in records:
        log.info("%s = %g: %s (%.2f s)", param, r["value"], r["status"], r["wall_time"])
    print(f"swept {param} over {len(values)} points -> {out}" + (f" ({len(failed)} failed)" if failed else ""))
    return 3 if failed else 0


def cmd_fig(args):
    name = args.name
    if name not in FIGURES:
        raise ConfigError(f"unknown figure preset {name!r}; choose from {sorted(FIGURES)}")
    overrides = {}
    for key, raw in _parse_sets(args.set):
        overrides[key] = yaml.safe_load(raw)
    outdir = Path(args.out) if args.out else Path("datasets")
    written = []
    for suffix, curve, base_kwargs in FIGURES[name]:
        kwargs = dict(base_kwargs)
        kwargs.update(overrides)
        cols, rows = CURVES[curve](**kwargs)
        fname = f"{name}_{suffix}.csv" if suffix else f"{name}.csv"
        snapshot = {"figure": name, "curve": curve, "kwargs": {k: list(v) if isinstance(v, tuple) else v for k, v in kwargs.items()}}
        written.append(write_csv(outdir / fname, cols, rows, snapshot=snapshot))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_converge(args):
    cfg = _load(args)
    setup = setup_from_config(cfg)
    horizon, coarse = scan_grid(setup)
    n = max(2, int(round(horizon / coarse)))
    times = np.linspace(0.0, n * coarse, n + 1)

    def run(fc):
        cfg2 = json.loads(canonical_json(cfg))
        cfg2["fock_cutoff"] = int(fc)
        return xi_trace(setup_from_config(cfg2), times)

    report = check_fock_convergence(run, setup.dims.fock_cutoff, step=args.step, tol=args.tol)
    payload = {
        "config": cfg,
        "config_sha256": config_hash(cfg),
        "fock_cutoff": report.fock_cutoff,
        "fock_cutoff_ref": report.fock_cutoff_ref,
        "max_abs_change": report.max_abs_change,
        "tol": report.tol,
        "converged": report.converged,
    }
    if args.out:
        write_json(args.out, payload)
    status = "converged" if report.converged else "NOT converged"
    print(
        f"fock_cutoff {report.fock_cutoff} vs {report.fock_cutoff_ref}: "
        f"max |d xi^2| = {report.max_abs_change:.3e} (tol {report.tol:g}) -> {status}"
    )
    return 0


def cmd_report(args):
    if args.preset:
        if args.preset not in REPORT_PRESETS:
            raise ConfigError(
                f"unknown report preset {args.preset!r}; choose from {sorted(REPORT_PRESETS)}"
            )
        kwargs = dict(REPORT_PRESETS[args.preset])
    else:
        required = ("delta_p", "g_d", "omega", "omega_0", "n_atoms")
        missing = [k for k in required if getattr(args, k) is None]
        if missing:
            raise ConfigError(
                f"report needs --preset or all of {', '.join('--' + k.replace('_', '-') for k in required)}"
            )
        kwargs = {k: getattr(args, k) for k in required}
        kwargs["n_atoms"] = int(kwargs["n_atoms"])
        if args.gamma is not None:
            kwargs["gamma"] = args.gamma
        if args.kappa is not None:
            kwargs["kappa"] = args.kappa
    rep = experiment_report(**kwargs)
    print(rep.format_text())
    if args.out:
        write_json(args.out, rep.to_dict())
        print(f"report -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dickesqueeze",
        description="Spin squeezing in the Dicke model with a modulated coupling",
    )
    parser.add_argument("--version", action="version", version=f"dickesqueeze {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run one model and write its trace")
    _add_common(sim)
    sim.set_defaults(fn=cmd_simulate)

    sw = subs.add_parser("sweep", help="MSF over a parameter grid")
    _add_common(sw)
    sw.set_defaults(fn=cmd_sweep)

    fig = subs.add_parser("fig", help="shipped curve presets")
    fig.add_argument("name", help=f"one of {sorted(FIGURES)}")
    _add_common(fig)
    fig.set_defaults(fn=cmd_fig)

    con = subs.add_parser("converge", help="Fock-cutoff convergence check")
    _add_common(con)
    con.add_argument("--step", type=int, default=5, help="cutoff increment (default 5)")
    con.add_argument("--tol", type=float, default=1e-4, help="allowed max |d xi^2|")
    con.set_defaults(fn=cmd_converge)

    rep = subs.add_parser("report", help="closed-form report for experimental parameters")
    rep.add_argument("--preset", help=f"one of {sorted(REPORT_PRESETS)}")
    rep.add_argument("--delta-p", dest="delta_p", type=float)
    rep.add_argument("--g-d", dest="g_d", type=float)
    rep.add_argument("--omega", type=float)
    rep.add_argument("--omega-0", dest="omega_0", type=float)
    rep.add_argument("--n-atoms", dest="n_atoms", type=float)
    rep.add_argument("--gamma", type=float)
    rep.add_argument("--kappa", type=float)
    rep.add_argument("--out")
    rep.add_argument("-v", "--verbose", action="store_true")
    rep.set_defaults(fn=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, InstabilityError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 1
    except (NormDriftError, UndefinedSpinDirectionError, RegimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except DickeSqueezeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
