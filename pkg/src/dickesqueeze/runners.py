"""Composition layer: build a model, evolve it, scan the squeezing.

Everything the command line offers is a thin wrapper over these functions,
so library users and tests can drive identical runs without argument
parsing or file IO.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import q_of
from .core import HilbertDims, initial_state
from .errors import ConfigError
from .model import (
    DriveParams,
    StaticParams,
    h_effective,
    h_effective_largen,
    h_static,
)
from .propagator import IntegratorConfig, ObservableSet, evolve_driven, evolve_static
from .squeezing import (
    default_coarse_dt,
    default_horizon,
    msf_scan,
    xi_squared,
)

MODELS = ("static", "driven", "effective", "effective-largen")


@dataclass(frozen=True)
class ScanSettings:
    """Horizon/coarse step of an MSF scan; zeros mean auto."""

    horizon: float = 0.0
    coarse_dt: float = 0.0
    refine: bool = True


@dataclass(frozen=True)
class RunSetup:
    """One fully specified run of one model."""

    model: str
    p: StaticParams
    dims: HilbertDims
    drive: Optional[DriveParams] = None
    integrator: IntegratorConfig = IntegratorConfig()
    scan: ScanSettings = ScanSettings()

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.model != "static" and self.drive is None:
            raise ConfigError(f"model {self.model!r} needs drive parameters")


def make_source(setup, store_states=False):
    """Trajectory source ``times -> Trajectory`` for one setup."""
    model = setup.model
    if model == "effective-largen":
        q = q_of(setup.p, setup.drive)
        h = h_effective_largen(setup.p.omega_0, q, setup.p.n_atoms)
        psi0 = initial_state(HilbertDims(setup.p.n_atoms, 0))
        obs = ObservableSet.spin_only(setup.p.n_atoms)

        def source(times):
            return evolve_static(h, psi0, times, obs=obs, store_states=store_states)

        return source
    psi0 = initial_state(setup.dims)
    if model == "static":
        h = h_static(setup.p, setup.dims)
    elif model == "effective":
        h = h_effective(setup.p, setup.drive, setup.dims)
    else:
        def source(times):
            return evolve_driven(
                setup.p, setup.drive, psi0, times, setup.integrator,
                store_states=store_states,
            )

        return source

    def source(times):
        return evolve_static(h, psi0, times, store_states=store_states)

    return source


def scan_grid(setup):
    """(horizon, coarse_dt) for the setup, filling zeros with defaults."""
    q = q_of(setup.p, setup.drive) if setup.drive is not None else 0.0
    omega = setup.drive.omega if setup.model == "driven" else None
    horizon = setup.scan.horizon
    if horizon <= 0:
        horizon = default_horizon(setup.p.omega_0, q, omega)
    coarse = setup.scan.coarse_dt
    if coarse <= 0:
        coarse = default_coarse_dt(setup.p.omega_0, q, omega, horizon)
    return horizon, coarse


def run_msf(setup):
    """MSF scan of one setup; returns (MsfResult, meta dict)."""
    horizon, coarse = scan_grid(setup)
    source = make_source(setup)
    res = msf_scan(source, horizon, coarse, setup.p.n_atoms, refine=setup.scan.refine)
    meta = {
        "model": setup.model,
        "horizon": horizon,
        "coarse_dt": coarse,
        "fock_cutoff": setup.dims.fock_cutoff,
        "n_atoms": setup.p.n_atoms,
    }
    return res, meta


def run_trace(setup, times=None):
    """Full observable trace of one setup on a fixed grid.

    Returns (times, Trajectory, xi_sq array); xi is NaN where the
    squeezing direction is undefined.
    """
    if times is None:
        horizon, coarse = scan_grid(setup)
        n = max(2, int(round(horizon / coarse)))
        times = np.linspace(0.0, n * coarse, n + 1)
        times = times[times <= horizon * (1 + 1e-12)]
    source = make_source(setup)
    traj = source(times)
    xi = np.full(len(traj), math.nan)
    for i in range(len(traj)):
        try:
            xi[i] = xi_squared(traj.moment(i), setup.p.n_atoms)
        except Exception:
            pass
    return np.asarray(times, dtype=float), traj, xi


def xi_trace(setup, times):
    """Just the xi^2 curve on ``times`` (NaN where undefined)."""
    return run_trace(setup, times)[2]


# ---------------------------------------------------------------------------
# Fock-cutoff and horizon policies for the shipped curve presets.  These are
# empirical envelopes validated by the cutoff convergence check; they are
# deliberately generous for small systems and not tuned beyond N ~ 20.

def undriven_fock_cutoff(g, n_atoms, delta_p, omega_0):
    """Cutoff for the static model at coupling g on the curve preset's
    horizon policy (strong couplings run on a shortened horizon)."""
    gc = math.sqrt(delta_p * omega_0)
    r = g / gc if gc > 0 else float("inf")
    if r <= 0.75:
        n = 14 + 30 * r * r
    elif r <= 3.0:
        n = 25 + 40 * r
    else:
        # the shortened horizon (~1/g) cancels the displacement rate (~g),
        # leaving a g-independent excursion alpha ~ 1.2 N, so n ~ alpha^2
        n = 1.55 * n_atoms * n_atoms + 25
    return int(math.ceil(n))


def undriven_horizon(g, n_atoms, delta_p, omega_0, t_base):
    """Horizon for the static model at coupling g; beyond ~3x the critical
    coupling the squeezing window closes by the collapse time sqrt(2N)/g."""
    gc = math.sqrt(delta_p * omega_0)
    if gc > 0 and g > 3.0 * gc:
        return min(t_base, 1.7 * math.sqrt(2.0 * n_atoms) / g)
    return t_base


def driven_fock_cutoff(g_d, omega, n_atoms):
    """Cutoff for the driven/effective pair; the rotating-frame photon
    excursion is bounded by alpha ~ g_d sqrt(N) / (2 omega)."""
    alpha = g_d * math.sqrt(n_atoms) / (2.0 * omega)
    n_est = alpha * alpha
    return int(math.ceil(12 + 1.3 * n_est + 6.0 * alpha))


# ---------------------------------------------------------------------------
# Curve presets mirroring the figures of record.  Each returns
# (column names, rows) ready for the CSV writer.

def curve_static_vs_g(
    n_atoms=10,
    delta_p=1.0,
    omega_0=1.0,
    g_values=(0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 50.0),
    t_base=40.0,
    refine=True,
):
    """MSF of the static model against the coupling (the undriven curve)."""
    from .squeezing import undriven_msf_curve

    p = StaticParams(n_atoms=n_atoms, delta_p=delta_p, omega_0=omega_0)
    dims0 = HilbertDims(n_atoms, undriven_fock_cutoff(g_values[0], n_atoms, delta_p, omega_0))
    pairs = undriven_msf_curve(
        list(g_values),
        p,
        dims0,
        t_base,
        dims_for=lambda g: HilbertDims(n_atoms, undriven_fock_cutoff(g, n_atoms, delta_p, omega_0)),
        horizon_for=lambda g: undriven_horizon(g, n_atoms, delta_p, omega_0, t_base),
        refine=refine,
    )
    cols = ["g", "xi_m_sq", "db", "t_star", "fock_cutoff", "horizon"]
    rows = []
    for g, res in pairs:
        rows.append([
            g,
            res.xi_m_sq,
            res.db,
            res.t_star,
            undriven_fock_cutoff(g, n_atoms, delta_p, omega_0),
            undriven_horizon(g, n_atoms, delta_p, omega_0, t_base),
        ])
    return cols, rows


def _driven_setup(n_atoms, delta_p, omega_0, g_d, omega, model="driven", spp=64):
    p = StaticParams(n_atoms=n_atoms, delta_p=delta_p, omega_0=omega_0)
    drive = DriveParams(g_d=g_d, omega=omega)
    dims = HilbertDims(n_atoms, driven_fock_cutoff(g_d, omega, n_atoms))
    return RunSetup(
        model=model,
        p=p,
        dims=dims,
        drive=drive,
        integrator=IntegratorConfig(steps_per_drive_period=spp),
    )


def curve_driven_vs_gd(
    n_atoms=10,
    delta_p=1.0,
    omega_0=1.0,
    omega=10.0,
    g_d_values=(2.0, 5.0, 10.0, 15.0, 20.0),
    model="driven",
):
    """MSF of the driven (or effective) model against the drive magnitude."""
    cols = ["g_d", "xi_m_sq", "db", "t_star", "fock_cutoff"]
    rows = []
    for g_d in g_d_values:
        setup = _driven_setup(n_atoms, delta_p, omega_0, g_d, omega, model)
        res, _ = run_msf(setup)
        rows.append([g_d, res.xi_m_sq, res.db, res.t_star, setup.dims.fock_cutoff])
    return cols, rows


def curve_driven_vs_omega(
    n_atoms=10,
    delta_p=1.0,
    omega_0=1.0,
    g_d=20.0,
    omega_values=(10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0),
    model="driven",
):
    """MSF of the driven model against the drive frequency."""
    cols = ["omega", "xi_m_sq", "db", "t_star", "fock_cutoff"]
    rows = []
    for omega in omega_values:
        setup = _driven_setup(n_atoms, delta_p, omega_0, g_d, omega, model)
        res, _ = run_msf(setup)
        rows.append([omega, res.xi_m_sq, res.db, res.t_star, setup.dims.fock_cutoff])
    return cols, rows


def curve_driven_vs_effective_traces(
    n_atoms=10,
    fock_cutoff=30,
    delta_p=1.0,
    omega_0=1.0,
    omega=20.0,
    g_d_values=(5.0, 10.0, 15.0, 20.0),
):
    """xi^2(t) of the driven model and its time average, side by side."""
    cols = ["model", "g_d", "t", "xi_sq", "db"]
    rows = []
    for g_d in g_d_values:
        p = StaticParams(n_atoms=n_atoms, delta_p=delta_p, omega_0=omega_0)
        drive = DriveParams(g_d=g_d, omega=omega)
        dims = HilbertDims(n_atoms, fock_cutoff)
        for model in ("driven", "effective"):
            setup = RunSetup(model=model, p=p, dims=dims, drive=drive)
            times, _, xi = run_trace(setup)
            for t, x in zip(times, xi):
                d = -10.0 * math.log10(x) if x > 0 else math.nan
                rows.append([model, g_d, t, x, d])
    return cols, rows


def curve_frozen_spin_check(
    n_atoms=100,
    omega_0=1.0,
    q_over_n_values=(0.0, 0.01, 0.1, 1.0),
    t_max=12.0,
    n_samples=240,
):
    """2<S_z>/N over time for growing twisting strength (spin-only model)."""
    cols = ["q_over_n", "t", "sz_ratio"]
    rows = []
    times = np.linspace(0.0, t_max, n_samples + 1)
    psi0 = initial_state(HilbertDims(n_atoms, 0))
    obs = ObservableSet.spin_only(n_atoms)
    for q_over_n in q_over_n_values:
        h = h_effective_largen(omega_0, q_over_n * n_atoms, n_atoms)
        traj = evolve_static(h, psi0, times, obs=obs)
        for t, mean in zip(times, traj.means):
            rows.append([q_over_n, t, 2.0 * mean[2] / n_atoms])
    return cols, rows


def curve_largen_vs_analytic(
    n_atoms=100,
    delta_p=1.0,
    omega_0=1.0,
    omega=20.0,
    g_d_values=(5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0),
):
    """Simulated spin-only MSF against the frozen-spin closed form."""
    from .analytic import FrozenSpinParams, msf_analytic

    cols = ["g_d", "q", "xi_m_sq_sim", "xi_m_sq_analytic", "db_sim", "db_analytic"]
    rows = []
    p = StaticParams(n_atoms=n_atoms, delta_p=delta_p, omega_0=omega_0)
    for g_d in g_d_values:
        drive = DriveParams(g_d=g_d, omega=omega)
        setup = RunSetup(
            model="effective-largen", p=p, dims=HilbertDims(n_atoms, 0), drive=drive
        )
        res, _ = run_msf(setup)
        q = q_of(p, drive)
        xi_an = msf_analytic(FrozenSpinParams(omega_0, q, n_atoms))
        rows.append([
            g_d, q, res.xi_m_sq, xi_an,
            -10.0 * math.log10(res.xi_m_sq), -10.0 * math.log10(xi_an),
        ])
    return cols, rows


CURVES = {
    "static-vs-g": curve_static_vs_g,
    "driven-vs-gd": curve_driven_vs_gd,
    "driven-vs-omega": curve_driven_vs_omega,
    "driven-vs-effective": curve_driven_vs_effective_traces,
    "frozen-spin-check": curve_frozen_spin_check,
    "largen-vs-analytic": curve_largen_vs_analytic,
}

# figure presets: name -> tuple of (file suffix, curve, keyword overrides)
FIGURES = {
    "fig2": (
        ("static", "static-vs-g", {}),
        ("driven", "driven-vs-gd", {"omega": 10.0}),
    ),
    "fig3": (("", "driven-vs-omega", {}),),
    "fig4": (("", "driven-vs-effective", {}),),
    "fig5": (("", "frozen-spin-check", {}),),
    "fig6": (("", "largen-vs-analytic", {}),),
}
