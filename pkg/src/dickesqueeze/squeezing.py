"""Squeezing parameter and its minimum over a time horizon.

The squeezing parameter follows the Ramsey-interferometry convention

    xi^2 = N min_perp Var(S_perp) / |<S>|^2,

minimized over directions perpendicular to the mean spin.  xi^2 < 1 means
metrologically useful squeezing; the figure of merit of a run is the
maximal squeezing factor (MSF), the minimum of xi^2 over the horizon.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import db as _db
from .errors import UndefinedSpinDirectionError

DIRECTION_EPS_FRAC = 1e-6  # |<S>| threshold, as a fraction of N/2


def _perp_basis(n0):
    n1 = np.cross([0.0, 0.0, 1.0], n0)
    if np.linalg.norm(n1) < 1e-8:
        n1 = np.cross([1.0, 0.0, 0.0], n0)
    n1 = n1 / np.linalg.norm(n1)
    return n1, np.cross(n0, n1)


def xi_squared(mom, n_atoms, eps_frac=DIRECTION_EPS_FRAC):
    """Squeezing parameter of a state from its spin moments.

    The perpendicular plane is spanned by n1 = normalize(e_z x n0) (falling
    back to e_x x n0 when the mean spin is along z) and n2 = n0 x n1; the
    smallest perpendicular variance is the closed-form eigenvalue of the
    2x2 covariance block.  Raises :class:`UndefinedSpinDirectionError` when
    |<S>| <= eps_frac * N/2, where no squeezing direction exists.
    """
    length = mom.spin_length
    if length <= eps_frac * n_atoms / 2.0:
        raise UndefinedSpinDirectionError(
            f"mean spin length {length:.3e} below threshold "
            f"{eps_frac * n_atoms / 2.0:.3e}"
        )
    n0 = mom.mean / length
    n1, n2 = _perp_basis(n0)
    a = float(n1 @ mom.covariance @ n1)
    b = float(n2 @ mom.covariance @ n2)
    c = float(n1 @ mom.covariance @ n2)
    lam_min = 0.5 * (a + b) - math.hypot(0.5 * (a - b), c)
    return n_atoms * lam_min / length**2


@dataclass(frozen=True, eq=False)
class SqueezeSample:
    """xi^2 at one time; ``excluded`` marks samples with no defined
    squeezing direction (xi fields are NaN there)."""

    t: float
    xi_sq: float
    db: float
    spin_length: float
    excluded: bool = False


@dataclass(frozen=True, eq=False)
class MsfResult:
    """Minimum of xi^2 over a horizon, with the full sampled trace."""

    xi_m_sq: float
    t_star: float
    samples: list = field(repr=False)
    refined: bool = False
    n_excluded: int = 0

    @property
    def db(self):
        return _db(self.xi_m_sq)


def _samples_of(traj, n_atoms, eps_frac):
    out = []
    for i in range(len(traj)):
        mom = traj.moment(i)
        t = float(traj.times[i])
        try:
            xi = xi_squared(mom, n_atoms, eps_frac)
            out.append(SqueezeSample(t, xi, _db(xi), mom.spin_length))
        except UndefinedSpinDirectionError:
            out.append(SqueezeSample(t, math.nan, math.nan, mom.spin_length, excluded=True))
    return out


def msf_scan(source, t_max, coarse_dt, n_atoms, refine=True, eps_frac=DIRECTION_EPS_FRAC):
    """Minimize xi^2 over [0, t_max].

    Parameters
    ----------
    source : callable
        ``source(times) -> Trajectory``; called once with the coarse grid
        and, when refining, once more with a finer window.
    t_max, coarse_dt : float
        Horizon and coarse sample spacing.
    n_atoms : int
    refine : bool
        Re-sample a 10x finer grid around the coarse minimum; the refined
        minimum can only be lower than the coarse one.
    eps_frac : float
        Direction threshold passed to :func:`xi_squared`.

    Returns
    -------
    MsfResult
        Samples from both passes merged in time order; samples without a
        defined spin direction are flagged, not dropped.  If no sample has
        a defined direction the scan fails with
        :class:`UndefinedSpinDirectionError`.
    """
    if t_max <= 0 or coarse_dt <= 0:
        raise ValueError("t_max and coarse_dt must be > 0")
    n_coarse = max(2, int(round(t_max / coarse_dt)))
    times = np.linspace(0.0, n_coarse * coarse_dt, n_coarse + 1)
    times = times[times <= t_max * (1 + 1e-12)]
    samples = _samples_of(source(times), n_atoms, eps_frac)
    valid = [s for s in samples if not s.excluded]
    if not valid:
        raise UndefinedSpinDirectionError(
            "no sample in the horizon has a defined mean spin direction"
        )
    best = min(valid, key=lambda s: s.xi_sq)
    did_refine = False
    if refine:
        lo = max(0.0, best.t - coarse_dt)
        hi = min(t_max, best.t + coarse_dt)
        fine_dt = coarse_dt / 10.0
        n_fine = max(2, int(round((hi - lo) / fine_dt)))
        fine_times = lo + np.arange(n_fine + 1) * fine_dt
        fine_times = fine_times[fine_times <= hi * (1 + 1e-12)]
        fine = _samples_of(source(fine_times), n_atoms, eps_frac)
        samples = sorted(samples + fine, key=lambda s: s.t)
        valid = [s for s in samples if not s.excluded]
        best = min(valid, key=lambda s: s.xi_sq)
        did_refine = True
    return MsfResult(
        xi_m_sq=best.xi_sq,
        t_star=best.t,
        samples=samples,
        refined=did_refine,
        n_excluded=sum(1 for s in samples if s.excluded),
    )


def default_horizon(omega_0, q, omega=None):
    """Scan horizon: a few squeezing periods, and at least 20 drive periods
    when a drive frequency is given."""
    eta = math.sqrt(omega_0 * (omega_0 + max(q, 0.0)))
    t = 4.0 * math.pi / eta
    if omega is not None:
        t = max(t, 20.0 * 2.0 * math.pi / omega)
    return t


def default_coarse_dt(omega_0, q, omega=None, horizon=None):
    """Coarse sampling step: 8 samples per drive period for driven runs,
    else a fraction of the squeezing period."""
    if omega is not None:
        dt = (2.0 * math.pi / omega) / 8.0
    else:
        eta = math.sqrt(omega_0 * (omega_0 + max(q, 0.0)))
        dt = math.pi / (20.0 * eta)
    if horizon is not None:
        dt = min(dt, horizon / 40.0)
    return dt


def undriven_msf_curve(
    g_values,
    p,
    dims,
    horizon,
    coarse_dt=None,
    dims_for=None,
    horizon_for=None,
    refine=True,
):
    """MSF of the static model as a function of the coupling g.

    Parameters
    ----------
    g_values : iterable of float
    p : StaticParams
        Template; its ``g`` field is replaced point by point.
    dims : HilbertDims
        Default space for every point.
    horizon : float
        Default scan horizon.
    coarse_dt : float, optional
        Defaults to :func:`default_coarse_dt` per point.
    dims_for, horizon_for : callable, optional
        Per-point overrides ``g -> HilbertDims`` and ``g -> horizon``;
        strong couplings need a larger Fock cutoff but a much shorter
        horizon, so a fixed pair wastes most of the grid.

    Returns
    -------
    list of (g, MsfResult)
    """
    from .core import initial_state
    from .model import h_static
    from .propagator import evolve_static

    out = []
    for g in g_values:
        d = dims_for(g) if dims_for is not None else dims
        t_max = horizon_for(g) if horizon_for is not None else horizon
        dt = coarse_dt if coarse_dt is not None else default_coarse_dt(p.omega_0, 0.0, horizon=t_max)
        pg = replace(p, g=float(g))
        h = h_static(pg, d)
        psi0 = initial_state(d)

        def source(times, h=h, psi0=psi0):
            return evolve_static(h, psi0, times)

        out.append((float(g), msf_scan(source, t_max, dt, p.n_atoms, refine=refine)))
    return out
