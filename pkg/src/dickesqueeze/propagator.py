"""Time evolution for the static and driven models.

Static Hamiltonians are evolved exactly through their eigendecomposition.
The driven model uses a midpoint-exponential rule: over one step the
Hamiltonian is frozen at the midpoint time and exponentiated,

    psi <- exp(-i H(t + dt/2) dt) psi,

which is unitary by construction and second order in dt.  The steps run on
a comb locked to the drive period (plus at most two partial steps around
each sample time), so the midpoint couplings repeat every period and each
distinct (coupling, dt) pair is exponentiated once; the propagation itself
is one matrix-vector product per step.  That inner loop lives in a
compiled kernel (``_stepcore``) when available, with a numpy fallback
(``_steppy``); set DICKESQUEEZE_KERNEL=python to force the fallback.
States are never renormalized; norm drift is treated as an error.

A fixed-step RK4 integrator doubles as an independent cross-check of the
midpoint rule.  It shares no code with it beyond the Hamiltonian builders.
"""

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _steppy
from .core import SpinMoments, build_spin_ops
from .errors import HermiticityError, NormDriftError, ParameterError
from .model import bare_hamiltonian, coupling_operator

if os.environ.get("DICKESQUEEZE_KERNEL", "").lower() == "python":
    _apply_steps = _steppy.apply_step_sequence
    KERNEL = "python"
else:
    try:
        from ._stepcore import apply_step_sequence as _apply_steps

        KERNEL = "compiled"
    except ImportError:
        _apply_steps = _steppy.apply_step_sequence
        KERNEL = "python"


def kernel_name():
    """Which step kernel is active: 'compiled' or 'python'."""
    return KERNEL


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepping controls for :func:`evolve_driven`.

    ``dt = 0`` means derive the step from the drive period:
    dt = period / steps_per_drive_period.  An explicit positive ``dt``
    caps the step instead (the actual step never exceeds either bound).
    """

    dt: float = 0.0
    method: str = "midpoint"
    norm_tol: float = 1e-8
    steps_per_drive_period: int = 64
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.dt < 0:
            raise ParameterError(f"dt must be >= 0, got {self.dt}")
        if self.method not in ("midpoint", "rk4"):
            raise ParameterError(f"method must be 'midpoint' or 'rk4', got {self.method!r}")
        if self.steps_per_drive_period < 16:
            raise ParameterError(
                f"steps_per_drive_period must be >= 16, got {self.steps_per_drive_period}"
            )
        if self.norm_tol <= 0:
            raise ParameterError(f"norm_tol must be > 0, got {self.norm_tol}")


class ObservableSet:
    """Spin moments (and photon number) evaluated on raw state arrays.

    Exploits the product structure: the state is reshaped to a
    (spin_dim, boson_dim) matrix and only the small spin matrices are ever
    multiplied, so each sample costs O(dim * spin_dim) instead of O(dim^2).
    """

    def __init__(self, n_atoms, boson_dim):
        ops = build_spin_ops(n_atoms)
        self.n_atoms = n_atoms
        self.boson_dim = boson_dim
        self.spin_dim = n_atoms + 1
        self._spin_mats = (ops.sx.matrix, ops.sy.matrix, ops.sz.matrix)
        self._fock = np.arange(boson_dim, dtype=float)

    @classmethod
    def for_dims(cls, dims):
        return cls(dims.n_atoms, dims.boson_dim)

    @classmethod
    def spin_only(cls, n_atoms):
        return cls(n_atoms, 1)

    def moments_of(self, amp):
        m = amp.reshape(self.spin_dim, self.boson_dim)
        vecs = [mat @ m for mat in self._spin_mats]
        mean = np.array([np.vdot(m, v).real for v in vecs])
        cov = np.empty((3, 3))
        for i in range(3):
            for k in range(i, 3):
                cov[i, k] = cov[k, i] = np.vdot(vecs[i], vecs[k]).real - mean[i] * mean[k]
        return SpinMoments(mean, cov)

    def photon_of(self, amp):
        m = amp.reshape(self.spin_dim, self.boson_dim)
        return float(np.sum(np.abs(m) ** 2 @ self._fock))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled observables along one evolution.

    ``means[i]`` is the mean spin vector at ``times[i]``, ``covs[i]`` the
    symmetrized covariance; ``photon`` is <a^dag a> for atom-photon runs and
    None for spin-only ones.  ``states`` holds the raw state snapshots when
    they were requested.
    """

    times: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    norms: np.ndarray
    photon: Optional[np.ndarray] = None
    states: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.times)

    def moment(self, i):
        return SpinMoments(self.means[i], self.covs[i])


def _trajectory_from_states(times, states, obs, keep_states, track_photon):
    n = len(times)
    means = np.empty((n, 3))
    covs = np.empty((n, 3, 3))
    norms = np.empty(n)
    photon = np.empty(n) if track_photon else None
    for i in range(n):
        amp = states[i]
        norms[i] = np.linalg.norm(amp)
        mom = obs.moments_of(amp)
        means[i] = mom.mean
        covs[i] = mom.covariance
        if track_photon:
            photon[i] = obs.photon_of(amp)
    return Trajectory(
        times=np.asarray(times, dtype=float),
        means=means,
        covs=covs,
        norms=norms,
        photon=photon,
        states=np.array(states) if keep_states else None,
    )


def evolve_static(h, psi0, t_samples, obs=None, store_states=False):
    """Evolve under a time-independent Hamiltonian, exactly.

    Parameters
    ----------
    h : Operator
        Hermitian Hamiltonian; its eigendecomposition is computed once and
        cached on the operator.
    psi0 : StateVector
    t_samples : array of sample times (non-negative, non-decreasing).
    obs : ObservableSet, optional
        Defaults to one inferred from ``psi0.dims``.
    store_states : bool
        Keep the raw state snapshots on the returned Trajectory.
    """
    if not h.hermitian:
        raise HermiticityError("evolve_static requires a hermitian Hamiltonian")
    t_samples = _checked_times(t_samples)
    if obs is None:
        obs = ObservableSet.for_dims(psi0.dims)
    w, v = h.eig()
    c0 = v.conj().T @ psi0.amplitudes
    states = np.empty((len(t_samples), h.dim), dtype=complex)
    block = 256
    for lo in range(0, len(t_samples), block):
        ts = t_samples[lo : lo + block]
        phases = np.exp(-1j * np.outer(ts, w))
        states[lo : lo + len(ts)] = (phases * c0) @ v.T
    track_photon = obs.boson_dim > 1
    return _trajectory_from_states(t_samples, states, obs, store_states, track_photon)


def _checked_times(t_samples):
    ts = np.asarray(t_samples, dtype=float).reshape(-1)
    if len(ts) == 0:
        raise ParameterError("t_samples must be non-empty")
    if ts[0] < 0:
        raise ParameterError(f"sample times must be >= 0, got {ts[0]}")
    if np.any(np.diff(ts) < 0):
        raise ParameterError("sample times must be non-decreasing")
    return ts


def _plan(t_samples, dt_base):
    """Split [0, t_samples[-1]] into uniform sub-stepped segments (RK4 path).

    Returns (seg_t0, seg_dt, seg_count, snap_after): per-segment start
    times, local steps and step counts, plus the cumulative step index at
    which each sample is recorded.
    """
    seg_t0, seg_dt, seg_count = [], [], []
    snap_after = []
    t_prev = 0.0
    total = 0
    for t in t_samples:
        gap = t - t_prev
        if gap > 1e-12 * max(1.0, abs(t)):
            n_sub = max(1, math.ceil(gap / dt_base - 1e-9))
            seg_t0.append(t_prev)
            seg_dt.append(gap / n_sub)
            seg_count.append(n_sub)
            total += n_sub
        snap_after.append(total)
        t_prev = t
    return seg_t0, seg_dt, seg_count, np.asarray(snap_after, dtype=np.int64)


def _round_sig(x, digits=12):
    return float(f"{x:.{digits}g}")


def evolve_driven(p, drive, psi0, t_samples, cfg=None, obs=None, store_states=False):
    """Evolve the driven model from ``psi0`` and sample observables.

    Parameters
    ----------
    p : StaticParams
        Supplies delta_p and omega_0 (the static coupling ``p.g`` is not
        used; the drive replaces it).
    drive : DriveParams
    psi0 : StateVector
    t_samples : array of sample times (non-negative, non-decreasing).
    cfg : IntegratorConfig, optional
    obs, store_states : as in :func:`evolve_static`.

    Raises
    ------
    NormDriftError
        If unitarity degrades beyond ``cfg.norm_tol`` at any step.
    """
    cfg = cfg or IntegratorConfig()
    t_samples = _checked_times(t_samples)
    dims = psi0.dims
    dt_base = drive.period / cfg.steps_per_drive_period
    if cfg.dt > 0:
        dt_base = min(dt_base, cfg.dt)
    if cfg.method == "rk4":
        states = _rk4_states(p, drive, psi0, t_samples, dt_base, cfg)
    else:
        states = _midpoint_states(p, drive, psi0, t_samples, dt_base, cfg)
    if obs is None:
        obs = ObservableSet.for_dims(dims)
    track_photon = obs.boson_dim > 1
    return _trajectory_from_states(t_samples, states, obs, store_states, track_photon)


# Distinct step matrices held at once; reaching the cap executes the
# pending steps and clears the cache, so memory stays O(cap * dim^2) no
# matter how many distinct drive phases a sample grid produces.
_CACHE_CAP = 256


def _midpoint_segments(t_samples, dtb, comb_aligned):
    """Yield the step/snapshot events of a midpoint plan.

    With a period-locked step (``comb_aligned``) the integration runs on
    the global comb t = j * dtb; each inter-sample segment becomes at most
    one partial step onto the comb, whole comb cells, and one partial step
    off it.  Comb cells repeat the same drive phases every period, so
    their exponentials are shared no matter where the samples fall.

    Events: ("comb", ja, jb) for comb cells ja..jb-1, ("part", t0, t1) for
    a one-off step, ("unif", t0, dt, count) for uniform sub-stepping when
    an explicit dt breaks period alignment, and ("snap", i) after the
    steps covering sample i.
    """
    eps = 1e-9
    t_prev = 0.0
    for slot, t in enumerate(t_samples):
        gap = t - t_prev
        if gap > 1e-12 * max(1.0, abs(t)):
            if comb_aligned:
                ra = t_prev / dtb
                rb = t / dtb
                ja = math.ceil(ra - eps)
                jb = math.floor(rb + eps)
                if jb < ja:
                    yield "part", t_prev, t
                else:
                    if abs(ja - ra) >= eps:
                        yield "part", t_prev, ja * dtb
                    if jb > ja:
                        yield "comb", ja, jb
                    if abs(jb - rb) >= eps:
                        yield "part", jb * dtb, t
            else:
                n_sub = max(1, math.ceil(gap / dtb - 1e-9))
                yield "unif", t_prev, gap / n_sub, n_sub
        yield "snap", slot
        t_prev = t


class _ChunkedStepper:
    """Build step matrices on demand and apply them in bounded chunks.

    Matrices are cached by key; when the cache would exceed its cap the
    pending schedule runs through the kernel and the cache is cleared, so
    a single call never holds more than ``cap`` matrices.
    """

    def __init__(self, h0, vmat, amp0, psi0, n_snaps, norm_tol, cap=_CACHE_CAP):
        self._h0 = h0
        self._vmat = vmat
        self._amp0 = amp0
        self._psi = np.array(psi0, dtype=complex)
        self._dim = self._psi.shape[0]
        self._norm_tol = norm_tol
        self._cap = max(2, cap)
        self.out = np.empty((n_snaps, self._dim), dtype=complex)
        self._mats = []
        self._keys = {}
        self._sched = []
        self._t_ends = []
        self._snaps = []
        self._base = 0

    def snap(self, slot):
        self._snaps.append((len(self._sched), slot))

    def step(self, key, c, dt, t_end):
        idx = self._keys.get(key)
        if idx is None:
            if len(self._mats) >= self._cap:
                self._flush()
            hm = self._h0 + (self._amp0 * c) * self._vmat
            w, v = np.linalg.eigh(hm)
            self._keys[key] = idx = len(self._mats)
            self._mats.append((v * np.exp(-1j * w * dt)) @ v.conj().T)
        self._sched.append(idx)
        self._t_ends.append(t_end)

    def _flush(self):
        n = len(self._sched)
        if self._mats:
            steps = np.ascontiguousarray(self._mats, dtype=complex)
        else:
            steps = np.empty((0, self._dim, self._dim), dtype=complex)
        # release the per-matrix references so the packed copy is the only
        # live set while the kernel runs
        self._mats = []
        self._keys = {}
        sched = np.asarray(self._sched, dtype=np.int32)
        # a synthetic trailing snapshot carries the state into the next chunk
        snap_after = np.asarray([cnt for cnt, _ in self._snaps] + [n], dtype=np.int64)
        snaps, status, nrm = _apply_steps(steps, sched, snap_after, self._psi, self._norm_tol)
        if status >= 0:
            raise NormDriftError(
                self._base + status, self._t_ends[status], float(nrm), self._norm_tol
            )
        for row, (_, slot) in enumerate(self._snaps):
            self.out[slot] = snaps[row]
        self._psi = snaps[-1]
        self._base += n
        self._sched = []
        self._t_ends = []
        self._snaps = []

    def finish(self):
        self._flush()
        return self.out


def _midpoint_states(p, drive, psi0, t_samples, dt_base, cfg):
    dims = psi0.dims
    h0 = bare_hamiltonian(dims, p.delta_p, p.omega_0).matrix
    vmat = coupling_operator(dims).matrix
    amp0 = drive.g_d / math.sqrt(p.n_atoms)
    spp = cfg.steps_per_drive_period
    comb_aligned = cfg.dt == 0.0 or cfg.dt >= drive.period / spp
    dtb = drive.period / spp if comb_aligned else dt_base
    total = 0
    for ev in _midpoint_segments(t_samples, dtb, comb_aligned):
        if ev[0] == "comb":
            total += ev[2] - ev[1]
        elif ev[0] == "part":
            total += 1
        elif ev[0] == "unif":
            total += ev[3]
    if total > cfg.max_steps:
        raise ParameterError(
            f"plan needs {total} steps, above the max_steps cap {cfg.max_steps}"
        )
    stepper = _ChunkedStepper(h0, vmat, amp0, psi0.amplitudes, len(t_samples), cfg.norm_tol)
    two_pi = 2.0 * math.pi
    for ev in _midpoint_segments(t_samples, dtb, comb_aligned):
        kind = ev[0]
        if kind == "comb":
            # phase from the cell index, so repetition across periods is
            # exact by construction; rounding the cosine then also merges
            # the symmetric phase pairs within one period
            for j in range(ev[1], ev[2]):
                jm = j % spp
                c = round(math.cos(two_pi * (jm + 0.5) / spp), 12)
                stepper.step(("c", c), c, dtb, (j + 1) * dtb)
        elif kind == "part":
            t0, t1 = ev[1], ev[2]
            dtr = _round_sig(t1 - t0)
            c = round(math.cos(drive.omega * 0.5 * (t0 + t1)), 12)
            stepper.step(("t", c, dtr), c, dtr, t1)
        elif kind == "unif":
            t0, dt, count = ev[1], ev[2], ev[3]
            dtr = _round_sig(dt)
            for i in range(count):
                c = round(math.cos(drive.omega * (t0 + (i + 0.5) * dt)), 12)
                stepper.step(("t", c, dtr), c, dtr, t0 + (i + 1) * dt)
        else:
            stepper.snap(ev[1])
    return stepper.finish()


def _rk4_states(p, drive, psi0, t_samples, dt_base, cfg):
    dims = psi0.dims
    h0 = bare_hamiltonian(dims, p.delta_p, p.omega_0).matrix
    vmat = coupling_operator(dims).matrix
    amp0 = drive.g_d / math.sqrt(p.n_atoms)

    def deriv(t, psi):
        c = amp0 * math.cos(drive.omega * t)
        return -1j * (h0 @ psi + c * (vmat @ psi))

    seg_t0, seg_dt, seg_count, snap_after = _plan(t_samples, dt_base)
    if snap_after[-1] > cfg.max_steps:
        raise ParameterError(
            f"plan needs {int(snap_after[-1])} steps, above the max_steps cap {cfg.max_steps}"
        )
    psi = np.array(psi0.amplitudes, dtype=complex)
    out = np.empty((len(t_samples), len(psi)), dtype=complex)
    ptr = 0
    done = 0
    for s in range(len(snap_after)):
        while ptr < len(seg_t0) and done < snap_after[s]:
            t0, dt, count = seg_t0[ptr], seg_dt[ptr], seg_count[ptr]
            for i in range(count):
                t = t0 + i * dt
                k1 = deriv(t, psi)
                k2 = deriv(t + dt / 2.0, psi + (dt / 2.0) * k1)
                k3 = deriv(t + dt / 2.0, psi + (dt / 2.0) * k2)
                k4 = deriv(t + dt, psi + dt * k3)
                psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                done += 1
                nrm = np.linalg.norm(psi)
                # RK4 is not exactly unitary; allow the scheme's own O(dt^5)
                # drift on top of the configured tolerance
                if abs(nrm - 1.0) > max(cfg.norm_tol, 1e-6):
                    raise NormDriftError(done - 1, t + dt, float(nrm), max(cfg.norm_tol, 1e-6))
            ptr += 1
        out[s] = psi
    return out


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of a Fock-cutoff doubling check."""

    fock_cutoff: int
    fock_cutoff_ref: int
    max_abs_change: float
    tol: float

    @property
    def converged(self):
        return self.max_abs_change < self.tol


def check_fock_convergence(run, fock_cutoff, step=5, tol=1e-4):
    """Compare an observable curve at ``fock_cutoff`` and ``fock_cutoff + step``.

    ``run(fock_cutoff)`` must return a 1-D array of values on a fixed time
    grid (typically the squeezing parameter trace).  The report's
    ``converged`` flag is ``max |difference| < tol``.  NaN entries mark
    undefined samples: they agree only with NaN at the same position.
    """
    if step < 1:
        raise ParameterError(f"step must be >= 1, got {step}")
    lo = np.asarray(run(fock_cutoff), dtype=float)
    hi = np.asarray(run(fock_cutoff + step), dtype=float)
    if lo.shape != hi.shape:
        raise ParameterError("run() must return curves on a fixed grid")
    diff = np.abs(hi - lo)
    diff[np.isnan(lo) & np.isnan(hi)] = 0.0
    change = float(diff.max())
    if math.isnan(change):
        change = math.inf
    return ConvergenceReport(fock_cutoff, fock_cutoff + step, change, tol)
