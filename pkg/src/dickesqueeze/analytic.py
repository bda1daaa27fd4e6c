"""Closed-form results in the frozen-spin (high frequency, large N) limit.

For drive frequencies far above every other scale the driven model reduces
to H_e with the one-axis-twisting strength q = Delta_p g_d^2 / (2 omega^2).
When additionally q << N omega_0 the mean spin stays frozen near the south
pole and the transverse fluctuations obey a quadrature squeezing problem
with frequency eta = sqrt(omega_0 (omega_0 + q)):

    Var S_x(t) = (N/4) [cos^2(eta t) + (omega_0^2/eta^2) sin^2(eta t)]
    Var S_y(t) = (N/4) [cos^2(eta t) + (eta^2/omega_0^2) sin^2(eta t)]

so the squeezing parameter reaches xi_M^2 = omega_0^2 / eta^2
= 1/(1 + q/omega_0) at times t_n = (2n+1) pi / (2 eta).
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, RegimeError

VALIDITY_FRAC = 0.1  # frozen-spin formulas need q below this fraction of N omega_0
HF_RATIO_MIN = 10.0  # omega must exceed this multiple of max(delta_p, omega_0)


def db(xi_sq):
    """Squeezing in decibel, -10 log10(xi^2); positive means squeezed."""
    xi_sq = np.asarray(xi_sq, dtype=float)
    if np.any(xi_sq <= 0):
        raise ParameterError("xi^2 must be > 0 to convert to dB")
    out = -10.0 * np.log10(xi_sq)
    return float(out) if out.ndim == 0 else out


def q_of(p, drive):
    """Twisting strength q = Delta_p g_d^2 / (2 omega^2) of the effective
    model derived from the given static and drive parameters."""
    return p.delta_p * drive.g_d**2 / (2.0 * drive.omega**2)


@dataclass(frozen=True)
class FrozenSpinParams:
    """Inputs of the frozen-spin formulas, with their validity check."""

    omega_0: float
    q: float
    n_atoms: int
    validity_frac: float = VALIDITY_FRAC

    def __post_init__(self):
        if self.omega_0 <= 0:
            raise ParameterError(f"omega_0 must be > 0, got {self.omega_0}")
        if self.q < 0:
            raise ParameterError(f"q must be >= 0, got {self.q}")
        if self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")

    @property
    def eta(self):
        return math.sqrt(self.omega_0 * (self.omega_0 + self.q))

    @property
    def valid(self):
        return self.q < self.validity_frac * self.n_atoms * self.omega_0

    def _require_valid(self):
        if not self.valid:
            raise RegimeError(
                f"q = {self.q:.6g} is not << N omega_0 "
                f"(threshold {self.validity_frac:g} * {self.n_atoms} * {self.omega_0:.6g}); "
                "the frozen-spin formulas do not apply"
            )


def frozen_spin_variances(fp, t):
    """(Var S_x, Var S_y) at time(s) t; requires the validity flag."""
    fp._require_valid()
    t = np.asarray(t, dtype=float)
    eta = fp.eta
    c2 = np.cos(eta * t) ** 2
    s2 = np.sin(eta * t) ** 2
    quarter = fp.n_atoms / 4.0
    var_x = quarter * (c2 + (fp.omega_0 / eta) ** 2 * s2)
    var_y = quarter * (c2 + (eta / fp.omega_0) ** 2 * s2)
    return var_x, var_y


def optimal_times(fp, count=3):
    """First ``count`` times of maximal squeezing, t_n = (2n+1) pi/(2 eta)."""
    fp._require_valid()
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    n = np.arange(count)
    return (2 * n + 1) * math.pi / (2.0 * fp.eta)


def msf_analytic(fp):
    """Frozen-spin maximal squeezing factor 1/(1 + q/omega_0).

    Independent of N except through the validity requirement.
    """
    fp._require_valid()
    return 1.0 / (1.0 + fp.q / fp.omega_0)


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Derived figures for one experimental parameter set.

    All frequencies are in the caller's (angular) units; ``notes`` lists
    any disagreement with externally quoted reference values instead of
    silently adopting them.
    """

    inputs: dict
    q: float
    eta: float
    xi_m_sq: float
    db: float
    t_first_optimal: float
    high_frequency_ok: bool
    frozen_spin_ok: bool
    atom_decay_time: Optional[float] = None
    cavity_decay_time: Optional[float] = None
    squeezing_within_decay: Optional[bool] = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "inputs": dict(self.inputs),
            "q": self.q,
            "eta": self.eta,
            "xi_m_sq": self.xi_m_sq,
            "db": self.db,
            "t_first_optimal": self.t_first_optimal,
            "flags": {
                "high_frequency_ok": self.high_frequency_ok,
                "frozen_spin_ok": self.frozen_spin_ok,
                "squeezing_within_decay": self.squeezing_within_decay,
            },
            "atom_decay_time": self.atom_decay_time,
            "cavity_decay_time": self.cavity_decay_time,
            "notes": list(self.notes),
        }

    def format_text(self):
        lines = ["experiment report"]
        for k, v in self.inputs.items():
            lines.append(f"  input {k} = {v:.6g}" if isinstance(v, float) else f"  input {k} = {v}")
        lines.append(f"  twisting strength q = {self.q:.6g}")
        lines.append(f"  squeezing frequency eta = {self.eta:.6g}")
        lines.append(f"  maximal squeezing xi_M^2 = {self.xi_m_sq:.6g} ({self.db:.1f} dB)")
        lines.append(f"  first optimal time t_0 = {self.t_first_optimal:.6g}")
        if self.atom_decay_time is not None:
            lines.append(f"  atom decay time 1/gamma = {self.atom_decay_time:.6g}")
        if self.cavity_decay_time is not None:
            lines.append(f"  cavity decay time 1/kappa = {self.cavity_decay_time:.6g}")
        lines.append(f"  flag high_frequency_ok = {self.high_frequency_ok}")
        lines.append(f"  flag frozen_spin_ok = {self.frozen_spin_ok}")
        if self.squeezing_within_decay is not None:
            lines.append(f"  flag squeezing_within_decay = {self.squeezing_within_decay}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)


def experiment_report(
    delta_p,
    g_d,
    omega,
    omega_0,
    n_atoms,
    gamma=None,
    kappa=None,
    quoted=None,
    hf_ratio_min=HF_RATIO_MIN,
    validity_frac=VALIDITY_FRAC,
):
    """Evaluate the frozen-spin predictions for one parameter set.

    Unlike :func:`msf_analytic` this never raises on regime violations; it
    reports them through the flags.  ``quoted`` may hold externally quoted
    reference values (keys ``q`` and ``t_first_optimal``); values that
    disagree with the recomputation by more than 1% produce notes.
    """
    if omega_0 <= 0 or omega <= 0:
        raise ParameterError("omega_0 and omega must be > 0")
    if delta_p < 0:
        raise ParameterError("delta_p must be >= 0")
    q = delta_p * g_d**2 / (2.0 * omega**2)
    eta = math.sqrt(omega_0 * (omega_0 + q))
    xi = 1.0 / (1.0 + q / omega_0)
    t_first = math.pi / (2.0 * eta)
    notes = []
    hf_ok = omega >= hf_ratio_min * max(delta_p, omega_0)
    if not hf_ok:
        notes.append(
            f"drive frequency {omega:.6g} is below {hf_ratio_min:g} x "
            f"max(delta_p, omega_0) = {hf_ratio_min * max(delta_p, omega_0):.6g}; "
            "the time average is not controlled"
        )
    fs_ok = q < validity_frac * n_atoms * omega_0
    if not fs_ok:
        notes.append(
            f"q = {q:.6g} is not << N omega_0 = {n_atoms * omega_0:.6g}; "
            "the frozen-spin result overestimates the squeezing"
        )
    atom_tau = None if gamma is None else 1.0 / gamma
    cavity_tau = None if kappa is None else 1.0 / kappa
    within = None
    if atom_tau is not None:
        within = t_first < atom_tau
        if not within:
            notes.append(
                f"first optimal time {t_first:.6g} exceeds the atom decay "
                f"time {atom_tau:.6g}; dissipation kicks in first"
            )
    if quoted:
        if "q" in quoted:
            ref = float(quoted["q"])
            if abs(q - ref) > 0.01 * max(abs(ref), abs(q)):
                notes.append(
                    f"quoted q = {ref:.6g} disagrees with the recomputed "
                    f"q = Delta_p g_d^2/(2 omega^2) = {q:.6g} (ratio {ref / q:.3g})"
                )
        if "t_first_optimal" in quoted:
            ref = float(quoted["t_first_optimal"])
            if abs(t_first - ref) > 0.01 * max(abs(ref), abs(t_first)):
                notes.append(
                    f"quoted optimal time = {ref:.6g} disagrees with "
                    f"pi/(2 eta) = {t_first:.6g}; note pi/(2 omega) would give "
                    f"{math.pi / (2.0 * omega):.6g}"
                )
    inputs = {
        "delta_p": float(delta_p),
        "g_d": float(g_d),
        "omega": float(omega),
        "omega_0": float(omega_0),
        "n_atoms": int(n_atoms),
    }
    if gamma is not None:
        inputs["gamma"] = float(gamma)
    if kappa is not None:
        inputs["kappa"] = float(kappa)
    return ExperimentReport(
        inputs=inputs,
        q=q,
        eta=eta,
        xi_m_sq=xi,
        db=db(xi),
        t_first_optimal=t_first,
        high_frequency_ok=hf_ok,
        frozen_spin_ok=fs_ok,
        atom_decay_time=atom_tau,
        cavity_decay_time=cavity_tau,
        squeezing_within_decay=within,
        notes=notes,
    )
