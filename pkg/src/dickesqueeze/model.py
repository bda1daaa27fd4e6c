"""Hamiltonians for the Dicke model with a cosine-modulated coupling.

The family of models, all on the space described by
:class:`~dickesqueeze.core.HilbertDims`:

* static:       H = Delta_p a^dag a + omega_0 S_z + (g/sqrt(N)) (a^dag + a) S_x
* driven:       same with g -> g_d cos(omega t)
* transformed:  the driven model conjugated by
                U(t) = exp[-i chi sin(omega t) (a^dag + a) S_x],
                chi = g_d / (omega sqrt(N)), which removes the drive term
                and dresses the atomic splitting
* effective:    the time average of the transformed model (the n = 0
                Fourier component), valid at high drive frequency
* effective, large N:  spin-only limit omega_0 S_z + (q/N) S_x^2 with
                q = Delta_p g_d^2 / (2 omega^2)

Frequencies are in units of the atomic splitting omega_0 unless the caller
chooses otherwise; only ratios enter the dynamics.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import j0, j1

from .core import (
    HilbertDims,
    Operator,
    build_boson_ops,
    build_spin_ops,
    operator_function,
    tensor,
)
from .errors import (
    InstabilityError,
    ParameterError,
    UnsupportedFourierOrderError,
)


@dataclass(frozen=True)
class StaticParams:
    """Parameters of the static model; ``g = 0`` leaves the bare Hamiltonian
    shared by the driven variants."""

    n_atoms: int
    delta_p: float
    omega_0: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.omega_0 <= 0:
            raise ParameterError(f"omega_0 must be > 0, got {self.omega_0}")
        if self.delta_p < 0:
            raise InstabilityError(
                f"delta_p = {self.delta_p} < 0 puts the model in the unstable regime"
            )
        if self.g < 0:
            raise ParameterError(f"g must be >= 0, got {self.g}")


@dataclass(frozen=True)
class DriveParams:
    """Cosine drive of the coupling: g(t) = g_d cos(omega t)."""

    g_d: float
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ParameterError(f"omega must be > 0, got {self.omega}")
        if self.g_d < 0:
            raise ParameterError(f"g_d must be >= 0, got {self.g_d}")

    @property
    def period(self):
        return 2.0 * np.pi / self.omega

    def chi(self, n_atoms):
        """Dimensionless modulation depth g_d / (omega sqrt(N)).

        Always recomputed from g_d and omega so it cannot go stale.
        """
        return self.g_d / (self.omega * np.sqrt(n_atoms))


@dataclass(frozen=True)
class MicroscopicParams:
    """Raw four-level scheme parameters before adiabatic elimination.

    Two Raman channels: the cavity photon drives |G1> <-> |1> and
    |G2> <-> |2> (couplings g1, g2), the classical lasers drive the cross
    transitions with Rabi frequencies rabi_1, rabi_2; detunings delta_1,
    delta_2.  delta_c is the effective cavity detuning and omega_b,
    omega_b_prime set the two-photon splitting.
    """

    n_atoms: int
    delta_c: float
    omega_b: float
    omega_b_prime: float
    g1: float
    g2: float
    rabi_1: float
    rabi_2: float
    delta_1: float
    delta_2: float

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.delta_1 == 0 or self.delta_2 == 0:
            raise ParameterError("detunings delta_1, delta_2 must be nonzero")


_BALANCE_RTOL = 1e-6


def from_microscopic(mp):
    """Reduce the four-level scheme to :class:`StaticParams`.

    Requires the two Raman channels balanced,

        g1^2 / delta_1 = g2^2 / delta_2,
        g1 rabi_1 / delta_1 = g2 rabi_2 / delta_2,

    each to relative tolerance 1e-6.  The reduced parameters are

        delta_p = delta_c + N g1^2 / delta_1,
        omega_0 = omega_b - omega_b_prime,
        g       = sqrt(N) g1 rabi_1 / delta_1.

    Raises :class:`InstabilityError` for delta_p < 0 and
    :class:`ParameterError` for unbalanced channels or omega_0 <= 0.
    """
    lhs = mp.g1**2 / mp.delta_1
    rhs = mp.g2**2 / mp.delta_2
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if abs(lhs - rhs) > _BALANCE_RTOL * scale:
        raise ParameterError(
            f"dispersive shifts unbalanced: g1^2/delta_1 = {lhs:.9g} "
            f"vs g2^2/delta_2 = {rhs:.9g}"
        )
    lhs = mp.g1 * mp.rabi_1 / mp.delta_1
    rhs = mp.g2 * mp.rabi_2 / mp.delta_2
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if abs(lhs - rhs) > _BALANCE_RTOL * scale:
        raise ParameterError(
            f"Raman rates unbalanced: g1*rabi_1/delta_1 = {lhs:.9g} "
            f"vs g2*rabi_2/delta_2 = {rhs:.9g}"
        )
    delta_p = mp.delta_c + mp.n_atoms * mp.g1**2 / mp.delta_1
    if delta_p < 0:
        raise InstabilityError(
            f"reduced delta_p = {delta_p:.9g} < 0; the collective mode is unstable"
        )
    omega_0 = mp.omega_b - mp.omega_b_prime
    if omega_0 <= 0:
        raise ParameterError(f"reduced omega_0 = {omega_0:.9g} must be > 0")
    # the sign of g is a gauge choice (absorb it into S_x -> -S_x)
    g = abs(np.sqrt(mp.n_atoms) * mp.g1 * mp.rabi_1 / mp.delta_1)
    return StaticParams(n_atoms=mp.n_atoms, delta_p=delta_p, omega_0=omega_0, g=g)


@lru_cache(maxsize=None)
def coupling_operator(dims):
    """(a^dag + a) S_x on the composite space, the operator the drive
    multiplies."""
    sx = build_spin_ops(dims.n_atoms).sx
    x = build_boson_ops(dims.fock_cutoff).position
    return tensor(sx, x)


@lru_cache(maxsize=None)
def bare_hamiltonian(dims, delta_p, omega_0):
    """Delta_p a^dag a + omega_0 S_z, the coupling-free part."""
    ops = build_spin_ops(dims.n_atoms)
    bos = build_boson_ops(dims.fock_cutoff)
    eye_s = Operator(np.eye(dims.spin_dim, dtype=complex), hermitian=True)
    eye_b = Operator(np.eye(dims.boson_dim, dtype=complex), hermitian=True)
    return delta_p * tensor(eye_s, bos.number) + omega_0 * tensor(ops.sz, eye_b)


def h_static(p, dims):
    """Static Hamiltonian with constant coupling ``p.g``."""
    h = bare_hamiltonian(dims, p.delta_p, p.omega_0)
    if p.g != 0.0:
        h = h + (p.g / np.sqrt(p.n_atoms)) * coupling_operator(dims)
    return Operator(h.matrix, hermitian=True)


def g_of_t(drive, t):
    """Instantaneous coupling g_d cos(omega t)."""
    return drive.g_d * np.cos(drive.omega * np.asarray(t))


def h_driven(p, drive, t, dims):
    """Driven Hamiltonian at time ``t``; the ``g`` field of ``p`` is ignored."""
    h = bare_hamiltonian(dims, p.delta_p, p.omega_0)
    amp = g_of_t(drive, t) / np.sqrt(p.n_atoms)
    return Operator(h.matrix + amp * coupling_operator(dims).matrix, hermitian=True)


@lru_cache(maxsize=None)
def _coupling_eig(dims):
    # eigensystem of S_x (x) x built from the factor eigensystems
    ws, vs = build_spin_ops(dims.n_atoms).sx.eig()
    wb, vb = build_boson_ops(dims.fock_cutoff).position.eig()
    return np.kron(ws, wb), np.kron(vs, vb)


def rotating_unitary(drive, t, dims):
    """Frame transformation U(t) = exp[-i chi sin(omega t) (a^dag + a) S_x]."""
    theta = drive.chi(dims.n_atoms) * np.sin(drive.omega * t)
    w, v = _coupling_eig(dims)
    u = (v * np.exp(-1j * theta * w)) @ v.conj().T
    return Operator(u)


def h_transformed(p, drive, t, dims):
    """Driven Hamiltonian in the rotating frame of :func:`rotating_unitary`.

    The drive term is cancelled exactly by -i U^dag dU/dt; what remains is

        Delta_p a^dag a
        + Delta_p theta i (a - a^dag) S_x + Delta_p theta^2 S_x^2
        + omega_0 [ S_z cos(theta x) + S_y sin(theta x) ]

    with theta = chi sin(omega t) and x = a^dag + a.  Exact on the full
    Fock space; under a hard truncation the identity holds away from the
    cutoff (guard levels absorb the boundary error).
    """
    ops = build_spin_ops(dims.n_atoms)
    bos = build_boson_ops(dims.fock_cutoff)
    theta = drive.chi(dims.n_atoms) * np.sin(drive.omega * t)
    eye_s = Operator(np.eye(dims.spin_dim, dtype=complex), hermitian=True)
    eye_b = Operator(np.eye(dims.boson_dim, dtype=complex), hermitian=True)
    curr = Operator(1j * (bos.a.matrix - bos.adag.matrix), hermitian=True)
    cos_tx = operator_function(lambda w: np.cos(theta * w), bos.position)
    sin_tx = operator_function(lambda w: np.sin(theta * w), bos.position)
    sx2 = Operator(ops.sx.matrix @ ops.sx.matrix, hermitian=True)
    h = (
        p.delta_p * tensor(eye_s, bos.number)
        + (p.delta_p * theta) * tensor(ops.sx, curr)
        + (p.delta_p * theta**2) * tensor(sx2, eye_b)
        + p.omega_0 * tensor(ops.sz, cos_tx)
        + p.omega_0 * tensor(ops.sy, sin_tx)
    )
    return Operator(h.matrix, hermitian=True)


def h_effective(p, drive, dims):
    """High-frequency effective Hamiltonian (time average of the rotating
    frame):

        H_e = Delta_p a^dag a + omega_0 S_z J_0(chi x) + (q/N) S_x^2,

    with q = Delta_p g_d^2 / (2 omega^2).
    """
    ops = build_spin_ops(dims.n_atoms)
    bos = build_boson_ops(dims.fock_cutoff)
    chi = drive.chi(dims.n_atoms)
    q = p.delta_p * drive.g_d**2 / (2.0 * drive.omega**2)
    eye_s = Operator(np.eye(dims.spin_dim, dtype=complex), hermitian=True)
    eye_b = Operator(np.eye(dims.boson_dim, dtype=complex), hermitian=True)
    j0_x = operator_function(lambda w: j0(chi * w), bos.position)
    sx2 = Operator(ops.sx.matrix @ ops.sx.matrix, hermitian=True)
    h = (
        p.delta_p * tensor(eye_s, bos.number)
        + p.omega_0 * tensor(ops.sz, j0_x)
        + (q / p.n_atoms) * tensor(sx2, eye_b)
    )
    return Operator(h.matrix, hermitian=True)


def h_effective_largen(omega_0, q, n_atoms):
    """Spin-only effective Hamiltonian omega_0 S_z + (q/N) S_x^2.

    The photon-dressing of the splitting, J_0(chi x), is replaced by 1,
    which is the leading order in 1/N at fixed q.  Acts on the bare spin
    ladder (dimension N + 1).
    """
    ops = build_spin_ops(n_atoms)
    sx2 = ops.sx.matrix @ ops.sx.matrix
    return Operator(omega_0 * ops.sz.matrix + (q / n_atoms) * sx2, hermitian=True)


def fourier_component(n, p, drive, dims):
    """Closed-form Fourier component h_n of the rotating-frame Hamiltonian.

    h_0 is the effective Hamiltonian; for n = +-1

        h_n = n [Delta_p g_d / (2 sqrt(N) omega)] (a - a^dag) S_x
              - i n omega_0 J_1(chi x) S_y,

    an anti-hermitian pair with h_{-1} = h_1^dag.  Components with |n| >= 2
    have no closed form here; use :func:`fourier_quadrature` to probe them.
    """
    if n == 0:
        ops = build_spin_ops(dims.n_atoms)
        bos = build_boson_ops(dims.fock_cutoff)
        chi = drive.chi(dims.n_atoms)
        eye_s = Operator(np.eye(dims.spin_dim, dtype=complex), hermitian=True)
        eye_b = Operator(np.eye(dims.boson_dim, dtype=complex), hermitian=True)
        j0_x = operator_function(lambda w: j0(chi * w), bos.position)
        sx2 = Operator(ops.sx.matrix @ ops.sx.matrix, hermitian=True)
        h = (
            p.delta_p * tensor(eye_s, bos.number)
            + (p.delta_p * chi**2 / 2.0) * tensor(sx2, eye_b)
            + p.omega_0 * tensor(ops.sz, j0_x)
        )
        return Operator(h.matrix, hermitian=True)
    if n in (1, -1):
        ops = build_spin_ops(dims.n_atoms)
        bos = build_boson_ops(dims.fock_cutoff)
        chi = drive.chi(dims.n_atoms)
        coeff = n * p.delta_p * drive.g_d / (2.0 * np.sqrt(dims.n_atoms) * drive.omega)
        j1_x = operator_function(lambda w: j1(chi * w), bos.position)
        curr = Operator(bos.a.matrix - bos.adag.matrix)
        mat = coeff * np.kron(ops.sx.matrix, curr.matrix)
        mat = mat - 1j * n * p.omega_0 * np.kron(ops.sy.matrix, j1_x.matrix)
        return Operator(mat)
    raise UnsupportedFourierOrderError(
        f"no closed form for Fourier order n = {n}; only n in {{-1, 0, 1}}"
    )


def fourier_quadrature(n, p, drive, dims, nodes=128):
    """Fourier component of the rotating-frame Hamiltonian by quadrature.

    Averages h_transformed(t) e^(-i n omega t) over one drive period on a
    uniform grid (periodic trapezoid rule, spectrally accurate).  Works for
    any integer ``n``; intended as a slow cross-check of
    :func:`fourier_component`.
    """
    if nodes < 16:
        raise ParameterError(f"nodes must be >= 16, got {nodes}")
    period = drive.period
    acc = np.zeros((dims.total_dim, dims.total_dim), dtype=complex)
    for k in range(nodes):
        t = k * period / nodes
        acc += h_transformed(p, drive, t, dims).matrix * np.exp(-1j * n * drive.omega * t)
    return Operator(acc / nodes)


@lru_cache(maxsize=None)
def parity_operator(dims):
    """Excitation parity (-1)^(s + k), s the spin index from the bottom
    rung and k the Fock index.  Commutes with every model in the family."""
    ps = (-1.0) ** np.arange(dims.spin_dim)
    pb = (-1.0) ** np.arange(dims.boson_dim)
    return Operator(np.diag(np.kron(ps, pb)).astype(complex), hermitian=True)
