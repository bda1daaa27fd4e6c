"""Operators and states for a collective spin coupled to a single boson mode.

Conventions used throughout the package:

* The N two-level atoms are restricted to the maximal-spin sector j = N/2,
  a ladder of N + 1 levels.  Spin basis states are ordered by increasing
  S_z eigenvalue, index 0 <-> m = -N/2.
* The boson (cavity) mode is truncated at ``fock_cutoff``: Fock states
  |0>, ..., |n_max> and hard-truncated ladder operators.  No rescaling is
  applied near the cutoff; convergence in the cutoff has to be checked.
* Composite operators act on the Kronecker product (spin (x) boson), i.e.
  the composite index is ``spin_index * boson_dim + boson_index``.
* hbar = 1 and energies are quoted in units of the atomic splitting unless
  stated otherwise.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatchError,
    HermiticityError,
    StaleStateError,
)

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class HilbertDims:
    """Dimensions of the truncated atom-photon Hilbert space.

    ``fock_cutoff = 0`` gives a one-dimensional boson factor (vacuum only),
    which doubles as the representation of spin-only models.
    """

    n_atoms: int
    fock_cutoff: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.fock_cutoff < 0:
            raise ValueError(f"fock_cutoff must be >= 0, got {self.fock_cutoff}")

    @property
    def spin_dim(self):
        return self.n_atoms + 1

    @property
    def boson_dim(self):
        return self.fock_cutoff + 1

    @property
    def total_dim(self):
        return self.spin_dim * self.boson_dim


def _as_readonly(mat):
    out = np.ascontiguousarray(mat, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense matrix with a hermiticity tag and a cached eigendecomposition.

    The wrapped array is made read-only on construction; operators are safe
    to share between threads and processes.  When ``hermitian`` is set the
    matrix is checked against its adjoint at relative tolerance 1e-12 in the
    max norm.
    """

    matrix: np.ndarray
    hermitian: bool = False
    _eig: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        mat = _as_readonly(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatchError(f"operator matrix must be square, got {mat.shape}")
        object.__setattr__(self, "matrix", mat)
        if self.hermitian:
            scale = max(np.abs(mat).max(), 1.0)
            dev = np.abs(mat - mat.conj().T).max()
            if dev > _HERM_TOL * scale:
                raise HermiticityError(
                    f"matrix tagged hermitian deviates from its adjoint by {dev:.3e}"
                )

    @property
    def dim(self):
        return self.matrix.shape[0]

    def adjoint(self):
        if self.hermitian:
            return self
        return Operator(self.matrix.conj().T)

    def eig(self):
        """Eigendecomposition ``(w, v)``, computed once and cached.

        Hermitian operators use ``eigh`` (real ``w``, unitary ``v``); the
        general path uses ``eig`` and is only meant for diagnostics.
        """
        if not self._eig:
            if self.hermitian:
                w, v = np.linalg.eigh(self.matrix)
            else:
                w, v = np.linalg.eig(self.matrix)
            self._eig.append((w, v))
        return self._eig[0]

    def expectation(self, psi):
        amp = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
        if amp.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"state of dimension {amp.shape[0]} under operator of dimension {self.dim}"
            )
        val = np.vdot(amp, self.matrix @ amp)
        return val.real if self.hermitian else val

    def __add__(self, other):
        self._check(other)
        return Operator(self.matrix + other.matrix, hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.matrix - other.matrix, hermitian=self.hermitian and other.hermitian)

    def __mul__(self, scalar):
        s = complex(scalar)
        herm = self.hermitian and s.imag == 0.0
        return Operator(self.matrix * s, hermitian=herm)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.matrix @ other.matrix)

    def _check(self, other):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimensions {self.dim} and {other.dim} differ")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized state on a :class:`HilbertDims` space."""

    dims: HilbertDims
    amplitudes: np.ndarray
    norm_tol: float = 1e-9

    def __post_init__(self):
        amp = _as_readonly(self.amplitudes).reshape(-1)
        if amp.shape[0] != self.dims.total_dim:
            raise DimensionMismatchError(
                f"state length {amp.shape[0]} does not match total_dim {self.dims.total_dim}"
            )
        object.__setattr__(self, "amplitudes", amp)
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > self.norm_tol:
            raise StaleStateError(f"state norm {nrm:.12g} outside tolerance {self.norm_tol:g}")

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def as_matrix(self):
        """View of the amplitudes as a (spin_dim, boson_dim) array."""
        return self.amplitudes.reshape(self.dims.spin_dim, self.dims.boson_dim)


@dataclass(frozen=True)
class SpinOperators:
    """Collective spin matrices on the j = N/2 ladder (dimension N + 1)."""

    n_atoms: int
    sx: Operator
    sy: Operator
    sz: Operator
    s2: Operator


@dataclass(frozen=True)
class BosonOperators:
    """Truncated mode matrices: a, a^dag, n = a^dag a and x = a^dag + a."""

    fock_cutoff: int
    a: Operator
    adag: Operator
    number: Operator
    position: Operator


@lru_cache(maxsize=None)
def build_spin_ops(n_atoms):
    """Collective spin operators for N atoms in the symmetric sector.

    Parameters
    ----------
    n_atoms : int
        Number of two-level atoms; the ladder has j = N/2.

    Returns
    -------
    SpinOperators
        S_x, S_y, S_z and the Casimir S^2 = j(j+1) * identity, each an
        (N+1) x (N+1) :class:`Operator` in the basis of increasing m.
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    j = n_atoms / 2.0
    m = np.arange(-j, j + 1.0)
    # raising matrix element sqrt(j(j+1) - m(m+1)) on the first subdiagonal
    up = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] + 1.0))
    sp = np.diag(up, -1).astype(complex)
    sm = sp.conj().T
    sx = Operator((sp + sm) / 2.0, hermitian=True)
    sy = Operator((sp - sm) / 2.0j, hermitian=True)
    sz = Operator(np.diag(m).astype(complex), hermitian=True)
    s2 = Operator(j * (j + 1.0) * np.eye(len(m), dtype=complex), hermitian=True)
    return SpinOperators(n_atoms, sx, sy, sz, s2)


@lru_cache(maxsize=None)
def build_boson_ops(fock_cutoff):
    """Hard-truncated mode operators on Fock states |0> ... |fock_cutoff>.

    The commutator [a, a^dag] equals the identity only on the first
    ``fock_cutoff`` levels; the last diagonal entry is -fock_cutoff.  Any
    calculation has to stay clear of the cutoff for the truncation to be
    faithful.
    """
    if fock_cutoff < 0:
        raise ValueError(f"fock_cutoff must be >= 0, got {fock_cutoff}")
    n = np.arange(fock_cutoff + 1)
    a = np.diag(np.sqrt(n[1:]).astype(complex), 1)
    adag = a.conj().T
    return BosonOperators(
        fock_cutoff,
        Operator(a),
        Operator(adag),
        Operator(np.diag(n).astype(complex), hermitian=True),
        Operator(a + adag, hermitian=True),
    )


def tensor(spin_op, boson_op):
    """Kronecker product spin_op (x) boson_op as a composite Operator."""
    herm = spin_op.hermitian and boson_op.hermitian
    return Operator(np.kron(spin_op.matrix, boson_op.matrix), hermitian=herm)


@lru_cache(maxsize=None)
def composite_spin_ops(dims):
    """Spin operators lifted to the composite space (S (x) identity)."""
    ops = build_spin_ops(dims.n_atoms)
    eye = Operator(np.eye(dims.boson_dim, dtype=complex), hermitian=True)
    return SpinOperators(
        dims.n_atoms,
        tensor(ops.sx, eye),
        tensor(ops.sy, eye),
        tensor(ops.sz, eye),
        tensor(ops.s2, eye),
    )


def initial_state(dims):
    """|S_z = -N/2> (x) |vacuum>, the all-down coherent spin state."""
    amp = np.zeros(dims.total_dim, dtype=complex)
    amp[0] = 1.0
    return StateVector(dims, amp)


def operator_function(fn, op):
    """Apply a scalar function to a hermitian operator via its spectrum.

    Returns V f(diag w) V^dag using the cached eigendecomposition of ``op``,
    so repeated calls with different functions cost one matrix product each.
    """
    if not op.hermitian:
        raise HermiticityError("operator_function requires a hermitian operator")
    w, v = op.eig()
    fw = np.asarray(fn(w), dtype=complex)
    mat = (v * fw) @ v.conj().T
    herm = bool(np.all(np.abs(fw.imag) <= 1e-14 * max(1.0, np.abs(fw).max())))
    return Operator(mat, hermitian=herm)


@dataclass(frozen=True, eq=False)
class SpinMoments:
    """First and second moments of (S_x, S_y, S_z) in a pure state."""

    mean: np.ndarray       # shape (3,)
    covariance: np.ndarray  # shape (3, 3), symmetrized

    @property
    def spin_length(self):
        return float(np.linalg.norm(self.mean))

    def variance_along(self, direction):
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return float(d @ self.covariance @ d)


def moments(psi, spin_ops):
    """Mean spin vector and symmetrized covariance matrix.

    Parameters
    ----------
    psi : StateVector
        Normalized state; a norm outside the state's own tolerance raises
        :class:`StaleStateError`.
    spin_ops : SpinOperators
        Operators on the same space as ``psi`` (use
        :func:`composite_spin_ops` for atom-photon states).

    Returns
    -------
    SpinMoments
        ``mean[a] = <S_a>`` and
        ``covariance[a, b] = Re<S_a S_b> - <S_a><S_b>``.
    """
    amp = psi.amplitudes
    nrm = np.linalg.norm(amp)
    if abs(nrm - 1.0) > psi.norm_tol:
        raise StaleStateError(f"state norm {nrm:.12g} outside tolerance {psi.norm_tol:g}")
    if spin_ops.sx.dim != amp.shape[0]:
        raise DimensionMismatchError(
            f"spin operators of dimension {spin_ops.sx.dim} "
            f"against state of dimension {amp.shape[0]}"
        )
    vecs = [op.matrix @ amp for op in (spin_ops.sx, spin_ops.sy, spin_ops.sz)]
    mean = np.array([np.vdot(amp, v).real for v in vecs])
    cov = np.empty((3, 3))
    for i in range(3):
        for k in range(i, 3):
            cov[i, k] = cov[k, i] = np.vdot(vecs[i], vecs[k]).real - mean[i] * mean[k]
    return SpinMoments(mean, cov)
