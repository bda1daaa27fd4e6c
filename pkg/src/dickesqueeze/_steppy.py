"""Pure numpy implementation of the step-application kernel.

Same contract as the compiled version in ``_stepcore.pyx``; see
``propagator`` for the only caller.
"""

import numpy as np


def apply_step_sequence(steps, schedule, snap_after, psi, norm_tol):
    """Apply a sequence of precomputed one-step propagators to ``psi``.

    Parameters
    ----------
    steps : (k, d, d) complex array
        Distinct one-step propagator matrices.
    schedule : (n,) int32 array
        Index into ``steps`` for each time step, in order.
    snap_after : (m,) int64 sorted array
        Step counts after which to record the state; 0 records the initial
        state, n records the final one.
    psi : (d,) complex array
        Initial state; not modified.
    norm_tol : float
        Allowed drift |norm - 1| checked after every step.

    Returns
    -------
    (snapshots, status, norm) : ((m, d) complex array, int, float)
        ``status`` is -1 on success, else the index of the first step whose
        result violated the norm tolerance (``norm`` is its norm).
    """
    cur = np.array(psi, dtype=complex)
    snaps = np.zeros((len(snap_after), cur.shape[0]), dtype=complex)
    ptr = 0
    m = len(snap_after)
    for j in range(len(schedule)):
        while ptr < m and snap_after[ptr] == j:
            snaps[ptr] = cur
            ptr += 1
        cur = steps[schedule[j]] @ cur
        nrm = np.linalg.norm(cur)
        if abs(nrm - 1.0) > norm_tol:
            return snaps, j, float(nrm)
    while ptr < m and snap_after[ptr] == len(schedule):
        snaps[ptr] = cur
        ptr += 1
    return snaps, -1, 1.0
