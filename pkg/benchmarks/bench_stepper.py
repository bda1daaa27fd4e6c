"""Throughput comparison of the two step-application kernels.

Builds a midpoint-style workload (a comb of distinct one-step unitaries
scheduled over many drive periods) and times the numpy kernel against the
compiled one on identical inputs, checking that both return the same
snapshots.

    python3 benchmarks/bench_stepper.py --dim 256 --periods 100
"""

import argparse
import math
import time

import numpy as np

from dickesqueeze import _steppy, kernel_name

try:
    from dickesqueeze._stepcore import apply_step_sequence as compiled_kernel
except ImportError:
    compiled_kernel = None


def build_workload(dim, spp, periods, seed):
    """One period of distinct unitary steps, repeated ``periods`` times."""
    rng = np.random.default_rng(seed)
    steps = np.empty((spp, dim, dim), dtype=complex)
    for k in range(spp):
        h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (h + h.conj().T) / 2.0
        w, v = np.linalg.eigh(h)
        steps[k] = (v * np.exp(-1j * w * 0.01)) @ v.conj().T
    schedule = np.tile(np.arange(spp, dtype=np.int32), periods)
    snap_after = np.arange(0, len(schedule) + 1, spp, dtype=np.int64)
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    return steps, schedule, snap_after, psi


def time_kernel(fn, workload, repeats):
    steps, schedule, snap_after, psi = workload
    best = math.inf
    snaps = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        snaps, status, nrm = fn(steps, schedule, snap_after, psi, 1e-6)
        elapsed = time.perf_counter() - t0
        if status != -1:
            raise RuntimeError(f"norm drift at step {status}: {nrm}")
        best = min(best, elapsed)
    return best, snaps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=256, help="state dimension")
    ap.add_argument("--spp", type=int, default=64, help="distinct steps per period")
    ap.add_argument("--periods", type=int, default=100, help="periods in the schedule")
    ap.add_argument("--repeats", type=int, default=3, help="timing repeats, best kept")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    workload = build_workload(args.dim, args.spp, args.periods, args.seed)
    n_steps = len(workload[1])
    print(f"dim {args.dim}, {n_steps} steps, package kernel: {kernel_name()}")

    t_py, snaps_py = time_kernel(_steppy.apply_step_sequence, workload, args.repeats)
    print(f"python   {n_steps / t_py:12.0f} steps/s  ({t_py:.3f} s)")
    if compiled_kernel is None:
        print("compiled kernel not built; skipping")
        return
    t_c, snaps_c = time_kernel(compiled_kernel, workload, args.repeats)
    print(f"compiled {n_steps / t_c:12.0f} steps/s  ({t_c:.3f} s)")
    agree = np.abs(snaps_c - snaps_py).max()
    print(f"speedup {t_py / t_c:.2f}x, snapshot agreement {agree:.2e}")


if __name__ == "__main__":
    main()
