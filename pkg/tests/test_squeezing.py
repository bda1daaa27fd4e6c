import math

import numpy as np
import pytest

from dickesqueeze.analytic import FrozenSpinParams, msf_analytic
from dickesqueeze.core import (
    HilbertDims,
    SpinMoments,
    StateVector,
    build_spin_ops,
    initial_state,
    moments,
)
from dickesqueeze.errors import UndefinedSpinDirectionError
from dickesqueeze.model import StaticParams, h_effective_largen
from dickesqueeze.propagator import evolve_static
from dickesqueeze.squeezing import (
    MsfResult,
    SqueezeSample,
    default_coarse_dt,
    default_horizon,
    msf_scan,
    undriven_msf_curve,
    xi_squared,
)

from conftest import random_state


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def xi_by_angle_scan(mom, n_atoms, n_angles=20000):
    """Minimize the perpendicular variance over an explicit angle grid.

    Builds the perpendicular plane by Gram-Schmidt from a fixed probe
    vector, sharing nothing with the closed-form implementation.
    """
    n0 = mom.mean / mom.spin_length
    probe = np.array([0.57, -0.31, 0.76])
    if abs(probe @ n0) > 0.99:
        probe = np.array([1.0, 0.0, 0.0])
    e1 = probe - (probe @ n0) * n0
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(n0, e1)
    best = math.inf
    for theta in np.linspace(0.0, math.pi, n_angles, endpoint=False):
        u = math.cos(theta) * e1 + math.sin(theta) * e2
        best = min(best, float(u @ mom.covariance @ u))
    return n_atoms * best / mom.spin_length**2


class FakeTrajectory:
    """Minimal stand-in exposing times and per-sample moments."""

    def __init__(self, times, moms):
        self.times = np.asarray(times, dtype=float)
        self._moms = list(moms)

    def __len__(self):
        return len(self._moms)

    def moment(self, i):
        return self._moms[i]


class TestXiSquared:
    def test_initial_state_is_shot_noise(self):
        for n in (1, 2, 10, 100):
            mom = moments(initial_state(HilbertDims(n, 0)), build_spin_ops(n))
            assert abs(xi_squared(mom, n) - 1.0) < 1e-10

    def test_matches_angle_scan_on_random_states(self, rng):
        for n in (2, 3, 5):
            ops = build_spin_ops(n)
            dims = HilbertDims(n, 0)
            for _ in range(6):
                amp = random_state(rng, n + 1)
                mom = moments(StateVector(dims, amp), ops)
                if mom.spin_length <= 1e-3 * n / 2.0:
                    continue
                xi = xi_squared(mom, n)
                brute = xi_by_angle_scan(mom, n)
                # grid minimum can only overshoot the true minimum
                assert xi <= brute + 1e-12
                assert brute - xi < 1e-5 * max(1.0, brute)

    def test_min_variance_matches_eigvalsh(self, rng):
        n = 4
        ops = build_spin_ops(n)
        dims = HilbertDims(n, 0)
        for _ in range(8):
            amp = random_state(rng, n + 1)
            mom = moments(StateVector(dims, amp), ops)
            if mom.spin_length <= 1e-3 * n / 2.0:
                continue
            n0 = mom.mean / mom.spin_length
            probe = np.array([0.3, 0.9, -0.2])
            e1 = probe - (probe @ n0) * n0
            e1 = e1 / np.linalg.norm(e1)
            e2 = np.cross(n0, e1)
            block = np.array(
                [
                    [e1 @ mom.covariance @ e1, e1 @ mom.covariance @ e2],
                    [e2 @ mom.covariance @ e1, e2 @ mom.covariance @ e2],
                ]
            )
            lam = np.linalg.eigvalsh(block)[0]
            expect = n * lam / mom.spin_length**2
            assert abs(xi_squared(mom, n) - expect) < 1e-10

    def test_rotation_invariance(self, rng):
        n = 6
        ops = build_spin_ops(n)
        dims = HilbertDims(n, 0)
        for _ in range(6):
            amp = random_state(rng, n + 1)
            mom = moments(StateVector(dims, amp), ops)
            if mom.spin_length <= 1e-3 * n / 2.0:
                continue
            xi = xi_squared(mom, n)
            rot = random_rotation(rng)
            rotated = SpinMoments(rot @ mom.mean, rot @ mom.covariance @ rot.T)
            assert abs(xi_squared(rotated, n) - xi) < 1e-9

    def test_mean_along_z_uses_fallback_basis(self):
        cov = np.diag([0.5, 2.0, 0.1])
        mom = SpinMoments(np.array([0.0, 0.0, -2.0]), cov)
        # perpendicular plane is xy; the smaller variance there is 0.5
        assert abs(xi_squared(mom, 4) - 4 * 0.5 / 4.0) < 1e-12

    def test_zero_mean_raises(self):
        mom = SpinMoments(np.zeros(3), np.eye(3))
        with pytest.raises(UndefinedSpinDirectionError):
            xi_squared(mom, 4)

    def test_threshold_scales_with_n(self):
        mom = SpinMoments(np.array([0.0, 0.0, -1e-4]), np.eye(3))
        xi_squared(mom, 2, eps_frac=1e-6)
        with pytest.raises(UndefinedSpinDirectionError):
            xi_squared(mom, 2, eps_frac=1e-3)


class TestMsfScan:
    def setup_method(self):
        n = 100
        self.n = n
        self.h = h_effective_largen(1.0, 1.0, n)
        self.psi0 = initial_state(HilbertDims(n, 0))

    def source(self, times):
        return evolve_static(self.h, self.psi0, times)

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            msf_scan(self.source, 0.0, 0.1, self.n)
        with pytest.raises(ValueError):
            msf_scan(self.source, 1.0, -0.1, self.n)

    def test_refine_never_worse(self):
        coarse = msf_scan(self.source, 6.0, 0.2, self.n, refine=False)
        fine = msf_scan(self.source, 6.0, 0.2, self.n, refine=True)
        assert not coarse.refined
        assert fine.refined
        assert fine.xi_m_sq <= coarse.xi_m_sq + 1e-15
        assert abs(fine.t_star - coarse.t_star) <= 0.2 + 1e-12
        assert len(fine.samples) > len(coarse.samples)

    def test_samples_sorted_and_finite(self):
        res = msf_scan(self.source, 6.0, 0.2, self.n)
        ts = [s.t for s in res.samples]
        assert ts == sorted(ts)
        assert res.n_excluded == 0
        assert all(np.isfinite(s.xi_sq) for s in res.samples)
        assert res.db == pytest.approx(-10 * math.log10(res.xi_m_sq))

    def test_largen_matches_frozen_spin_analytic(self):
        hor = default_horizon(1.0, 1.0)
        dt = default_coarse_dt(1.0, 1.0, horizon=hor)
        res = msf_scan(self.source, hor, dt, self.n)
        ana = msf_analytic(FrozenSpinParams(omega_0=1.0, q=1.0, n_atoms=self.n))
        assert abs(res.xi_m_sq - ana) / ana < 0.05

    def test_no_interaction_stays_at_shot_noise(self):
        n = 4
        h = h_effective_largen(1.0, 0.0, n)
        psi0 = initial_state(HilbertDims(n, 0))
        res = msf_scan(lambda ts: evolve_static(h, psi0, ts), 5.0, 0.25, n)
        assert abs(res.xi_m_sq - 1.0) < 1e-9

    def test_excluded_samples_flagged_not_dropped(self):
        good = SpinMoments(np.array([0.0, 0.0, -2.0]), np.diag([0.5, 1.0, 0.1]))
        dead = SpinMoments(np.zeros(3), np.eye(3))

        def source(times):
            return FakeTrajectory(times, [good if i % 2 == 0 else dead for i in range(len(times))])

        res = msf_scan(source, 1.0, 0.25, 4, refine=False)
        assert res.n_excluded == 2
        assert len(res.samples) == 5
        flagged = [s for s in res.samples if s.excluded]
        assert all(math.isnan(s.xi_sq) for s in flagged)
        assert np.isfinite(res.xi_m_sq)

    def test_all_excluded_raises(self):
        dead = SpinMoments(np.zeros(3), np.eye(3))

        def source(times):
            return FakeTrajectory(times, [dead] * len(times))

        with pytest.raises(UndefinedSpinDirectionError):
            msf_scan(source, 1.0, 0.25, 4, refine=False)


class TestDefaults:
    def test_horizon_static(self):
        assert default_horizon(1.0, 0.0) == pytest.approx(4 * math.pi)
        eta = math.sqrt(1.0 * (1.0 + 3.0))
        assert default_horizon(1.0, 3.0) == pytest.approx(4 * math.pi / eta)

    def test_horizon_driven_floor(self):
        # slow drive: the 20-period floor dominates
        assert default_horizon(1.0, 0.0, omega=1.0) == pytest.approx(40 * math.pi)
        # fast drive: squeezing timescale dominates
        assert default_horizon(1.0, 0.0, omega=1e3) == pytest.approx(4 * math.pi)

    def test_coarse_dt(self):
        assert default_coarse_dt(1.0, 0.0, omega=10.0) == pytest.approx(2 * math.pi / 80.0)
        assert default_coarse_dt(1.0, 0.0) == pytest.approx(math.pi / 20.0)
        assert default_coarse_dt(1.0, 0.0, omega=10.0, horizon=0.4) == pytest.approx(0.01)


class TestUndrivenCurve:
    def test_small_grid(self):
        p = StaticParams(n_atoms=4, delta_p=1.0, omega_0=1.0, g=0.0)
        dims = HilbertDims(4, 12)
        curve = undriven_msf_curve([0.5, 1.0], p, dims, horizon=40.0)
        assert [g for g, _ in curve] == [0.5, 1.0]
        for _, res in curve:
            assert isinstance(res, MsfResult)
            assert 0.0 < res.xi_m_sq < 1.0
        # moderate coupling squeezes more than weak coupling at N=4
        assert curve[1][1].xi_m_sq < curve[0][1].xi_m_sq

    def test_per_point_overrides(self):
        p = StaticParams(n_atoms=2, delta_p=1.0, omega_0=1.0, g=0.0)
        seen = []

        def dims_for(g):
            d = HilbertDims(2, 6 if g < 1 else 10)
            seen.append((g, d.fock_cutoff))
            return d

        curve = undriven_msf_curve(
            [0.5, 2.0],
            p,
            HilbertDims(2, 6),
            horizon=10.0,
            dims_for=dims_for,
            horizon_for=lambda g: 10.0 if g < 1 else 4.0,
            refine=False,
        )
        assert seen == [(0.5, 6), (2.0, 10)]
        # last sample lands within one coarse step of each point's horizon
        assert 9.0 < curve[0][1].samples[-1].t <= 10.0 + 1e-9
        assert 3.6 < curve[1][1].samples[-1].t <= 4.0 + 1e-9
