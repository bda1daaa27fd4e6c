import math

import numpy as np
import pytest

from dickesqueeze.analytic import (
    FrozenSpinParams,
    db,
    experiment_report,
    frozen_spin_variances,
    msf_analytic,
    optimal_times,
    q_of,
)
from dickesqueeze.errors import ParameterError, RegimeError
from dickesqueeze.model import DriveParams, StaticParams


class TestDb:
    def test_scalar_values(self):
        assert db(1.0) == 0.0
        assert db(0.1) == pytest.approx(10.0)
        assert db(0.5) == pytest.approx(10 * math.log10(2.0))
        assert db(2.0) == pytest.approx(-10 * math.log10(2.0))

    def test_array_input(self):
        out = db(np.array([1.0, 0.01]))
        assert out.shape == (2,)
        assert out == pytest.approx([0.0, 20.0])

    def test_nonpositive_rejected(self):
        with pytest.raises(ParameterError):
            db(0.0)
        with pytest.raises(ParameterError):
            db(np.array([0.5, -1.0]))


class TestQOf:
    def test_arithmetic(self):
        p = StaticParams(n_atoms=4, delta_p=2.0)
        drive = DriveParams(g_d=3.0, omega=4.0)
        assert q_of(p, drive) == pytest.approx(2.0 * 9.0 / 32.0)

    def test_zero_drive(self):
        p = StaticParams(n_atoms=4, delta_p=1.0)
        assert q_of(p, DriveParams(g_d=0.0, omega=5.0)) == 0.0


class TestFrozenSpinParams:
    def test_validation(self):
        with pytest.raises(ParameterError):
            FrozenSpinParams(omega_0=0.0, q=1.0, n_atoms=10)
        with pytest.raises(ParameterError):
            FrozenSpinParams(omega_0=1.0, q=-1.0, n_atoms=10)
        with pytest.raises(ParameterError):
            FrozenSpinParams(omega_0=1.0, q=1.0, n_atoms=0)

    def test_eta(self):
        fp = FrozenSpinParams(omega_0=1.0, q=3.0, n_atoms=1000)
        assert fp.eta == pytest.approx(2.0)
        assert FrozenSpinParams(omega_0=2.0, q=0.0, n_atoms=10).eta == pytest.approx(2.0)

    def test_validity_boundary_is_strict(self):
        n = 100
        assert not FrozenSpinParams(omega_0=1.0, q=0.1 * n, n_atoms=n).valid
        assert FrozenSpinParams(omega_0=1.0, q=0.1 * n * (1 - 1e-12), n_atoms=n).valid


class TestFrozenSpinVariances:
    fp = FrozenSpinParams(omega_0=1.0, q=3.0, n_atoms=1000)

    def test_initial_shot_noise(self):
        vx, vy = frozen_spin_variances(self.fp, 0.0)
        assert vx == pytest.approx(self.fp.n_atoms / 4.0)
        assert vy == pytest.approx(self.fp.n_atoms / 4.0)

    def test_extrema_at_quarter_period(self):
        t0 = math.pi / (2.0 * self.fp.eta)
        vx, vy = frozen_spin_variances(self.fp, t0)
        quarter = self.fp.n_atoms / 4.0
        ratio = (self.fp.omega_0 / self.fp.eta) ** 2
        assert vx == pytest.approx(quarter * ratio)
        assert vy == pytest.approx(quarter / ratio)

    def test_ordering_and_uncertainty_product(self):
        t = np.linspace(0.0, 10.0, 400)
        vx, vy = frozen_spin_variances(self.fp, t)
        quarter = self.fp.n_atoms / 4.0
        assert np.all(vx <= quarter * (1 + 1e-12))
        assert np.all(vy >= quarter * (1 - 1e-12))
        assert np.all(vx * vy >= quarter**2 * (1 - 1e-12))

    def test_out_of_regime_raises(self):
        bad = FrozenSpinParams(omega_0=1.0, q=100.0, n_atoms=10)
        with pytest.raises(RegimeError):
            frozen_spin_variances(bad, 0.0)


class TestOptimalTimes:
    fp = FrozenSpinParams(omega_0=1.0, q=3.0, n_atoms=1000)

    def test_values_and_spacing(self):
        ts = optimal_times(self.fp, count=3)
        assert ts == pytest.approx([math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4])
        assert np.diff(ts) == pytest.approx([math.pi / 2, math.pi / 2])

    def test_variance_is_minimal_there(self):
        ts = optimal_times(self.fp, count=4)
        vx, _ = frozen_spin_variances(self.fp, ts)
        quarter = self.fp.n_atoms / 4.0
        assert vx == pytest.approx(quarter * msf_analytic(self.fp))

    def test_count_validation(self):
        with pytest.raises(ParameterError):
            optimal_times(self.fp, count=0)


class TestMsfAnalytic:
    def test_headline_decibel_values(self):
        # q/omega_0 = 1e3 and 1e4 at atom numbers large enough for validity
        fp3 = FrozenSpinParams(omega_0=1.0, q=1.0e3, n_atoms=100_000)
        fp4 = FrozenSpinParams(omega_0=1.0, q=1.0e4, n_atoms=1_000_000)
        assert abs(db(msf_analytic(fp3)) - 30.0) < 0.01
        assert abs(db(msf_analytic(fp4)) - 40.0) < 0.01

    def test_independent_of_n(self):
        a = msf_analytic(FrozenSpinParams(omega_0=1.0, q=50.0, n_atoms=10_000))
        b = msf_analytic(FrozenSpinParams(omega_0=1.0, q=50.0, n_atoms=10_000_000))
        assert a == b

    def test_monotone_in_q(self):
        vals = [
            msf_analytic(FrozenSpinParams(omega_0=1.0, q=q, n_atoms=10**7))
            for q in (0.0, 1.0, 10.0, 100.0)
        ]
        assert vals[0] == 1.0
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_out_of_regime_raises(self):
        with pytest.raises(RegimeError):
            msf_analytic(FrozenSpinParams(omega_0=1.0, q=1.0e4, n_atoms=100))


class TestExperimentReport:
    def clean_kwargs(self):
        # q = 100 * 2e8 / (2 * 1e6) = 1e4; omega = 1000 >= 10 * 100
        return dict(
            delta_p=100.0,
            g_d=math.sqrt(2.0e8),
            omega=1000.0,
            omega_0=1.0,
            n_atoms=1_000_000,
        )

    def test_clean_regime(self):
        rep = experiment_report(**self.clean_kwargs())
        assert rep.q == pytest.approx(1.0e4)
        assert rep.high_frequency_ok
        assert rep.frozen_spin_ok
        assert rep.notes == []
        assert abs(rep.db - 40.0) < 0.01
        assert rep.t_first_optimal == pytest.approx(math.pi / (2.0 * rep.eta))
        assert rep.squeezing_within_decay is None

    def test_low_drive_frequency_flagged(self):
        kw = self.clean_kwargs()
        kw["omega"] = 500.0  # below 10 * delta_p
        rep = experiment_report(**kw)
        assert not rep.high_frequency_ok
        assert any("time average" in n for n in rep.notes)

    def test_large_q_flagged(self):
        kw = self.clean_kwargs()
        kw["n_atoms"] = 1000
        rep = experiment_report(**kw)
        assert not rep.frozen_spin_ok
        assert any("frozen-spin" in n for n in rep.notes)

    def test_decay_time_comparison(self):
        kw = self.clean_kwargs()
        slow = experiment_report(**kw, gamma=1.0e-3)
        assert slow.squeezing_within_decay is True
        fast = experiment_report(**kw, gamma=1.0e3)
        assert fast.squeezing_within_decay is False
        assert any("decay" in n for n in fast.notes)
        assert fast.atom_decay_time == pytest.approx(1.0e-3)

    def test_quoted_disagreements_reported(self):
        kw = self.clean_kwargs()
        rep = experiment_report(
            **kw,
            quoted={"q": 1.0e5, "t_first_optimal": math.pi / (2.0 * 1000.0)},
        )
        assert sum("disagrees" in n for n in rep.notes) == 2

    def test_quoted_agreement_silent(self):
        kw = self.clean_kwargs()
        base = experiment_report(**kw)
        rep = experiment_report(
            **kw,
            quoted={"q": base.q * 1.005, "t_first_optimal": base.t_first_optimal},
        )
        assert rep.notes == []

    def test_input_validation(self):
        kw = self.clean_kwargs()
        with pytest.raises(ParameterError):
            experiment_report(**{**kw, "omega_0": 0.0})
        with pytest.raises(ParameterError):
            experiment_report(**{**kw, "delta_p": -1.0})

    def test_serialization(self):
        rep = experiment_report(**self.clean_kwargs(), gamma=2.0, kappa=3.0)
        d = rep.to_dict()
        assert d["flags"]["high_frequency_ok"] is True
        assert d["atom_decay_time"] == pytest.approx(0.5)
        assert d["cavity_decay_time"] == pytest.approx(1.0 / 3.0)
        text = rep.format_text()
        assert "dB" in text
        assert "flag high_frequency_ok = True" in text
        assert "input n_atoms = 1000000" in text
