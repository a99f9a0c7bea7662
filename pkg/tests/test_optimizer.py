import numpy as np
import pytest

from relay_beamform.optimizer import (BeamStatus, SolverSettings, grid_oracle, maximize_min_sinr,
                                      power_limited_bound, upper_bound_gamma)
from relay_beamform.scenario import ChannelSet, ScenarioConfig, sample_channels
from relay_beamform.signal_model import forms_for, pu_interference, sinr_all

from conftest import db, hand_config, ones_channels


def instance(seed, R=6, pairs=2, I_p_db=-5.0, P_t_db=10.0):
    cfg = ScenarioConfig(R=R, M=pairs, N=pairs, P_p=db(5), P_s=db(5), I_p=db(I_p_db),
                         P_t=db(P_t_db), seed=seed)
    return cfg, forms_for(cfg, sample_channels(cfg))


def single_relay_optimum(forms, I_p, P_t):
    """Scalar calculus: SINR(a) = a s / (a i + c) grows with a = |w|^2, so take the largest a."""
    s, i, p = (np.real(forms.Q_sig[0, 0, 0]), np.real(forms.Q_in[0, 0, 0]),
               np.real(forms.D_pu[0, 0]))
    a = min(P_t, I_p / p)
    return a * s / (a * i + forms.c[0]), a


class TestBounds:
    def test_hand(self):
        f = forms_for(hand_config(), ones_channels())
        assert upper_bound_gamma(f, 3.0) == pytest.approx(1.0, rel=1e-14)

    def test_no_signal_path(self):
        cfg = ScenarioConfig(R=3, M=2, N=2, P_p=1, P_s=1, seed=1)
        ch = sample_channels(cfg)
        Hhat = np.array(ch.Hhat)
        Hhat[0] = 0
        f = forms_for(cfg, ChannelSet(H=ch.H, g=ch.g, Hhat=Hhat, ghat=ch.ghat))
        assert upper_bound_gamma(f, 5.0) == 0.0
        sol = maximize_min_sinr(f, 1.0, 5.0)
        assert sol.gamma_star == 0.0 and np.all(sol.w == 0)
        assert sol.status is BeamStatus.CONVERGED

    def test_linear_in_budget(self):
        _, f = instance(3)
        assert upper_bound_gamma(f, 8.0) == pytest.approx(2 * upper_bound_gamma(f, 4.0), rel=1e-14)

    def test_bounds_dominate_optimum(self):
        for seed in range(10):
            cfg, f = instance(seed)
            sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t)
            assert power_limited_bound(f, cfg.P_t) <= upper_bound_gamma(f, cfg.P_t) * (1 + 1e-12)
            assert sol.gamma_star <= power_limited_bound(f, cfg.P_t) * (1 + 1e-9)


class TestClosedForm:
    def test_power_limited(self):
        f = forms_for(hand_config(), ones_channels())
        sol = maximize_min_sinr(f, 2.0, 3.0)
        assert sol.gamma_star == pytest.approx(1 / 3, abs=1e-4)
        assert abs(sol.w[0]) ** 2 == pytest.approx(3.0, rel=1e-3)
        assert sol.pu_interference == pytest.approx(2.0, rel=1e-3)

    def test_interference_limited(self):
        f = forms_for(hand_config(I_p=0.5), ones_channels())
        sol = maximize_min_sinr(f, 0.5, 3.0)
        assert sol.gamma_star == pytest.approx(1 / 6, abs=1e-4)
        assert sol.total_power == pytest.approx(0.75, rel=1e-3)

    def test_random_single_relay(self):
        for seed in range(10):
            cfg, f = instance(seed, R=1, pairs=1, I_p_db=-3.0)
            gamma0, _ = single_relay_optimum(f, cfg.I_p, cfg.P_t)
            sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t)
            assert sol.gamma_star == pytest.approx(gamma0, rel=2e-4)


class TestBisection:
    def test_bracket_invariants(self):
        for seed in range(5):
            cfg, f = instance(seed, pairs=3)
            settings = SolverSettings()
            sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t, settings)
            assert sol.status is BeamStatus.CONVERGED
            los = [lo for lo, _ in sol.trace]
            his = [hi for _, hi in sol.trace]
            assert all(b >= a for a, b in zip(los, los[1:]))
            assert all(b <= a for a, b in zip(his, his[1:]))
            widths = [hi - lo for lo, hi in sol.trace]
            assert all(b <= 0.5 * a * (1 + 1e-12) for a, b in zip(widths, widths[1:]))
            lo, hi = sol.bracket
            assert hi - lo <= settings.tol_gamma_rel * hi
            assert sol.is_sound(cfg.I_p, cfg.P_t)
            np.testing.assert_allclose(sol.sinr_per_rx, sinr_all(sol.w, f))
            assert sol.pu_interference == pytest.approx(pu_interference(sol.w, f))

    def test_step_cap(self):
        cfg, f = instance(7)
        sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(max_bisection=3))
        assert sol.bisection_steps == 3

    def test_solver_failure_reported(self):
        cfg, f = instance(8)
        sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(max_iter=1))
        assert sol.status is BeamStatus.SOLVER_FAILURE
        assert sol.failed_gamma is not None and sol.failed_gamma > 0

    def test_settings_validated(self):
        with pytest.raises(ValueError):
            SolverSettings(tol_gamma_rel=0.0)

    def test_anchor_irrelevant_for_one_receiver(self):
        tight = dict(tol_gamma_rel=1e-9)
        for seed in range(5):
            cfg, f = instance(seed, R=4, pairs=1)
            a = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(anchor=0, **tight))
            b = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(anchor=None, **tight))
            assert a.gamma_star == pytest.approx(b.gamma_star, rel=1e-6)

    def test_anchor_only_restricts(self):
        # pinning the phase to one receiver shrinks the feasible set when N >= 2
        for seed in range(5):
            cfg, f = instance(seed, pairs=3)
            a = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(anchor=0))
            b = maximize_min_sinr(f, cfg.I_p, cfg.P_t, SolverSettings(anchor=None))
            assert b.bracket[1] >= a.bracket[0] * (1 - 1e-4)


class TestOracle:
    def test_hand(self):
        f = forms_for(hand_config(), ones_channels())
        gamma, w = grid_oracle(f, 2.0, 3.0, n_samples=1000, seed=0)
        assert gamma == pytest.approx(1 / 3, rel=0.01)
        assert abs(w[0]) ** 2 <= 3.0 * (1 + 1e-12)

    def test_points_feasible(self):
        for seed in range(5):
            cfg, f = instance(seed, R=3, pairs=2)
            gamma, w = grid_oracle(f, cfg.I_p, cfg.P_t, n_samples=20_000, seed=seed)
            assert np.any(w != 0)
            assert np.vdot(w, w).real <= cfg.P_t * (1 + 1e-12)
            assert pu_interference(w, f) <= cfg.I_p * (1 + 1e-12)
            assert sinr_all(w, f).min() == pytest.approx(gamma, rel=1e-12)

    def test_single_receiver_agreement(self):
        for seed in range(3):
            cfg, f = instance(seed, R=2, pairs=1)
            sol = maximize_min_sinr(f, cfg.I_p, cfg.P_t)
            gamma, _ = grid_oracle(f, cfg.I_p, cfg.P_t, n_samples=200_000, seed=seed)
            assert sol.gamma_star * 0.98 <= gamma <= sol.gamma_star * (1 + 1e-3)

    def test_relay_guard(self):
        _, f = instance(0, R=4)
        with pytest.raises(ValueError):
            grid_oracle(f, 1.0, 1.0, n_samples=10)
