import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isac_elm.airlink import transmit
from isac_elm.channels import gen_channel_set
from isac_elm.config import SystemConfig
from isac_elm.errors import DegenerateInputError, RankDeficiencyError
from isac_elm.ls import (cancel_and_separate_bs, ls_estimate, ls_stage1, ls_stage2_bs, ls_stage2_ue,
                         lstsq_svd, pinv, row_pinv)
from isac_elm.pilots import build_pilot_plan
from isac_elm.rng import complex_normal, stream



class TestPinv:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
    def test_penrose_conditions(self, a, b, seed):
        X = complex_normal(stream(seed, "pinv"), (a, b))
        P = pinv(X)
        np.testing.assert_allclose(X @ P @ X, X, atol=1e-9)
        np.testing.assert_allclose(P @ X @ P, P, atol=1e-9)
        np.testing.assert_allclose((X @ P).conj().T, X @ P, atol=1e-9)
        np.testing.assert_allclose((P @ X).conj().T, P @ X, atol=1e-9)

    def test_rank_deficient(self):
        u = np.array([[1.0], [2.0], [3.0]])
        X = u @ u.T
        P = pinv(X)
        np.testing.assert_allclose(P, X / np.sum(u ** 2) ** 2, atol=1e-12)

    def test_zero_matrix(self):
        with pytest.raises(DegenerateInputError):
            pinv(np.zeros((3, 2)))

    def test_row(self):
        z = np.array([1.0, 1j, -1.0])
        np.testing.assert_allclose(row_pinv(z), z.conj() / 3)

    def test_lstsq_matches_pinv(self):
        rng = stream(0, "l")
        F, Y = rng.standard_normal((20, 5)), rng.standard_normal((20, 3))
        np.testing.assert_allclose(lstsq_svd(F, Y), pinv(F) @ Y, atol=1e-12)
        np.testing.assert_allclose(lstsq_svd(F, Y), np.linalg.lstsq(F, Y, rcond=None)[0], atol=1e-10)

    def test_ridge(self):
        rng = stream(1, "l")
        F, Y = rng.standard_normal((20, 5)), rng.standard_normal((20, 3))
        expect = np.linalg.solve(F.T @ F + 0.5 * np.eye(5), F.T @ Y)
        np.testing.assert_allclose(lstsq_svd(F, Y, ridge=0.5), expect, atol=1e-10)


def _rx(cfg, plan, seed, nb=0.0, nu=0.0, tag="n"):
    ch = gen_channel_set(cfg, stream(seed, "c"))
    return ch, transmit(cfg, plan, ch, nb, nu, stream(seed, tag))


class TestExactness:
    @pytest.mark.parametrize("cfg", [SystemConfig(M=4, L=8, K=2, J=2), SystemConfig(M=2, L=3, K=5, J=1),
                                     SystemConfig(M=3, L=4, K=1, J=3, c_s1=2, p_s1=6, p_s2=5, c_s2=8)])
    def test_noiseless_recovery(self, cfg):
        plan = build_pilot_plan(cfg)
        ch, rx = _rx(cfg, plan, 0)
        est = ls_estimate(rx, plan)
        for got, want in ((est.A_bar, ch.A), (est.b_bar, ch.b), (est.d_bar, ch.d),
                          (est.B_bar, ch.B), (est.D_bar, ch.D)):
            assert np.linalg.norm(got - want) <= 1e-9 * np.linalg.norm(want)

    def test_separation_with_true_direct(self, desk_cfg, desk_plan):
        ch, rx = _rx(desk_cfg, desk_plan, 1)
        y_bar = cancel_and_separate_bs(rx, desk_plan, ch.A, ch.b)
        for k in range(desk_cfg.K):
            np.testing.assert_allclose(y_bar[k], (ch.B[k] @ desk_plan.V_s2).T, atol=1e-18)

    def test_rank_deficient_schedule(self, desk_cfg, desk_plan):
        short = desk_plan.__class__(desk_plan.X_s1, desk_plan.X_s2, desk_plan.z_s1, desk_plan.z_s2,
                                    desk_plan.V_s2[:, :-1], desk_plan.amp_bs, desk_plan.amp_ue)
        with pytest.raises(RankDeficiencyError):
            ls_stage2_bs(np.zeros((desk_cfg.K, desk_cfg.L - 1, desk_cfg.M), complex), short)


class TestNoiseFloor:
    """Monte-Carlo error variances against the closed-form linear-estimator oracles."""

    trials = 3000

    def _errors(self, cfg, plan, nb, nu, fn):
        ch = gen_channel_set(cfg, stream(0, "c"))
        out = []
        for t in range(self.trials):
            rx = transmit(cfg, plan, ch, nb, nu, stream(5, "mc", t))
            out.append(fn(ch, rx))
        return np.array(out)

    def test_uplink_direct(self, desk_cfg, desk_plan):
        s2 = 1e-12
        err = self._errors(desk_cfg, desk_plan, s2, 0.0,
                           lambda ch, rx: ls_stage1(rx, desk_plan)[1] - ch.b)
        expect = s2 / (desk_cfg.tx_power_ue * desk_cfg.p_s1)
        assert np.mean(np.abs(err) ** 2) == pytest.approx(expect, rel=0.05)

    def test_sensing(self, desk_cfg, desk_plan):
        s2 = 1e-12
        err = self._errors(desk_cfg, desk_plan, s2, 0.0,
                           lambda ch, rx: ls_stage1(rx, desk_plan)[0] - ch.A)
        expect = s2 * desk_cfg.M / (desk_cfg.tx_power_bs * desk_cfg.p_s1)
        assert np.mean(np.abs(err) ** 2) == pytest.approx(expect, rel=0.05)

    def test_downlink_direct(self, desk_cfg, desk_plan):
        s2 = 1e-12
        err = self._errors(desk_cfg, desk_plan, 0.0, s2,
                           lambda ch, rx: ls_stage1(rx, desk_plan)[2] - ch.d)
        expect = s2 * desk_cfg.M / (desk_cfg.tx_power_bs * desk_cfg.p_s1)
        assert np.mean(np.abs(err) ** 2) == pytest.approx(expect, rel=0.05)

    def test_uplink_reflected(self, desk_cfg, desk_plan):
        s2, L = 1e-12, desk_cfg.L

        def err(ch, rx):
            y_bar = cancel_and_separate_bs(rx, desk_plan, ch.A, ch.b)
            return ls_stage2_bs(y_bar, desk_plan) - ch.B

        e = self._errors(desk_cfg, desk_plan, s2, 0.0, err)
        expect = s2 / (desk_cfg.tx_power_ue * desk_cfg.p_s2 * L)
        assert np.mean(np.abs(e) ** 2) == pytest.approx(expect, rel=0.05)

    def test_downlink_reflected(self, desk_cfg, desk_plan):
        s2, M, L = 1e-12, desk_cfg.M, desk_cfg.L
        e = self._errors(desk_cfg, desk_plan, 0.0, s2,
                         lambda ch, rx: ls_stage2_ue(rx, desk_plan, ch.d[0], 0) - ch.D[0])
        expect = s2 * M / (desk_cfg.tx_power_bs * desk_cfg.p_s2 * L)
        assert np.mean(np.abs(e) ** 2) == pytest.approx(expect, rel=0.05)

    def test_unbiased(self, desk_cfg, desk_plan):
        err = self._errors(desk_cfg, desk_plan, 1e-12, 0.0,
                           lambda ch, rx: ls_stage1(rx, desk_plan)[1] - ch.b)
        scale = np.sqrt(1e-12 / (desk_cfg.tx_power_ue * desk_cfg.p_s1))
        assert np.max(np.abs(err.mean(axis=0))) < 5 * scale / np.sqrt(self.trials)
