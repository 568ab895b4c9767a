import numpy as np
import pytest

from starris.bcd import (
    Scheme,
    bcd_solve,
    fixed_split_config,
    initialize,
    random_star_config,
    run_scheme,
)
from starris.model import frobenius_norm_sq, sum_rate
from starris.scenario import ChannelSet
from starris.streams import scheme_stream, substream

from conftest import desk_cfg, random_instance


def zero_channels(cfg):
    U = cfg.n_users
    return ChannelSet(
        H=np.zeros((cfg.N, cfg.M), complex),
        h_t=np.zeros((U, cfg.N), complex),
        h_r=np.zeros((U, cfg.N), complex),
    )


class TestInitialize:
    def test_alternating_split(self):
        cfg, ch = random_instance(61, N=4)
        p, star, W = initialize(cfg, ch, substream(0, 0))
        np.testing.assert_array_equal(star.alpha_t, [True, False, True, False])

    def test_feasible_by_construction(self):
        cfg, ch = random_instance(62)
        p, star, W = initialize(cfg, ch, substream(0, 0))
        star.validate(cfg)
        assert np.all(p == cfg.p_max)
        assert frobenius_norm_sq(W) == pytest.approx(1.0, rel=1e-12)
        assert np.all(star.theta_t == 0) and np.all(star.theta_r == 0)

    def test_deterministic(self):
        cfg, ch = random_instance(63)
        a = initialize(cfg, ch, substream(1, 5))
        b = initialize(cfg, ch, substream(1, 5))
        for x, y in zip(a, b):
            arr_x = x.alpha_t if hasattr(x, "alpha_t") else x
            arr_y = y.alpha_t if hasattr(y, "alpha_t") else y
            np.testing.assert_array_equal(arr_x, arr_y)

    def test_zero_channel_user_gets_unit_column(self):
        cfg = desk_cfg(U_A=1, U_B=1)
        ch = zero_channels(cfg)
        _, _, W = initialize(cfg, ch, substream(2, 0))
        norms = np.linalg.norm(W, axis=0)
        assert norms[0] == pytest.approx(norms[1], rel=1e-12)
        assert frobenius_norm_sq(W) == pytest.approx(1.0, rel=1e-12)


class TestBcdSolve:
    def test_zero_channels_converges_immediately(self):
        cfg = desk_cfg()
        report = bcd_solve(cfg, zero_channels(cfg))
        assert report.trace == [0.0]
        assert report.iterations == 1
        assert report.termination == "Converged"

    def test_trace_nondecreasing_and_converges(self):
        cfg, ch = random_instance(64)
        report = bcd_solve(cfg, ch)
        assert report.termination == "Converged"
        assert report.iterations <= 1000
        assert all(b >= a for a, b in zip(report.trace, report.trace[1:]))
        assert report.trace[-1] >= report.initial_sum_rate

    def test_final_state_consistent_with_trace(self):
        cfg, ch = random_instance(65)
        report = bcd_solve(cfg, ch)
        rate = sum_rate(report.final_p, report.final_star, report.final_W, ch, cfg.sigma2)
        assert rate == pytest.approx(report.trace[-1], rel=1e-12)

    def test_block_timings_cover_every_iteration(self):
        cfg, ch = random_instance(66)
        report = bcd_solve(cfg, ch)
        for block in ("power", "aux", "star", "beam"):
            assert len(report.block_timings[block]) == report.iterations


class TestSchemes:
    def test_single_user_power_only_hits_p_max(self):
        cfg, ch = random_instance(67, U_A=1, U_B=0)
        rng = scheme_stream(cfg.seed, 0, Scheme.RABM_RSV.ordinal)
        report = run_scheme(Scheme.RABM_RSV, cfg, ch, rng)
        assert report.final_p[0] == pytest.approx(cfg.p_max, rel=1e-9)

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_all_traces_nondecreasing_and_feasible(self, scheme):
        cfg, ch = random_instance(68)
        rng = scheme_stream(cfg.seed, 0, scheme.ordinal)
        report = run_scheme(scheme, cfg, ch, rng, check_feasible=True)
        assert all(b >= a for a, b in zip(report.trace, report.trace[1:]))

    def test_frozen_blocks_stay_frozen(self):
        cfg, ch = random_instance(69)
        rng = scheme_stream(cfg.seed, 0, Scheme.RABM.ordinal)
        seeded = scheme_stream(cfg.seed, 0, Scheme.RABM.ordinal)
        from starris.bcd import initialize as init
        from starris.bcd import random_beamformer

        init(cfg, ch, seeded)
        frozen_W = random_beamformer(cfg.M, cfg.n_users, seeded)
        report = run_scheme(Scheme.RABM, cfg, ch, rng)
        np.testing.assert_array_equal(report.final_W, frozen_W)

        rng = scheme_stream(cfg.seed, 0, Scheme.FSTAR.ordinal)
        report = run_scheme(Scheme.FSTAR, cfg, ch, rng)
        np.testing.assert_array_equal(
            report.final_star.alpha_t, fixed_split_config(cfg).alpha_t
        )

    def test_deterministic_given_seed_and_scheme(self):
        cfg, ch = random_instance(70)
        reports = [
            run_scheme(Scheme.RSV, cfg, ch, scheme_stream(cfg.seed, 0, Scheme.RSV.ordinal))
            for _ in range(2)
        ]
        assert reports[0].trace == reports[1].trace
        np.testing.assert_array_equal(reports[0].final_W, reports[1].final_W)
        np.testing.assert_array_equal(
            reports[0].final_star.alpha_t, reports[1].final_star.alpha_t
        )


class TestRandomStarConfig:
    @pytest.mark.parametrize("seed", range(20))
    def test_always_feasible_and_on_grid(self, seed):
        cfg = desk_cfg(N=7, Q=4)
        star = random_star_config(cfg, substream(59, seed))
        star.validate(cfg)
