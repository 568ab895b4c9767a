import numpy as np
import pytest

from starris.beam_opt import (
    BeamSubproblem,
    beam_objective,
    kkt_residual,
    make_subproblem,
    optimize_beamforming,
)
from starris.model import (
    effective_channels,
    fp_objective,
    frobenius_norm_sq,
    update_auxiliaries,
)
from starris.bcd import random_beamformer
from starris.streams import substream

from conftest import random_instance, random_state, state_stream


def pipeline_subproblem(seed, **overrides):
    cfg, ch = random_instance(seed, **overrides)
    rng = state_stream(seed)
    p, star, W = random_state(cfg, rng)
    aux = update_auxiliaries(p, star, W, ch, cfg.sigma2)
    Heff = effective_channels(ch, star)
    return cfg, ch, p, star, W, aux, make_subproblem(p, aux, Heff)


def scalar_problem(a, lam2, A=0.0):
    return BeamSubproblem(
        A=np.array([[A + 0j]]),
        a=np.array([[a + 0j]]),
        lam2=np.array([lam2]),
    )


class TestOptimizeBeamforming:
    def test_zero_data_zero_solution(self):
        sub = scalar_problem(0.0, 0.0)
        W, nu = optimize_beamforming(sub, sigma2=1.0)
        assert nu == 0.0
        assert not W.any()
        assert kkt_residual(sub, W, nu, 1.0) == 0.0

    def test_scalar_interior_solution(self):
        # |lam|^2 sigma2 = 0.5, a = 0.1: unconstrained w = 0.2 fits the ball
        sub = scalar_problem(0.1, 0.5)
        W, nu = optimize_beamforming(sub, sigma2=1.0)
        assert nu == 0.0
        assert W[0, 0] == pytest.approx(0.2, rel=1e-12)

    def test_scalar_active_constraint(self):
        # w = a / (0.5 + nu) with |w| = 1 forces nu = 9.5
        sub = scalar_problem(10.0, 0.5)
        W, nu = optimize_beamforming(sub, sigma2=1.0)
        assert abs(W[0, 0]) == pytest.approx(1.0, abs=1e-9)
        assert nu == pytest.approx(9.5, abs=1e-8)

    @pytest.mark.parametrize("seed", range(20))
    def test_ball_never_violated(self, seed):
        *_, sub = pipeline_subproblem(900 + seed)
        cfg = random_instance(900 + seed)[0]
        W, _ = optimize_beamforming(sub, cfg.sigma2)
        assert frobenius_norm_sq(W) <= 1.0 + 1e-9

    def test_ball_norm_strictly_decreasing_in_nu(self):
        *_, sub = pipeline_subproblem(42)
        cfg = random_instance(42)[0]
        shifted = sub.A + cfg.sigma2 * np.eye(sub.A.shape[0])

        def norm_at(nu):
            total = 0.0
            for u in range(sub.a.shape[1]):
                if sub.lam2[u] > 0:
                    w = np.linalg.solve(
                        sub.lam2[u] * shifted + nu * np.eye(sub.A.shape[0]), sub.a[:, u]
                    )
                    total += float(np.linalg.norm(w) ** 2)
            return total

        samples = [norm_at(nu) for nu in (1e-3, 1e-2, 1e-1, 1.0, 10.0)]
        assert all(b < a for a, b in zip(samples, samples[1:]))


class TestKkt:
    @pytest.mark.parametrize("seed", range(20))
    def test_solution_satisfies_kkt(self, seed):
        cfg, *_, sub = pipeline_subproblem(950 + seed)
        W, nu = optimize_beamforming(sub, cfg.sigma2)
        assert kkt_residual(sub, W, nu, cfg.sigma2) <= 1e-8

    def test_perturbation_breaks_kkt(self):
        cfg, *_, sub = pipeline_subproblem(51)
        W, nu = optimize_beamforming(sub, cfg.sigma2)
        noisy = W + 0.01 * random_beamformer(*W.shape, substream(57, 0))
        assert kkt_residual(sub, noisy, nu, cfg.sigma2) > 1e-4


class TestOptimality:
    @pytest.mark.parametrize("seed", range(10))
    def test_dominates_random_feasible_points(self, seed):
        cfg, *_, sub = pipeline_subproblem(1000 + seed)
        W, _ = optimize_beamforming(sub, cfg.sigma2)
        ours = beam_objective(sub, W, cfg.sigma2)
        rng = substream(58, seed)
        for _ in range(100):
            cand = random_beamformer(*W.shape, rng) * rng.uniform(0.0, 1.0)
            assert ours >= beam_objective(sub, cand, cfg.sigma2) - 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_reformulated_objective_never_decreases(self, seed):
        cfg, ch, p, star, W_old, aux, sub = pipeline_subproblem(1100 + seed)
        W_new, _ = optimize_beamforming(sub, cfg.sigma2)
        before = fp_objective(p, star, W_old, aux, ch, cfg.sigma2)
        after = fp_objective(p, star, W_new, aux, ch, cfg.sigma2)
        assert after >= before - 1e-10
