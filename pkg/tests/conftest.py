"""Shared builders for randomized solver states, used across the suite."""

import dataclasses

import numpy as np
import pytest

from starris.bcd import random_beamformer, random_star_config
from starris.cli import parse_config, trial_channels
from starris.scenario import SystemConfig
from starris.streams import substream


def desk_cfg(**overrides) -> SystemConfig:
    cfg = parse_config("", preset="desk")
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


def random_instance(seed: int, **overrides):
    """One desk-scale config plus a seeded channel draw."""
    cfg = desk_cfg(seed=seed, **overrides)
    return cfg, trial_channels(cfg, 0)


def random_state(cfg: SystemConfig, rng: np.random.Generator):
    """Feasible (p, star, W) triple drawn uniformly inside the constraints."""
    p = rng.uniform(cfg.p_min, cfg.p_max, size=cfg.n_users)
    star = random_star_config(cfg, rng)
    W = random_beamformer(cfg.M, cfg.n_users, rng) * rng.uniform(0.2, 1.0)
    return p, star, W


def state_stream(seed: int) -> np.random.Generator:
    return substream(seed, 9000)


@pytest.fixture
def rng():
    return state_stream(0)


def power_grid_oracle(fn, box, points: int = 200, stages: int = 2) -> float:
    """Exhaustive 2-user grid search for the maximum of fn over the box.

    fn maps a (2, K) stack of power columns to K objective values.  A second
    200x200 pass zooms into the best coarse cell, bringing the discretization
    error of the reported maximum far below the 1e-6 comparison tolerances
    (a single coarse pass undershoots interior optima by up to ~2e-6).
    """
    lo = np.array([box[0], box[0]], dtype=float)
    hi = np.array([box[1], box[1]], dtype=float)
    best = -np.inf
    for _ in range(stages):
        ax0 = np.linspace(lo[0], hi[0], points)
        ax1 = np.linspace(lo[1], hi[1], points)
        A, B = np.meshgrid(ax0, ax1, indexing="ij")
        vals = fn(np.stack([A.ravel(), B.ravel()]))
        idx = int(np.argmax(vals))
        best = max(best, float(vals[idx]))
        i, j = np.unravel_index(idx, (points, points))
        h = np.array([ax0[1] - ax0[0], ax1[1] - ax1[0]])
        center = np.array([ax0[i], ax1[j]])
        lo = np.maximum(center - h, box[0])
        hi = np.minimum(center + h, box[1])
    return best


def oracle_f_parts(W, Heff, sigma2):
    """Independent re-implementation of the two concave rate parts, vectorized
    over a (2, K) stack of power columns; used only as a test oracle."""
    G = np.abs(Heff @ W) ** 2
    noise = sigma2 * np.sum(np.abs(W) ** 2, axis=0)

    def f1(P):
        return np.sum(np.log2(G.T @ P + noise[:, None]), axis=0)

    def f2(P):
        received = G.T @ P + noise[:, None]
        return np.sum(np.log2(received - P * np.diag(G)[:, None]), axis=0)

    return f1, f2
