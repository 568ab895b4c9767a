"""Power allocation by difference-of-concave programming.

At fixed surface state and combiners the sum rate splits as F(P) = f1(P) -
f2(P) with

    f1(P) = sum_u log2( sum_m p_m |h_m w_u|^2 + sigma2 ||w_u||^2 )
    f2(P) = sum_u log2( sum_{m != u} p_m |h_m w_u|^2 + sigma2 ||w_u||^2 )

both concave in P, and F(P) telescopes back to the sum rate.  Each outer
step maximizes the concave surrogate f1(P) - f2(P_prev) - <grad f2(P_prev),
P - P_prev> over the power box by projected gradient ascent; tangency of the
surrogate at P_prev makes the outer F-trace nondecreasing.

Users whose combiner is all zero are skipped: their f1 and f2 terms are
identical, so they contribute nothing to F or its gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import combining_noise, gain_matrix
from .scenario import DcParams, SystemConfig

_LN2 = np.log(2.0)
_ARMIJO_SLOPE = 1e-4
_PG_TOL_PER_USER = 1e-8


@dataclass(frozen=True)
class DcState:
    """Result of one power optimization: F_value equals the sum rate at p."""

    p: np.ndarray
    F_value: float
    outer_iter: int


@dataclass(frozen=True)
class _PowerProblem:
    """Gains frozen for the duration of one power solve."""

    G: np.ndarray        # G[m, u] = |h_m w_u|^2
    noise: np.ndarray    # sigma2 ||w_u||^2
    live: np.ndarray     # users with a nonzero combiner

    @classmethod
    def build(cls, W: np.ndarray, Heff: np.ndarray, sigma2: float) -> "_PowerProblem":
        noise = combining_noise(W, sigma2)
        return cls(G=gain_matrix(Heff, W), noise=noise, live=noise > 0.0)

    def f1(self, p: np.ndarray) -> float:
        d = (p @ self.G + self.noise)[self.live]
        return float(np.sum(np.log2(d)))

    def f2(self, p: np.ndarray) -> float:
        received = p @ self.G
        d = (received - p * np.diag(self.G) + self.noise)[self.live]
        return float(np.sum(np.log2(d)))

    def F(self, p: np.ndarray) -> float:
        return self.f1(p) - self.f2(p)

    def grad_f1(self, p: np.ndarray) -> np.ndarray:
        d = p @ self.G + self.noise
        inv = np.where(self.live, 1.0 / np.where(self.live, d, 1.0), 0.0)
        return self.G @ inv / _LN2

    def grad_f2(self, p: np.ndarray) -> np.ndarray:
        received = p @ self.G
        d = received - p * np.diag(self.G) + self.noise
        inv = np.where(self.live, 1.0 / np.where(self.live, d, 1.0), 0.0)
        # own-power derivative of the interference term is zero: drop diag.
        off = self.G - np.diag(np.diag(self.G))
        return off @ inv / _LN2


def f_value(p: np.ndarray, W: np.ndarray, Heff: np.ndarray, sigma2: float) -> float:
    """F(P) = f1 - f2; identical to the sum rate at fixed (W, phi)."""
    return _PowerProblem.build(W, Heff, sigma2).F(np.asarray(p, dtype=float))


def f1_value(p: np.ndarray, W: np.ndarray, Heff: np.ndarray, sigma2: float) -> float:
    """Concave part: sum of log2 of gross received power plus noise."""
    return _PowerProblem.build(W, Heff, sigma2).f1(np.asarray(p, dtype=float))


def f2_value(p: np.ndarray, W: np.ndarray, Heff: np.ndarray, sigma2: float) -> float:
    """Subtracted concave part: same with the own-signal term removed."""
    return _PowerProblem.build(W, Heff, sigma2).f2(np.asarray(p, dtype=float))


def grad_f2(p: np.ndarray, W: np.ndarray, Heff: np.ndarray, sigma2: float) -> np.ndarray:
    """Gradient of the subtracted concave part, used to linearize it."""
    return _PowerProblem.build(W, Heff, sigma2).grad_f2(np.asarray(p, dtype=float))


def _surrogate_ascent(
    prob: _PowerProblem,
    p_prev: np.ndarray,
    box: tuple,
    params: DcParams,
) -> np.ndarray:
    lo, hi = box
    g_lin = prob.grad_f2(p_prev)
    f2_lin0 = prob.f2(p_prev)

    def surrogate(p):
        return prob.f1(p) - f2_lin0 - float(g_lin @ (p - p_prev))

    x = np.clip(p_prev, lo, hi)
    s_x = surrogate(x)
    for _ in range(params.max_inner):
        g = prob.grad_f1(x) - g_lin
        pg = np.clip(x + g, lo, hi) - x
        if np.linalg.norm(pg) <= _PG_TOL_PER_USER * len(x):
            break
        step = 1.0
        moved = False
        while step > 2.0 ** -60:
            cand = np.clip(x + step * g, lo, hi)
            dx = cand - x
            if not np.any(dx):
                break
            s_cand = surrogate(cand)
            if s_cand >= s_x + _ARMIJO_SLOPE * float(g @ dx):
                x, s_x, moved = cand, s_cand, True
                break
            step *= 0.5
        if not moved:
            break
    return x


def dc_inner_solve(
    p_prev: np.ndarray,
    W: np.ndarray,
    Heff: np.ndarray,
    sigma2: float,
    box: tuple,
    params: DcParams = DcParams(),
) -> np.ndarray:
    """Maximize the linearized objective over the power box from p_prev."""
    prob = _PowerProblem.build(W, Heff, sigma2)
    return _surrogate_ascent(prob, np.asarray(p_prev, dtype=float), box, params)


def optimize_power(
    p_init: np.ndarray,
    W: np.ndarray,
    Heff: np.ndarray,
    sigma2: float,
    cfg: SystemConfig,
) -> DcState:
    """Outer minorize-maximize loop; stops when F stops improving.

    Candidate iterates that would decrease F (possible only through inner
    inexactness) are discarded, so the returned trace is literally
    nondecreasing.
    """
    prob = _PowerProblem.build(W, Heff, sigma2)
    box = (cfg.p_min, cfg.p_max)
    p = np.clip(np.asarray(p_init, dtype=float), *box)
    F_cur = prob.F(p)
    outer = 0
    for outer in range(1, cfg.dc.max_outer + 1):
        p_cand = _surrogate_ascent(prob, p, box, cfg.dc)
        F_cand = prob.F(p_cand)
        if F_cand < F_cur:
            break
        improved = F_cand - F_cur
        p, F_cur = p_cand, F_cand
        if improved <= cfg.dc.tol:
            break
    return DcState(p=p, F_value=F_cur, outer_iter=outer)
