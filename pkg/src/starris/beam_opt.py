"""Receive combining update under the unit Frobenius-norm ball.

The reformulated objective in W separates per user as

    2 Re{a_u^H w_u} - |lam_u|^2 w_u^H (A + sigma2 I) w_u,

with A = sum_m p_m h_m^H h_m shared by all users, coupled only through
sum_u ||w_u||^2 <= 1.  The dual path is closed-form: for multiplier nu >= 0

    w_u(nu) = (|lam_u|^2 (A + sigma2 I) + nu I)^{-1} a_u,

evaluated for every user and every nu from one eigendecomposition of A.
g(nu) = sum_u ||w_u(nu)||^2 is strictly decreasing, so either the nu = 0
point is feasible or a bisection on nu places the solution on the ball.
Users with lam_u = 0 contribute nothing to the objective and get w_u = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Auxiliaries
from .numerics import eig_hermitian

_BALL_TOL = 1e-10
_MAX_BISECT = 200


@dataclass(frozen=True)
class BeamSubproblem:
    A: np.ndarray      # (M, M) Hermitian PSD: sum_m p_m h_m^H h_m
    a: np.ndarray      # (M, U) columns a_u = sqrt(1+mu_u) sqrt(p_u) lam_u h_u^H
    lam2: np.ndarray   # (U,) weights |lam_u|^2


def make_subproblem(p: np.ndarray, aux: Auxiliaries, Heff: np.ndarray) -> BeamSubproblem:
    A = (Heff.conj().T * p) @ Heff
    A = 0.5 * (A + A.conj().T)
    coef = np.sqrt(1.0 + aux.mu) * np.sqrt(p) * aux.lam
    a = Heff.conj().T * coef[np.newaxis, :]
    return BeamSubproblem(A=A, a=a, lam2=np.abs(aux.lam) ** 2)


def beam_objective(sub: BeamSubproblem, W: np.ndarray, sigma2: float) -> float:
    """Concave objective value at an arbitrary combining matrix."""
    shifted = sub.A + sigma2 * np.eye(sub.A.shape[0])
    quad = np.real(np.einsum("mu,mu->u", W.conj(), shifted @ W))
    return float(np.sum(2.0 * np.real(np.einsum("mu,mu->u", sub.a.conj(), W)) - sub.lam2 * quad))


def optimize_beamforming(sub: BeamSubproblem, sigma2: float):
    """Maximize the per-user quadratics over the joint norm ball.

    Returns (W, nu).  The unconstrained stationary point is returned when it
    already fits in the ball; otherwise nu is bisected until
    | ||W||_F^2 - 1 | <= 1e-10 (scaled so complementary slackness also meets
    the KKT tolerance).
    """
    M, U = sub.a.shape
    active = sub.lam2 > 0.0
    W = np.zeros((M, U), dtype=np.complex128)
    if not active.any():
        return W, 0.0

    eig = eig_hermitian(sub.A)
    lam_A = np.clip(eig.eigenvalues, 0.0, None)
    V = eig.eigenvectors
    a_tilde = V.conj().T @ sub.a[:, active]
    base = sub.lam2[active][np.newaxis, :] * (lam_A[:, np.newaxis] + sigma2)

    def norms_sq(nu: float) -> np.ndarray:
        return np.sum(np.abs(a_tilde) ** 2 / (base + nu) ** 2, axis=0)

    def ball(nu: float) -> float:
        return float(np.sum(norms_sq(nu)))

    nu = 0.0
    if ball(0.0) > 1.0 + _BALL_TOL:
        hi = 1.0
        while ball(hi) >= 1.0:
            hi *= 2.0
        lo = 0.0
        for _ in range(_MAX_BISECT):
            nu = 0.5 * (lo + hi)
            g = ball(nu)
            if abs(g - 1.0) * max(1.0, nu) <= _BALL_TOL:
                break
            if g > 1.0:
                lo = nu
            else:
                hi = nu
    W[:, active] = V @ (a_tilde / (base + nu))
    return W, nu


def kkt_residual(sub: BeamSubproblem, W: np.ndarray, nu: float, sigma2: float) -> float:
    """Max of stationarity, primal-feasibility, and slackness residuals."""
    shifted = sub.A + sigma2 * np.eye(sub.A.shape[0])
    stat = 0.0
    for u in range(W.shape[1]):
        lhs = (sub.lam2[u] * shifted + nu * np.eye(W.shape[0])) @ W[:, u]
        stat = max(stat, float(np.linalg.norm(lhs - sub.a[:, u])))
    ball = float(np.sum(np.abs(W) ** 2))
    primal = max(0.0, ball - 1.0)
    slack = abs(nu * (ball - 1.0))
    return max(stat, primal, slack)
