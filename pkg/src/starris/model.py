"""Effective channels, interference, sum rate, and the fractional reformulation.

Conventions: p is the (U,) power vector in watts, W the M x U receive
combining matrix with ||W||_F^2 <= 1, and h_u the effective 1 x M uplink
channel of user u through the surface.  Per-user noise after combining is
sigma2 * ||w_u||^2.  All rates are bits/s/Hz (log base 2), including the
reformulated objective, so the two objectives agree exactly at the optimal
auxiliaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ChannelSet, SystemConfig


@dataclass(frozen=True)
class StarConfig:
    """Element assignment and discrete phases of the surface.

    alpha_t[n] is True when element n serves the transmission side (the
    reflection assignment is its complement).  theta_t/theta_r hold phases on
    the grid {2*pi*q/Q}.  The realized per-side coefficient vectors are
    phi_x[n] = sqrt(alpha_x[n]) * exp(j*theta_x[n]), so exactly one side of
    each element is live and |phi_t[n]|^2 + |phi_r[n]|^2 = 1.
    """

    alpha_t: np.ndarray
    theta_t: np.ndarray
    theta_r: np.ndarray

    def __post_init__(self):
        for arr in (self.alpha_t, self.theta_t, self.theta_r):
            arr.setflags(write=False)

    @property
    def phi_t(self) -> np.ndarray:
        return np.where(self.alpha_t, np.exp(1j * self.theta_t), 0.0 + 0.0j)

    @property
    def phi_r(self) -> np.ndarray:
        return np.where(self.alpha_t, 0.0 + 0.0j, np.exp(1j * self.theta_r))

    def validate(self, cfg: SystemConfig) -> "StarConfig":
        lo = cfg.min_elements_per_side
        n_t = int(np.count_nonzero(self.alpha_t))
        if not lo <= n_t <= cfg.N - lo:
            raise ValueError(f"element split {n_t}/{cfg.N - n_t} violates the >= {lo} coverage bound")
        grid = 2.0 * np.pi / cfg.Q
        for theta in (self.theta_t, self.theta_r):
            q = theta / grid
            if not np.allclose(q, np.round(q), atol=1e-9) or theta.min() < 0 or theta.max() >= 2 * np.pi:
                raise ValueError("phases are off the quantization grid")
        return self


@dataclass(frozen=True)
class Auxiliaries:
    """Fractional-programming auxiliaries: mu is the per-user SINR surrogate."""

    mu: np.ndarray
    lam: np.ndarray


def effective_channels(ch: ChannelSet, star: StarConfig) -> np.ndarray:
    """All effective uplink channels as a U x M matrix (row u = h_u)."""
    mixed = ch.h_t * star.phi_t + ch.h_r * star.phi_r
    return mixed @ ch.H


def effective_channel(ch: ChannelSet, star: StarConfig, u: int) -> np.ndarray:
    """Effective channel of user u (0-based): sum over sides of h_u^x diag(phi_x) H."""
    if not 0 <= u < ch.h_t.shape[0]:
        raise IndexError(f"user index {u} outside 0..{ch.h_t.shape[0] - 1}")
    return (ch.h_t[u] * star.phi_t + ch.h_r[u] * star.phi_r) @ ch.H


def gain_matrix(Heff: np.ndarray, W: np.ndarray) -> np.ndarray:
    """G[m, u] = |h_m w_u|^2, the combining cross-gains."""
    return np.abs(Heff @ W) ** 2


def combining_noise(W: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user post-combining noise power sigma2 * ||w_u||^2."""
    return sigma2 * np.sum(np.abs(W) ** 2, axis=0)


def interference(u: int, p: np.ndarray, W: np.ndarray, Heff: np.ndarray) -> float:
    """Interference hitting user u: sum over m != u of p_m |h_m w_u|^2."""
    g = gain_matrix(Heff, W)[:, u]
    return float(p @ g - p[u] * g[u])


def total_interference(u: int, p: np.ndarray, W: np.ndarray, Heff: np.ndarray) -> float:
    """Gross received power at combiner u: sum over all m of p_m |h_m w_u|^2."""
    return float(p @ gain_matrix(Heff, W)[:, u])


def _sinr_terms(p: np.ndarray, G: np.ndarray, noise: np.ndarray):
    """Per-user (signal, interference, denominator) with p broadcast over rows."""
    received = p @ G                      # received[u] = sum_m p_m G[m, u]
    signal = p * np.diag(G)
    interf = received - signal
    return signal, interf, interf + noise


def sum_rate_from_gains(p: np.ndarray, G: np.ndarray, noise: np.ndarray) -> float:
    signal, _, denom = _sinr_terms(p, G, noise)
    live = denom > 0.0                    # ||w_u|| = 0 carries no signal either
    return float(np.sum(np.log2(1.0 + signal[live] / denom[live])))

def sum_rate(
    p: np.ndarray, star: StarConfig, W: np.ndarray, ch: ChannelSet, sigma2: float
) -> float:
    """Achievable sum rate in bits/s/Hz."""
    Heff = effective_channels(ch, star)
    return sum_rate_from_gains(p, gain_matrix(Heff, W), combining_noise(W, sigma2))


def update_auxiliaries(
    p: np.ndarray, star: StarConfig, W: np.ndarray, ch: ChannelSet, sigma2: float
) -> Auxiliaries:
    """Closed-form auxiliary update: mu_u is the SINR of user u and
    lam_u = sqrt(1+mu_u) sqrt(p_u) (h_u w_u) / (total received power + noise)."""
    Heff = effective_channels(ch, star)
    G = gain_matrix(Heff, W)
    noise = combining_noise(W, sigma2)
    signal, _, denom = _sinr_terms(p, G, noise)
    s = np.einsum("um,mu->u", Heff, W)    # s_u = h_u w_u
    total = p @ G + noise
    mu = np.zeros(len(p))
    lam = np.zeros(len(p), dtype=np.complex128)
    live = denom > 0.0
    mu[live] = signal[live] / denom[live]
    lam[live] = np.sqrt(1.0 + mu[live]) * np.sqrt(p[live]) * s[live] / total[live]
    return Auxiliaries(mu=mu, lam=lam)


def fp_objective(
    p: np.ndarray,
    star: StarConfig,
    W: np.ndarray,
    aux: Auxiliaries,
    ch: ChannelSet,
    sigma2: float,
) -> float:
    """Quadratic-transform objective; equals sum_rate at the closed-form
    auxiliaries and is blockwise concave in each of phi, W."""
    Heff = effective_channels(ch, star)
    G = gain_matrix(Heff, W)
    noise = combining_noise(W, sigma2)
    s = np.einsum("um,mu->u", Heff, W)
    total = p @ G + noise
    cross = 2.0 * np.sqrt(1.0 + aux.mu) * np.real(
        np.conj(aux.lam) * np.sqrt(p) * s
    )
    terms = (
        np.log2(1.0 + aux.mu)
        - aux.mu
        + cross
        - np.abs(aux.lam) ** 2 * total
    )
    return float(np.sum(terms))


def uniform_grid(Q: int) -> np.ndarray:
    """The Q allowed phases {0, 2*pi/Q, ..., 2*pi(Q-1)/Q}."""
    return 2.0 * np.pi * np.arange(Q) / Q


def frobenius_norm_sq(W: np.ndarray) -> float:
    return float(np.sum(np.abs(W) ** 2))
