"""Scenario construction: system parameters, user placement, channel draws.

Default parameter values reproduce the reference deployment: a 4-antenna AP
at the origin, a 64-element surface at (75 m, 25 m) with 8-level phase
quantization, and two groups of 4 users on 20 m circles centered at
(100 m, 0 m) (transmission side) and (75 m, 50 m) (reflection side).
All powers are linear watts; dBm/dB inputs are converted once at config
load time and never afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .streams import complex_normal


class ValidationError(ValueError):
    """A SystemConfig invariant is violated; the message names it."""


@dataclass(frozen=True)
class DcParams:
    """Difference-of-concave solver caps for the power subproblem."""

    tol: float = 1e-6        # bits/s/Hz improvement below which the outer loop stops
    max_outer: int = 100
    max_inner: int = 500


@dataclass(frozen=True)
class SearchParams:
    """Local-search knobs for the binary amplitude subproblem (N > n_exact)."""

    restarts: int = 8
    max_flips: int = 200


@dataclass(frozen=True)
class SystemConfig:
    M: int = 4                 # AP antennas
    N: int = 64                # surface elements
    U_A: int = 4               # transmission-side users
    U_B: int = 4               # reflection-side users
    Q: int = 8                 # phase quantization levels
    p_max: float = 0.1         # W per user
    p_min: float = 1e-7        # W, positivity floor (1e-6 * p_max)
    sigma2: float = 1e-13      # W noise variance (-100 dBm)
    rho: float = 0.01          # linear path-loss gain at 1 m (-20 dB)
    alpha_pl: float = 2.5      # path-loss exponent, AP-RIS and RIS-user alike
    ap_pos: tuple = (0.0, 0.0)
    ris_pos: tuple = (75.0, 25.0)
    center_a: tuple = (100.0, 0.0)
    center_b: tuple = (75.0, 50.0)
    radius: float = 20.0       # m, user circle radius
    epsilon: float = 1e-4      # bits/s/Hz BCD stopping tolerance
    max_bcd_iters: int = 1000
    dc: DcParams = field(default_factory=DcParams)
    n_exact: int = 16          # exhaustive amplitude search up to this N
    ls: SearchParams = field(default_factory=SearchParams)
    seed: int = 1

    @property
    def n_users(self) -> int:
        return self.U_A + self.U_B

    @property
    def min_elements_per_side(self) -> int:
        """Coverage bound: each side must keep at least ceil(N/3) elements."""
        return math.ceil(self.N / 3)

    def validate(self) -> "SystemConfig":
        checks = [
            (self.M >= 1, "M >= 1"),
            (self.N >= 2, "N >= 2"),
            (self.U_A >= 0 and self.U_B >= 0, "U_A >= 0 and U_B >= 0"),
            (self.n_users >= 1, "U_A + U_B >= 1"),
            (self.Q >= 2, "Q >= 2"),
            (0.0 < self.p_min < self.p_max, "0 < p_min < p_max"),
            (self.sigma2 > 0.0, "sigma2 > 0"),
            (self.rho > 0.0, "rho > 0"),
            (self.alpha_pl > 0.0, "alpha_pl > 0"),
            (self.radius >= 0.0, "radius >= 0"),
            (self.epsilon > 0.0, "epsilon > 0"),
            (self.max_bcd_iters >= 1, "max_bcd_iters >= 1"),
            (2 * self.min_elements_per_side <= self.N, "2*ceil(N/3) <= N"),
            (self.seed >= 0, "seed >= 0"),
            (self.dc.tol > 0 and self.dc.max_outer >= 1 and self.dc.max_inner >= 1,
             "dc.tol > 0, dc.max_outer >= 1, dc.max_inner >= 1"),
            (self.ls.restarts >= 1 and self.ls.max_flips >= 1,
             "ls.restarts >= 1, ls.max_flips >= 1"),
        ]
        for ok, name in checks:
            if not ok:
                raise ValidationError(f"config invariant violated: {name}")
        return self


@dataclass(frozen=True)
class ChannelSet:
    """One Monte-Carlo draw: H is N x M (RIS to AP), h_t/h_r are U x N rows.

    Transmission-side rows of h_r and reflection-side rows of h_t are exact
    zeros, reflecting that each user sits on exactly one side of the surface.
    """

    H: np.ndarray
    h_t: np.ndarray
    h_r: np.ndarray

    def __post_init__(self):
        for arr in (self.H, self.h_t, self.h_r):
            arr.setflags(write=False)


def group_of(u: int, cfg: SystemConfig) -> str:
    """Side of user u (1-based): 'A' (transmission) if u <= U_A else 'B'."""
    if not 1 <= u <= cfg.n_users:
        raise IndexError(f"user index {u} outside 1..{cfg.n_users}")
    return "A" if u <= cfg.U_A else "B"


def path_loss(d: float, rho: float, alpha_pl: float) -> float:
    """Linear power gain rho * d**(-alpha_pl) at distance d meters."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return rho * d ** (-alpha_pl)


def place_users(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Drop users uniformly on their group circles; returns (U, 2) meters.

    Group A occupies rows 0..U_A-1 (circle at center_a), group B the rest.
    Angles are i.i.d. uniform on [0, 2*pi).
    """
    out = np.empty((cfg.n_users, 2))
    for rows, center, count in (
        (out[: cfg.U_A], cfg.center_a, cfg.U_A),
        (out[cfg.U_A :], cfg.center_b, cfg.U_B),
    ):
        angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
        rows[:, 0] = center[0] + cfg.radius * np.cos(angles)
        rows[:, 1] = center[1] + cfg.radius * np.sin(angles)
    return out


def draw_channels(
    cfg: SystemConfig, positions: np.ndarray, rng: np.random.Generator
) -> ChannelSet:
    """Rayleigh-fade every link: entries are sqrt(pathloss) * CN(0,1).

    Draw order is fixed (H first, then one row per user in index order) so a
    given stream always yields the same ChannelSet.
    """
    d_ap = float(np.linalg.norm(np.subtract(cfg.ris_pos, cfg.ap_pos)))
    H = np.sqrt(path_loss(d_ap, cfg.rho, cfg.alpha_pl)) * complex_normal(
        rng, (cfg.N, cfg.M)
    )
    h_t = np.zeros((cfg.n_users, cfg.N), dtype=np.complex128)
    h_r = np.zeros((cfg.n_users, cfg.N), dtype=np.complex128)
    for u in range(cfg.n_users):
        d_u = float(np.linalg.norm(positions[u] - np.asarray(cfg.ris_pos)))
        row = np.sqrt(path_loss(d_u, cfg.rho, cfg.alpha_pl)) * complex_normal(
            rng, cfg.N
        )
        if u < cfg.U_A:
            h_t[u] = row
        else:
            h_r[u] = row
    return ChannelSet(H=H, h_t=h_t, h_r=h_r)
