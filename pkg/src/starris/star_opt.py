"""Surface update: continuous stationary point, grid projection, amplitudes.

The reformulated objective restricted to the surface coefficients is the
concave quadratic

    R_phi(phi) = sum_x [ 2 Re{omega_x phi_x} - phi_x^H Omega_x phi_x ]

with omega_x a weighted sum of user rows through diag(H w_u) and Omega_x a
positive-semidefinite Gram accumulation over user pairs.  The update solves
Omega_x phi = omega_x^H for the unconstrained maximizer, snaps each phase to
the nearest grid point (circular distance, ties to the smaller grid value),
and then reoptimizes the binary side assignment: with alpha in {0,1} the
restriction phi_x[n] = alpha_x[n] exp(j theta_x[n]) turns R_phi into a
binary quadratic in alpha_t alone (alpha_r = 1 - alpha_t), solved exactly by
enumeration for small N and by seeded multi-restart local search above that.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import Auxiliaries
from .numerics import NotPositiveDefinite, hermitian_solve
from .scenario import ChannelSet, SystemConfig
from .streams import substream

_RIDGE_SCALE = 1e-8


class Infeasible(Exception):
    """The coverage bound cannot be met: 2*ceil(N/3) > N."""


@dataclass(frozen=True)
class PhaseSubproblem:
    omega_t: np.ndarray   # (N,) row coefficients of the linear term, t side
    omega_r: np.ndarray
    Omega_t: np.ndarray   # (N, N) Hermitian PSD quadratic term, t side
    Omega_r: np.ndarray


@dataclass(frozen=True)
class AmplitudeProblem:
    """Binary quadratic over the t-side assignment x (r side is 1 - x):

        g(x) = gain_t . x + gain_r . (1-x) - x^T quad_t x - (1-x)^T quad_r (1-x)

    gain_x[n] = 2 Re{omega_x[n] e^{j theta_x[n]}} and quad_x[n,m] =
    Re{e^{-j theta_x[n]} Omega_x[n,m] e^{j theta_x[m]}} (symmetric), so g
    reproduces R_phi on every binary assignment.  Feasible cardinalities are
    lo <= sum(x) <= hi.
    """

    gain_t: np.ndarray
    gain_r: np.ndarray
    quad_t: np.ndarray
    quad_r: np.ndarray
    lo: int
    hi: int

    @property
    def linear_net(self) -> np.ndarray:
        """Per-element linear preference for the t side (pairwise terms excluded)."""
        return self.gain_t - self.gain_r

    def evaluate(self, alpha_t: np.ndarray) -> float:
        x = np.asarray(alpha_t, dtype=float)
        y = 1.0 - x
        return float(
            self.gain_t @ x
            + self.gain_r @ y
            - x @ self.quad_t @ x
            - y @ self.quad_r @ y
        )


def assemble_subproblem(
    p: np.ndarray, W: np.ndarray, aux: Auxiliaries, ch: ChannelSet
) -> PhaseSubproblem:
    """Accumulate omega/Omega over users; off-side users drop out through
    their zero channel rows."""
    N = ch.H.shape[0]
    coef = np.sqrt(1.0 + aux.mu) * np.sqrt(p) * np.conj(aux.lam)
    lam2 = np.abs(aux.lam) ** 2
    omega = {"t": np.zeros(N, dtype=np.complex128), "r": np.zeros(N, dtype=np.complex128)}
    Omega = {"t": np.zeros((N, N), dtype=np.complex128), "r": np.zeros((N, N), dtype=np.complex128)}
    sides = {"t": ch.h_t, "r": ch.h_r}
    for u in range(len(p)):
        d_u = ch.H @ W[:, u]              # diag(H w_u) as a vector
        for side, h in sides.items():
            omega[side] += coef[u] * (h[u] * d_u)
            if lam2[u] > 0.0:
                B = h * d_u[np.newaxis, :]    # row i = h_i^x elementwise d_u
                Omega[side] += lam2[u] * (B.conj().T * p) @ B
    for side in ("t", "r"):                   # enforce exact Hermitian symmetry
        Omega[side] = 0.5 * (Omega[side] + Omega[side].conj().T)
    return PhaseSubproblem(
        omega_t=omega["t"], omega_r=omega["r"], Omega_t=Omega["t"], Omega_r=Omega["r"]
    )


def phase_objective(sub: PhaseSubproblem, phi_t: np.ndarray, phi_r: np.ndarray) -> float:
    """R_phi evaluated at arbitrary coefficient vectors."""
    val = 0.0
    for omega, Omega, phi in (
        (sub.omega_t, sub.Omega_t, phi_t),
        (sub.omega_r, sub.Omega_r, phi_r),
    ):
        val += 2.0 * np.real(omega @ phi) - np.real(phi.conj() @ Omega @ phi)
    return float(val)


def _solve_side(omega: np.ndarray, Omega: np.ndarray) -> np.ndarray:
    trace = float(np.real(np.trace(Omega)))
    if trace <= 0.0:
        return np.zeros_like(omega)
    rhs = omega.conj()
    try:
        return hermitian_solve(Omega, rhs)
    except NotPositiveDefinite:
        ridge = _RIDGE_SCALE * trace / Omega.shape[0]
        return np.linalg.solve(Omega + ridge * np.eye(Omega.shape[0]), rhs)


def continuous_stationary_point(sub: PhaseSubproblem):
    """Unconstrained maximizer phi_x = Omega_x^{-1} omega_x^H per side.

    A ridge of 1e-8 * trace/N is applied only when the positive-definite
    factorization fails; omega^H always lies in the range of Omega, so the
    ridge solution still zeroes the gradient to working precision.
    """
    return _solve_side(sub.omega_t, sub.Omega_t), _solve_side(sub.omega_r, sub.Omega_r)


def project_phases(phi_star: np.ndarray, Q: int) -> np.ndarray:
    """Snap each entry's argument to the nearest grid phase 2*pi*q/Q.

    Distance is circular, so arguments just below 2*pi land on 0 rather than
    the far end of the grid.  Ties go to the smaller grid value; exact-zero
    entries (no preference) map to 0.
    """
    if Q < 2:
        raise ValueError("Q must be at least 2")
    args = np.angle(phi_star)
    grid = 2.0 * np.pi * np.arange(Q) / Q
    delta = np.abs(args[:, np.newaxis] - grid[np.newaxis, :])
    circ = np.minimum(delta, 2.0 * np.pi - delta)
    theta = grid[np.argmin(circ, axis=1)]     # argmin keeps the first (smaller) tie
    return np.where(phi_star == 0.0, 0.0, theta)


def build_amplitude_problem(
    sub: PhaseSubproblem, theta_t: np.ndarray, theta_r: np.ndarray, min_per_side: int
) -> AmplitudeProblem:
    N = len(theta_t)
    e_t = np.exp(1j * theta_t)
    e_r = np.exp(1j * theta_r)
    return AmplitudeProblem(
        gain_t=2.0 * np.real(sub.omega_t * e_t),
        gain_r=2.0 * np.real(sub.omega_r * e_r),
        quad_t=np.real(np.conj(e_t)[:, np.newaxis] * sub.Omega_t * e_t[np.newaxis, :]),
        quad_r=np.real(np.conj(e_r)[:, np.newaxis] * sub.Omega_r * e_r[np.newaxis, :]),
        lo=min_per_side,
        hi=N - min_per_side,
    )


@lru_cache(maxsize=8)
def _feasible_bits(N: int, lo: int, hi: int) -> np.ndarray:
    if N > 22:
        raise ValueError(f"exhaustive enumeration over 2^{N} assignments; lower n_exact")
    codes = np.arange(1 << N, dtype=np.int64)
    bits = ((codes[:, np.newaxis] >> np.arange(N)) & 1).astype(float)
    ones = bits.sum(axis=1)
    return bits[(ones >= lo) & (ones <= hi)]


def _enumerate_exact(prob: AmplitudeProblem) -> np.ndarray:
    # fold the complement side into one quadratic form:
    #   g(x) = const + c.x - x^T (quad_t + quad_r) x
    # with c = gain_t - gain_r + 2 quad_r 1; the constant drops out of argmax
    bits = _feasible_bits(len(prob.gain_t), prob.lo, prob.hi)
    if bits.shape[0] == 0:
        raise Infeasible(f"no assignment satisfies {prob.lo} <= sum <= {prob.hi}")
    c = prob.linear_net + 2.0 * prob.quad_r.sum(axis=1)
    quad = prob.quad_t + prob.quad_r
    vals = bits @ c - ((bits @ quad) * bits).sum(axis=1)
    return bits[int(np.argmax(vals))].astype(bool)


class _SearchState:
    """Incremental objective bookkeeping for flip/swap local search."""

    def __init__(self, prob: AmplitudeProblem, x: np.ndarray):
        self.prob = prob
        self.x = x.astype(float)
        self.u = prob.quad_t @ self.x
        self.v = prob.quad_r @ (1.0 - self.x)

    def flip_deltas(self) -> np.ndarray:
        d = 1.0 - 2.0 * self.x
        p = self.prob
        return (
            d * p.linear_net
            - (2.0 * d * self.u + np.diag(p.quad_t))
            + (2.0 * d * self.v - np.diag(p.quad_r))
        )

    def apply_flip(self, n: int):
        d = 1.0 - 2.0 * self.x[n]
        self.x[n] += d
        self.u += d * self.prob.quad_t[:, n]
        self.v -= d * self.prob.quad_r[:, n]


def _local_search(prob: AmplitudeProblem, x0: np.ndarray, max_flips: int) -> np.ndarray:
    state = _SearchState(prob, x0)
    for _ in range(max_flips):
        deltas = state.flip_deltas()
        card = int(state.x.sum())
        t_idx = np.flatnonzero(state.x > 0.5)
        r_idx = np.flatnonzero(state.x < 0.5)

        best_gain, best_move = 0.0, None
        allowed = np.where(state.x > 0.5, card - 1 >= prob.lo, card + 1 <= prob.hi)
        if allowed.any():
            n = int(np.flatnonzero(allowed)[np.argmax(deltas[allowed])])
            if deltas[n] > best_gain:
                best_gain, best_move = deltas[n], (n,)
        if len(t_idx) and len(r_idx):
            cross = 2.0 * (
                prob.quad_t[np.ix_(t_idx, r_idx)] + prob.quad_r[np.ix_(t_idx, r_idx)]
            )
            pair = deltas[t_idx][:, np.newaxis] + deltas[r_idx][np.newaxis, :] + cross
            i, j = np.unravel_index(int(np.argmax(pair)), pair.shape)
            if pair[i, j] > best_gain:
                best_gain, best_move = pair[i, j], (int(t_idx[i]), int(r_idx[j]))

        if best_move is None:
            break
        for n in best_move:
            state.apply_flip(n)
    return state.x > 0.5


def _greedy_start(prob: AmplitudeProblem) -> np.ndarray:
    x = prob.linear_net > 0.0
    order = np.argsort(prob.linear_net)      # ascending preference for t
    need = prob.lo - int(x.sum())
    for n in order[::-1]:                    # strongest t-candidates first
        if need <= 0:
            break
        if not x[n]:
            x[n] = True
            need -= 1
    excess = int(x.sum()) - prob.hi
    for n in order:                          # weakest t-members first
        if excess <= 0:
            break
        if x[n]:
            x[n] = False
            excess -= 1
    return x


def _random_feasible(prob: AmplitudeProblem, rng: np.random.Generator) -> np.ndarray:
    N = len(prob.gain_t)
    for _ in range(1000):                    # rejection keeps the law uniform
        x = rng.integers(0, 2, size=N).astype(bool)
        if prob.lo <= int(x.sum()) <= prob.hi:
            return x
    x = np.zeros(N, dtype=bool)              # unreachable for sane N; fixed split
    x[: prob.lo] = True
    return x


def phase_coordinate_pass(
    sub: PhaseSubproblem,
    alpha_t: np.ndarray,
    theta_t: np.ndarray,
    theta_r: np.ndarray,
    Q: int,
):
    """One Gauss-Seidel sweep of exact per-element phase updates.

    Holding every other element fixed, the objective restricted to element
    n's live side is 2 Re{e^{j theta} z_n} with z_n = omega_n - conj((Omega
    phi)_n - Omega_nn phi_n); its grid maximizer is the circular projection
    of -arg(z_n), so live-side updates never decrease R_phi.  Dead-side
    phases are refreshed to their own maximizer too: that leaves R_phi
    untouched (their phi entry is zero) but hands the amplitude program the
    best landing phase for each potential side flip.
    """
    new_theta = {}
    for side, omega, Omega, theta, live in (
        ("t", sub.omega_t, sub.Omega_t, theta_t, alpha_t),
        ("r", sub.omega_r, sub.Omega_r, theta_r, ~alpha_t),
    ):
        theta = theta.copy()
        phi = np.where(live, np.exp(1j * theta), 0.0 + 0.0j)
        y = Omega @ phi
        for n in range(len(theta)):
            z = omega[n] - np.conj(y[n] - Omega[n, n] * phi[n])
            if z == 0.0:
                continue
            best = project_phases(np.array([np.conj(z)]), Q)[0]
            if best != theta[n]:
                theta[n] = best
                if live[n]:
                    delta = np.exp(1j * best) - phi[n]
                    phi[n] += delta
                    y += Omega[:, n] * delta
        new_theta[side] = theta
    return new_theta["t"], new_theta["r"]


def ascend_star_state(
    sub: PhaseSubproblem,
    alpha_t: np.ndarray,
    theta_t: np.ndarray,
    theta_r: np.ndarray,
    cfg: SystemConfig,
    rng: np.random.Generator | None = None,
    max_passes: int = 4,
    amplitudes_free: bool = True,
):
    """Alternate exact phase sweeps with the amplitude program.

    Monotone in R_phi by construction, so (through the reformulation's
    max-over-auxiliaries property) it never trades away true sum rate.
    Stops at a joint fixed point of both moves or after max_passes sweeps.
    Returns (alpha_t, theta_t, theta_r, R_phi value).
    """
    prob = build_amplitude_problem(sub, theta_t, theta_r, cfg.min_elements_per_side)
    if amplitudes_free:
        cand = optimize_amplitudes(prob, cfg, rng)
        if prob.evaluate(cand) > prob.evaluate(alpha_t):
            alpha_t = cand
    for _ in range(max_passes):
        new_t, new_r = phase_coordinate_pass(sub, alpha_t, theta_t, theta_r, cfg.Q)
        if np.array_equal(new_t, theta_t) and np.array_equal(new_r, theta_r):
            break
        theta_t, theta_r = new_t, new_r
        prob = build_amplitude_problem(sub, theta_t, theta_r, cfg.min_elements_per_side)
        if amplitudes_free:
            cand = optimize_amplitudes(prob, cfg, rng)
            if prob.evaluate(cand) > prob.evaluate(alpha_t):
                alpha_t = cand
    return alpha_t, theta_t, theta_r, prob.evaluate(alpha_t)


def optimize_star_state(
    sub: PhaseSubproblem,
    alpha_t: np.ndarray,
    theta_t: np.ndarray,
    theta_r: np.ndarray,
    cfg: SystemConfig,
    rng: np.random.Generator | None = None,
    amplitudes_free: bool = True,
    n_random: int = 0,
    operating_q: int | None = None,
    local_only: bool = False,
):
    """Full surface update: best of several monotone ascents.

    One ascent starts from the incumbent state (so the block never falls
    below it), one from the grid projection of the continuous stationary
    point (the exploratory jump), and optionally n_random more from
    uniformly drawn phases.  Random start angles are drawn continuously and
    then snapped to the grid, so the stream consumption does not depend on
    the quantization level.  With amplitudes frozen only the phase sweeps
    run.  local_only restricts the block to the incumbent ascent: a pure
    polish that stays in the current basin.
    """
    Q = cfg.Q if operating_q is None else operating_q
    if Q != cfg.Q:
        cfg = dataclasses.replace(cfg, Q=Q)
    if local_only:
        a, th_t, th_r, _ = ascend_star_state(
            sub, alpha_t, theta_t, theta_r, cfg, rng, amplitudes_free=amplitudes_free
        )
        return a, th_t, th_r
    phi_t, phi_r = continuous_stationary_point(sub)
    starts = [(theta_t, theta_r), (project_phases(phi_t, Q), project_phases(phi_r, Q))]
    if n_random > 0 and rng is not None:
        N = len(theta_t)
        for _ in range(n_random):
            angles = rng.uniform(0.0, 2.0 * np.pi, size=(2, N))
            starts.append(
                (
                    project_phases(np.exp(1j * angles[0]), Q),
                    project_phases(np.exp(1j * angles[1]), Q),
                )
            )
    best = None
    for th_t, th_r in starts:
        result = ascend_star_state(
            sub, alpha_t, th_t, th_r, cfg, rng, amplitudes_free=amplitudes_free
        )
        if best is None or result[3] > best[3]:
            best = result
    return best[0], best[1], best[2]


def optimize_amplitudes(
    prob: AmplitudeProblem, cfg: SystemConfig, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Best t-side assignment under the coverage bound.

    Exact (vectorized enumeration) for N <= cfg.n_exact; otherwise greedy
    construction plus best-improvement 1-flip/2-swap local search with
    cfg.ls.restarts seeded restarts.  Ties across restarts resolve to the
    lowest restart index.
    """
    N = len(prob.gain_t)
    if prob.lo > prob.hi:
        raise Infeasible(f"coverage bound needs 2*{prob.lo} <= {N}")
    if N <= cfg.n_exact:
        return _enumerate_exact(prob)
    if rng is None:
        rng = substream(cfg.seed, 7)
    best_x, best_val = None, -np.inf
    for restart in range(cfg.ls.restarts):
        x0 = _greedy_start(prob) if restart == 0 else _random_feasible(prob, rng)
        x = _local_search(prob, x0, cfg.ls.max_flips)
        val = prob.evaluate(x)
        if val > best_val:
            best_x, best_val = x, val
    return best_x
