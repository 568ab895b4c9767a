"""Dense complex linear-algebra kernel shared by the solvers.

Complex matrices are plain ``numpy.complex128`` arrays (row-major, finite
entries).  The two nontrivial operations delegate to LAPACK through numpy,
which is deterministic for a fixed input; failures surface as the typed
exceptions below so callers can ridge-regularize or abort instead of
propagating garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-10


class NotPositiveDefinite(Exception):
    """Cholesky factorization hit a nonpositive pivot; caller should ridge."""


class NoConvergence(Exception):
    """Eigensolver iteration cap exceeded (ill-conditioned input)."""


@dataclass(frozen=True)
class HermitianEig:
    """Eigendecomposition B = V diag(w) V^H with w ascending, V unitary."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _require_hermitian(B: np.ndarray, name: str) -> np.ndarray:
    B = np.asarray(B, dtype=np.complex128)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {B.shape}")
    scale = np.linalg.norm(B)
    if np.linalg.norm(B - B.conj().T) > HERMITIAN_RTOL * max(scale, 1.0e-300):
        raise ValueError(f"{name} is not Hermitian within {HERMITIAN_RTOL:g}")
    return B


def hermitian_solve(B: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Solve B x = c for Hermitian positive-definite B.

    Raises NotPositiveDefinite when the Cholesky factorization fails, which
    signals the caller to apply a ridge before retrying.
    """
    B = _require_hermitian(B, "B")
    c = np.asarray(c, dtype=np.complex128)
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(str(err)) from err
    y = np.linalg.solve(L, c)
    return np.linalg.solve(L.conj().T, y)


def eig_hermitian(B: np.ndarray) -> HermitianEig:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    B = _require_hermitian(B, "B")
    try:
        w, V = np.linalg.eigh(B)
    except np.linalg.LinAlgError as err:
        raise NoConvergence(str(err)) from err
    return HermitianEig(eigenvalues=w, eigenvectors=V)
