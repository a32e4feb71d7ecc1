"""Dense complex linear algebra used by every other module.

Operators on finite spaces are plain ``numpy`` complex arrays.  This module
adds the handful of operator-theoretic primitives the dilation machinery
needs: operator norm, numerical radius, defect operators with an isometric
coordinate embedding of their range, and commutator residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import unitary_group

DEFAULT_RANK_TOL = 1e-10
DEFAULT_ANGULAR_GRID = 720


class NotAContractionError(ValueError):
    """Raised when an operator that must be a contraction has norm > 1."""


def as_matrix(M, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-d complex128 array, validating shape."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def adj(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def operator_norm(M) -> float:
    """Largest singular value; 0 for an empty matrix."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def scaled_tol(tol: float, *norms: float) -> float:
    """``tol * max(1, prod(norms))`` -- residual thresholds are relative."""
    return tol * max(1.0, float(np.prod(norms)) if norms else 1.0)


@dataclass(frozen=True)
class SpectralFactorization:
    """Hermitian eigendecomposition ``M = Q diag(eigenvalues) Q*``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ adj(Q)


def hermitian_eig(M) -> SpectralFactorization:
    M = as_matrix(M, square=True)
    H = 0.5 * (M + adj(M))
    w, Q = np.linalg.eigh(H)
    return SpectralFactorization(w, Q)


def _top_eig_rotated(M: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    phases = np.exp(1j * thetas)[:, None, None]
    H = 0.5 * (phases * M[None] + phases.conj() * adj(M)[None])
    return np.linalg.eigvalsh(H)[:, -1]


def numerical_radius(M, angular_grid: int = DEFAULT_ANGULAR_GRID) -> float:
    """Numerical radius ``max |<Mv, v>|`` over unit vectors.

    Evaluates ``lambda_max(Re(e^{i theta} M))`` on a uniform angle grid and
    refines around the best grid angle with a bounded scalar search.  The
    result is a lower bound that converges to ``w(M)`` as the grid refines.
    """
    M = as_matrix(M, square=True)
    if angular_grid < 8:
        raise ValueError("angular_grid must be at least 8")
    if M.shape[0] == 0:
        return 0.0
    if M.shape[0] == 1:
        return float(abs(M[0, 0]))
    thetas = np.linspace(0.0, 2 * np.pi, angular_grid, endpoint=False)
    vals = _top_eig_rotated(M, thetas)
    k = int(np.argmax(vals))
    best = float(vals[k])
    step = 2 * np.pi / angular_grid
    res = minimize_scalar(
        lambda th: -_top_eig_rotated(M, np.array([th]))[0],
        bounds=(thetas[k] - step, thetas[k] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(best, float(-res.fun))


@dataclass(frozen=True)
class DefectSpace:
    """Range of a defect operator with an isometric coordinate embedding.

    ``embed`` is ``n x r`` with orthonormal columns spanning ``ran(defect)``.
    ``coord_defect`` is the (diagonal, positive) restriction of the defect
    operator to its range, written in those coordinates.
    """

    dim: int
    embed: np.ndarray
    defect: np.ndarray
    coord_defect: np.ndarray

    @property
    def n(self) -> int:
        return self.embed.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.embed @ adj(self.embed)

    def lift(self, X: np.ndarray) -> np.ndarray:
        """Map an ``r x r`` coordinate operator to the ``n x n`` operator on H."""
        return self.embed @ X @ adj(self.embed)


def defect_operator(P, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[np.ndarray, DefectSpace]:
    """``D_P = (I - P*P)^{1/2}`` and its defect space.

    Eigenvalues of ``I - P*P`` at or below ``rank_tol * max(1, lambda_max)``
    are treated as zero, which both clamps round-off negatives and fixes the
    defect rank.
    """
    P = as_matrix(P, square=True, name="P")
    n = P.shape[0]
    if operator_norm(P) > 1 + rank_tol:
        raise NotAContractionError(f"||P|| = {operator_norm(P):.17g} exceeds 1")
    if n == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return empty, DefectSpace(0, empty, empty, empty)
    fac = hermitian_eig(np.eye(n) - adj(P) @ P)
    w, Q = fac.eigenvalues, fac.eigenvectors
    cut = rank_tol * max(1.0, float(w[-1]))
    keep = w > cut
    J = Q[:, keep]
    roots = np.sqrt(w[keep])
    D = (J * roots) @ adj(J)
    space = DefectSpace(int(keep.sum()), J, D, np.diag(roots).astype(np.complex128))
    return D, space


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def commutator_residual(X, Y) -> float:
    X = as_matrix(X, square=True, name="X")
    Y = as_matrix(Y, square=True, name="Y")
    if X.shape != Y.shape:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return operator_norm(commutator(X, Y))


def intertwining_residuals(P, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[float, float]:
    """Residuals of ``P D_P = D_{P*} P`` and ``D_P P* = P* D_{P*}``."""
    P = as_matrix(P, square=True, name="P")
    DP, _ = defect_operator(P, rank_tol)
    DPs, _ = defect_operator(adj(P), rank_tol)
    r1 = operator_norm(P @ DP - DPs @ P)
    r2 = operator_norm(DP @ adj(P) - adj(P) @ DPs)
    return r1, r2


def numerical_rank(M: np.ndarray, rel_tol: float = 1e-10) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(
        2j * np.pi * rng.random((1, 1))
    )
