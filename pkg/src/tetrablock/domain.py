"""Geometry of the closed tetrablock and its distinguished boundary.

A point ``(x1, x2, x3)`` lies in the closed tetrablock when some 2x2
contraction ``A`` has ``a11 = x1``, ``a22 = x2`` and ``det A = x3``.  The
off-diagonal product is then forced, ``a12 a21 = x1 x2 - x3``, and the
singular values of a 2x2 matrix satisfy ``s1^2 + s2^2 = ||A||_F^2`` and
``s1 s2 = |det A|``.  Only the moduli ``|a12|, |a21|`` enter either quantity,
so the search over off-diagonal factorisations may take ``a12 = t > 0`` real
and ``a21 = (x1 x2 - x3) / t`` without loss.  ``||A||_F^2`` is smallest when
``|a12| = |a21|``, which gives the closed form used by
:func:`point_in_closure`; :func:`brute_force_membership` searches over ``t``
directly and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import adj, as_matrix, commutator_residual, operator_norm
from .report import FAIL, VerificationReport


@dataclass(frozen=True)
class TetraPoint:
    x1: complex
    x2: complex
    x3: complex

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = complex(getattr(self, name))
            if not np.isfinite(v.real) or not np.isfinite(v.imag):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.x1, self.x2, self.x3)


@dataclass(frozen=True)
class MembershipVerdict:
    in_closure: bool
    in_distinguished_boundary: bool
    witness_norm: float


def _as_point(p) -> TetraPoint:
    return p if isinstance(p, TetraPoint) else TetraPoint(*p)


def closed_form_witness_norm(x1, x2, x3):
    """Smallest ``||A||`` over 2x2 matrices with the given diagonal and det.

    Accepts scalars or broadcastable arrays.
    """
    x1, x2, x3 = (np.asarray(v, dtype=np.complex128) for v in (x1, x2, x3))
    d = np.abs(x3)
    frob2 = np.abs(x1) ** 2 + np.abs(x2) ** 2 + 2 * np.abs(x1 * x2 - x3)
    disc = np.sqrt(np.maximum(frob2 ** 2 - 4 * d ** 2, 0.0))
    return np.sqrt(0.5 * (frob2 + disc))


def point_in_closure(p, tol: float = 1e-12) -> MembershipVerdict:
    """Closed-form membership in the closed tetrablock.

    Membership holds iff ``|x3| <= 1`` and
    ``|x1|^2 + |x2|^2 + 2|x1 x2 - x3| <= 1 + |x3|^2``, which is equivalent
    to the minimal witness norm being at most one.  The verdict is taken on
    the inequalities, each relaxed by ``tol``.  The witness norm itself is
    badly conditioned where both singular values of the witness equal one
    (every point of the distinguished boundary is such a point): rounding of
    order ``eps`` there moves it by order ``sqrt(eps)``.  The inequalities
    have no such loss.
    """
    p = _as_point(p)
    a, b, c = p.as_tuple()
    witness = float(closed_form_witness_norm(a, b, c))
    d = abs(c)
    gap = abs(a) ** 2 + abs(b) ** 2 + 2 * abs(a * b - c) - 1 - d * d
    inside = d <= 1 + tol and gap <= tol
    return MembershipVerdict(bool(inside), bool(inside and point_in_bE(p, tol=max(tol, 1e-12))),
                             witness)


def _norms_2x2(x1, x2, c, t):
    """Spectral norms of ``[[x1, t], [c/t, x2]]``, broadcasting over ``t``."""
    A = np.empty(np.broadcast(x1, t).shape + (2, 2), dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(t > 0, c / np.where(t > 0, t, 1.0), 0.0)
    A[..., 0, 0] = x1
    A[..., 0, 1] = t
    A[..., 1, 0] = low
    A[..., 1, 1] = x2
    gram = np.conj(np.swapaxes(A, -1, -2)) @ A
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[..., -1], 0.0))


def brute_force_witness_norms(points, grid: int = 120, rounds: int = 9,
                              decades: float = 12.0) -> np.ndarray:
    """Vectorised direct search for the minimal 2x2 witness norm.

    ``points`` is an ``(N, 3)`` complex array.  For each point the norm of
    ``[[x1, t], [(x1 x2 - x3)/t, x2]]`` is sampled on a logarithmic grid of
    ``t`` spanning ``10^-decades .. 10^decades`` and the best cell is zoomed
    into ``rounds`` times.  ``t = 0`` is also tried, which is the exact
    optimum when ``x1 x2 = x3``.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))
    x1, x2, x3 = pts[:, 0:1], pts[:, 1:2], pts[:, 2:3]
    c = x1 * x2 - x3
    lo = np.full((len(pts), 1), -decades)
    hi = np.full((len(pts), 1), decades)
    best = _norms_2x2(x1[:, 0], x2[:, 0], c[:, 0], np.zeros(len(pts)))
    best = np.where(c[:, 0] == 0, best, np.inf)
    k = grid
    for _ in range(rounds):
        u = np.linspace(0.0, 1.0, k)[None, :]
        logt = lo + (hi - lo) * u
        vals = _norms_2x2(x1, x2, c, 10.0 ** logt)
        j = np.argmin(vals, axis=1)
        rows = np.arange(len(pts))
        best = np.minimum(best, vals[rows, j])
        cell = (hi - lo)[:, 0] / (k - 1)
        centre = logt[rows, j]
        lo = (centre - cell)[:, None]
        hi = (centre + cell)[:, None]
        k = 41
    return best


def brute_force_membership(p, grid: int = 120, tol: float = 1e-12) -> MembershipVerdict:
    """Direct-search oracle for :func:`point_in_closure`."""
    p = _as_point(p)
    w = float(brute_force_witness_norms(np.array([p.as_tuple()]), grid)[0])
    inside = w <= 1 + tol and abs(p.x3) <= 1 + tol
    return MembershipVerdict(bool(inside), bool(inside and point_in_bE(p, tol=max(tol, 1e-12))), w)


def point_in_bE(p, tol: float = 1e-9) -> bool:
    """Distinguished-boundary test: ``|x3| = 1``, ``x1 = conj(x2) x3``, ``|x2| <= 1``.

    This is the scalar case of the operator characterisation of tetrablock
    unitaries (``N3`` unitary, ``N2`` contraction, ``N1 = N2* N3``).
    """
    x1, x2, x3 = _as_point(p).as_tuple()
    return (abs(abs(x3) - 1) <= tol
            and abs(x1 - np.conj(x2) * x3) <= tol
            and abs(x2) <= 1 + tol)


def joint_eigenvalues(mats, rng: np.random.Generator | None = None,
                      cluster_tol: float = 1e-8, _depth: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Joint eigenvalues of commuting normal matrices.

    Diagonalises a random real combination by Schur decomposition; clusters
    of nearly equal eigenvalues are re-split with a fresh combination of the
    compressed matrices.  Returns ``(values, Z)`` with ``values`` of shape
    ``(n, len(mats))`` and ``Z`` unitary.
    """
    from scipy.linalg import schur

    rng = np.random.default_rng(12345) if rng is None else rng
    mats = [as_matrix(M, square=True) for M in mats]
    n = mats[0].shape[0]
    if n == 0:
        return np.zeros((0, len(mats)), dtype=np.complex128), np.zeros((0, 0), dtype=np.complex128)
    coeffs = rng.uniform(0.5, 1.5, len(mats)) * rng.choice([-1, 1], len(mats))
    combo = sum(a * M for a, M in zip(coeffs, mats))
    T, Z = schur(combo, output="complex")
    lam = np.diag(T)
    order = np.lexsort((lam.imag, lam.real))
    Z = Z[:, order]
    lam = lam[order]
    scale = max(1.0, float(np.max(np.abs(lam))))
    groups, start = [], 0
    for i in range(1, n + 1):
        if i == n or abs(lam[i] - lam[i - 1]) > cluster_tol * scale:
            groups.append(slice(start, i))
            start = i
    if _depth < 3:
        for g in groups:
            if g.stop - g.start > 1:
                sub = [adj(Z[:, g]) @ M @ Z[:, g] for M in mats]
                spread = max(operator_norm(S - np.trace(S) / S.shape[0] * np.eye(S.shape[0]))
                             for S in sub)
                if spread > cluster_tol * scale:
                    _, W = joint_eigenvalues(sub, rng, cluster_tol, _depth + 1)
                    Z[:, g] = Z[:, g] @ W
    vals = np.stack([np.diag(adj(Z) @ M @ Z) for M in mats], axis=1)
    return vals, Z


def _check_square_family(mats) -> list[np.ndarray]:
    mats = [as_matrix(M, square=True) for M in mats]
    if len({M.shape for M in mats}) != 1:
        raise ValueError("dimension mismatch: " + ", ".join(str(M.shape) for M in mats))
    return mats


def is_tetrablock_unitary(N1, N2, N3, tol: float = 1e-9) -> VerificationReport:
    """Check the operator characterisation of a tetrablock unitary.

    Commutation, unitarity of ``N3``, contractivity of ``N2`` and
    ``N1 = N2* N3``; normality of ``N1``, ``N2``; and, when all of those
    pass, every joint eigenvalue of the (commuting normal) triple must lie
    in the distinguished boundary.
    """
    N1, N2, N3 = _check_square_family((N1, N2, N3))
    n = N1.shape[0]
    rep = VerificationReport(config={"tol": tol})
    norms = [operator_norm(M) for M in (N1, N2, N3)]
    names = ("N1", "N2", "N3")
    for i in range(3):
        for j in range(i + 1, 3):
            rep.add(f"commute_{names[i]}_{names[j]}",
                    commutator_residual((N1, N2, N3)[i], (N1, N2, N3)[j]),
                    tol * max(1.0, norms[i] * norms[j]))
    I = np.eye(n)
    rep.add("N3_isometry", operator_norm(adj(N3) @ N3 - I), tol)
    rep.add("N3_coisometry", operator_norm(N3 @ adj(N3) - I), tol)
    rep.add("N2_contraction", max(norms[1] - 1.0, 0.0), tol)
    rep.add("N1_eq_N2adj_N3", operator_norm(N1 - adj(N2) @ N3), tol * max(1.0, norms[1] * norms[2]))
    rep.add("N1_normal", commutator_residual(N1, adj(N1)), tol * max(1.0, norms[0] ** 2))
    rep.add("N2_normal", commutator_residual(N2, adj(N2)), tol * max(1.0, norms[1] ** 2))
    if rep.failures():
        rep.skip("joint_spectrum_in_bE", "prerequisite checks failed")
        return rep
    vals, _ = joint_eigenvalues((N1, N2, N3))
    bE_tol = max(tol, 1e-8)
    worst = 0.0
    for x1, x2, x3 in vals:
        worst = max(worst, abs(abs(x3) - 1), abs(x1 - np.conj(x2) * x3), max(abs(x2) - 1, 0.0))
    rep.add("joint_spectrum_in_bE", worst, bE_tol)
    rep.meta["joint_eigenvalues"] = [[[z.real, z.imag] for z in row] for row in vals]
    return rep


def gamma_unitary_family_check(N1, N2, N3, z_samples: int = 16, tol: float = 1e-9) -> VerificationReport:
    """Check that ``(N1 + z N2, z N3)`` is a Gamma-unitary for sampled ``|z| = 1``.

    A pair ``(s, p)`` is a Gamma-unitary when ``p`` is unitary, ``s = s* p``
    and ``||s|| <= 2``, with ``s`` and ``p`` commuting.  These conditions are
    the standard characterisation from the symmetrised-bidisc literature.
    Commutation is tested across all pairs of samples, ``[R_z, U_w] = 0``.
    """
    N1, N2, N3 = _check_square_family((N1, N2, N3))
    n = N1.shape[0]
    zs = np.exp(2j * np.pi * np.arange(z_samples) / z_samples)
    Rs = [N1 + z * N2 for z in zs]
    Us = [z * N3 for z in zs]
    I = np.eye(n)
    unit = max(max(operator_norm(adj(U) @ U - I), operator_norm(U @ adj(U) - I)) for U in Us)
    bound = max(max(operator_norm(R) - 2.0, 0.0) for R in Rs)
    selfrel = max(operator_norm(R - adj(R) @ U) for R, U in zip(Rs, Us))
    comm = max(commutator_residual(R, U) for R in Rs for U in Us)
    scale = max(1.0, max(operator_norm(R) for R in Rs))
    rep = VerificationReport(config={"tol": tol, "z_samples": z_samples})
    rep.add("U_z_unitary", unit, tol)
    rep.add("R_z_norm_le_2", bound, tol)
    rep.add("R_z_eq_R_z_adj_U_z", selfrel, tol * scale)
    rep.add("R_z_U_w_commute", comm, tol * scale)
    return rep
