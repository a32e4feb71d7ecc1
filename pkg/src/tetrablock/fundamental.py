"""Fundamental operators of a tetrablock contraction and their identities.

For a commuting triple ``(A, B, P)`` the fundamental operators ``F1, F2``
live on the defect space of ``P`` and solve

    A - B* P = D_P F1 D_P,      B - A* P = D_P F2 D_P.

``G1, G2`` are the same objects for the adjoint triple ``(A*, B*, P*)``.
Solutions are stored in defect-space coordinates (``r x r``) and lifted to
``n x n`` operators only when an identity on the whole space is checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_ANGULAR_GRID,
    DEFAULT_RANK_TOL,
    DefectSpace,
    adj,
    as_matrix,
    commutator,
    commutator_residual,
    defect_operator,
    numerical_radius,
    operator_norm,
)
from .report import FAIL, INCONCLUSIVE, PASS, VerificationReport

DEFAULT_TOL = 1e-9


class FundamentalEquationError(ValueError):
    """The fundamental equations have no solution at the requested tolerance."""


@dataclass(frozen=True)
class OperatorTriple:
    """A triple ``(A, B, P)`` of ``n x n`` matrices.

    Construction validates shapes only.  Commutation and contractivity are
    reported by :func:`necessary_checks` so that corrupted inputs can still
    flow through the verification pipeline.
    """

    A: np.ndarray
    B: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        mats = [as_matrix(getattr(self, k), square=True, name=k) for k in "ABP"]
        if len({M.shape for M in mats}) != 1:
            raise ValueError("A, B, P must have equal dimensions")
        for k, M in zip("ABP", mats):
            M.setflags(write=False)
            object.__setattr__(self, k, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def adjoint(self) -> "OperatorTriple":
        return OperatorTriple(adj(self.A), adj(self.B), adj(self.P))


@dataclass(frozen=True)
class FundamentalPair:
    """Solutions of the fundamental equations in defect coordinates.

    For the adjoint solve the two fields hold ``G1, G2`` on the defect
    space of ``P*``.
    """

    F1: np.ndarray
    F2: np.ndarray
    space: DefectSpace
    residuals: tuple[float, float]

    @property
    def dim(self) -> int:
        return self.space.dim

    def lifted(self) -> tuple[np.ndarray, np.ndarray]:
        return self.space.lift(self.F1), self.space.lift(self.F2)


def necessary_checks(t: OperatorTriple, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Conditions every tetrablock contraction satisfies.

    Pairwise commutation and ``||A||, ||B||, ||P|| <= 1`` (each coordinate
    function is bounded by one on the closed tetrablock).
    """
    rep = VerificationReport()
    mats = {"A": t.A, "B": t.B, "P": t.P}
    norms = {k: operator_norm(M) for k, M in mats.items()}
    for x, y in (("A", "B"), ("A", "P"), ("B", "P")):
        rep.add(f"commute_{x}{y}", commutator_residual(mats[x], mats[y]),
                tol * max(1.0, norms[x] * norms[y]))
    for k in "ABP":
        rep.add(f"norm_{k}_le_1", max(norms[k] - 1.0, 0.0), tol)
    return rep


def _solve(A, B, P, rank_tol: float, tol: float) -> FundamentalPair:
    _, space = defect_operator(P, rank_tol)
    X = (A - adj(B) @ P, B - adj(A) @ P)
    J, d = space.embed, np.diag(space.coord_defect).real
    D = space.defect
    scale = tol * max(1.0, operator_norm(A) + operator_norm(B))
    sols, res = [], []
    for rhs in X:
        # D restricted to its range is diagonal and invertible in these coordinates.
        Y = (adj(J) @ rhs @ J) / np.outer(d, d) if space.dim else np.zeros((0, 0), complex)
        sols.append(Y)
        res.append(operator_norm(D @ space.lift(Y) @ D - rhs))
    if max(res, default=0.0) > scale:
        raise FundamentalEquationError(
            f"fundamental equation unsolvable at tolerance: residuals {res[0]:.3e}, "
            f"{res[1]:.3e} exceed {scale:.3e} (defect rank {space.dim})"
        )
    return FundamentalPair(sols[0], sols[1], space, (res[0], res[1]))


def solve_fundamental(t: OperatorTriple, rank_tol: float = DEFAULT_RANK_TOL,
                      tol: float = DEFAULT_TOL) -> FundamentalPair:
    """``F1, F2`` on the defect space of ``P`` (pseudoinverse solve, residual-certified)."""
    return _solve(t.A, t.B, t.P, rank_tol, tol)


def solve_adjoint_fundamental(t: OperatorTriple, rank_tol: float = DEFAULT_RANK_TOL,
                              tol: float = DEFAULT_TOL) -> FundamentalPair:
    """``G1, G2`` on the defect space of ``P*``."""
    return solve_fundamental(t.adjoint(), rank_tol, tol)


def _defects(t, fp, gp):
    return fp.space.defect, gp.space.defect


def defect_intertwining_residuals(t: OperatorTriple, fp: FundamentalPair) -> tuple[float, float]:
    """``D_P A = F1 D_P + F2* D_P P`` and ``D_P B = F2 D_P + F1* D_P P``."""
    F1, F2 = fp.lifted()
    D = fp.space.defect
    r1 = operator_norm(D @ t.A - F1 @ D - adj(F2) @ D @ t.P)
    r2 = operator_norm(D @ t.B - F2 @ D - adj(F1) @ D @ t.P)
    return r1, r2


def cross_intertwining_residuals(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair) -> tuple[float, float]:
    """``P Fi = Gi* P`` on the defect space of ``P``."""
    F1, F2 = fp.lifted()
    G1, G2 = gp.lifted()
    D = fp.space.defect
    P = t.P
    return (operator_norm((P @ F1 - adj(G1) @ P) @ D),
            operator_norm((P @ F2 - adj(G2) @ P) @ D))


def defect_product_residuals(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair) -> tuple[float, float]:
    """``D_P F1 = A D_P - D_{P*} G2 P`` and ``D_P F2 = B D_P - D_{P*} G1 P`` on the defect space."""
    F1, F2 = fp.lifted()
    G1, G2 = gp.lifted()
    D, Ds = _defects(t, fp, gp)
    P = t.P
    return (operator_norm((D @ F1 - (t.A @ D - Ds @ G2 @ P)) @ D),
            operator_norm((D @ F2 - (t.B @ D - Ds @ G1 @ P)) @ D))


def mixed_defect_residuals(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair) -> tuple[float, float]:
    """The two mixed identities linking ``F``'s and ``G``'s on the defect space of ``P*``."""
    F1, F2 = fp.lifted()
    G1, G2 = gp.lifted()
    D, Ds = _defects(t, fp, gp)
    Ps = adj(t.P)
    lhs1 = adj(F1) @ D @ Ds - F2 @ Ps
    rhs1 = D @ Ds @ G1 - Ps @ adj(G2)
    lhs2 = adj(F2) @ D @ Ds - F1 @ Ps
    rhs2 = D @ Ds @ G2 - Ps @ adj(G1)
    return operator_norm((lhs1 - rhs1) @ Ds), operator_norm((lhs2 - rhs2) @ Ds)


def commuting_normal_residuals(fp: FundamentalPair) -> tuple[float, float]:
    """``||[F1, F2]||`` and ``||[F1, F1*] - [F2, F2*]||``."""
    X1, X2 = fp.F1, fp.F2
    if fp.dim == 0:
        return 0.0, 0.0
    c1 = commutator_residual(X1, X2)
    c2 = operator_norm(commutator(X1, adj(X1)) - commutator(X2, adj(X2)))
    return c1, c2


def _condition_scale(fp: FundamentalPair) -> float:
    return max(1.0, operator_norm(fp.F1), operator_norm(fp.F2)) ** 2


def check_hypothesis_symmetry(t: OperatorTriple, fp: FundamentalPair | None = None,
                              gp: FundamentalPair | None = None, tol: float = DEFAULT_TOL,
                              rank_tol: float = DEFAULT_RANK_TOL) -> VerificationReport:
    """The commutation condition holds for ``(F1, F2)`` iff it holds for ``(G1, G2)``.

    Each side is classified with a dead zone: satisfied at ``tol``, violated
    above ``10 * tol``, otherwise inconclusive.  Pre-solved pairs may be
    passed to avoid solving twice.
    """
    fp = solve_fundamental(t, rank_tol, tol) if fp is None else fp
    gp = solve_adjoint_fundamental(t, rank_tol, tol) if gp is None else gp
    rep = VerificationReport(config={"tol": tol})
    sides = {}
    for label, pair in (("F", fp), ("G", gp)):
        resid = max(commuting_normal_residuals(pair))
        thr = tol * _condition_scale(pair)
        if resid <= thr:
            sides[label] = "satisfied"
        elif resid > 10 * thr:
            sides[label] = "violated"
        else:
            sides[label] = "dead-zone"
        rep.meta[f"commuting_normal_{label}"] = {"residual": resid, "threshold": thr,
                                            "class": sides[label]}
    note = f"F side {sides['F']}, G side {sides['G']}"
    if "dead-zone" in sides.values():
        rep.add_verdict("hypothesis_symmetry", INCONCLUSIVE, note=note)
    else:
        rep.add_verdict("hypothesis_symmetry", PASS if sides["F"] == sides["G"] else FAIL,
                        note=note)
    return rep


def radius_certificates(fp: FundamentalPair, gp: FundamentalPair, z_samples: int = 16,
                        tol: float = DEFAULT_TOL,
                        angular_grid: int = DEFAULT_ANGULAR_GRID) -> VerificationReport:
    """``w(F1 + z F2) <= 1`` and ``w(G2 + z G1*) <= 1`` on a unit-circle grid."""
    zs = np.exp(2j * np.pi * np.arange(z_samples) / z_samples)
    wF = max((numerical_radius(fp.F1 + z * fp.F2, angular_grid) for z in zs), default=0.0)
    wG = max((numerical_radius(gp.F2 + z * adj(gp.F1), angular_grid) for z in zs), default=0.0)
    rep = VerificationReport(config={"tol": tol, "z_samples": z_samples,
                                     "angular_grid": angular_grid})
    rep.add("w_F1_plus_zF2_le_1", max(wF - 1.0, 0.0), tol, note=f"max radius {wF:.12f}")
    rep.add("w_G2_plus_zG1adj_le_1", max(wG - 1.0, 0.0), tol, note=f"max radius {wG:.12f}")
    rep.meta.update(max_radius_F=wF, max_radius_G=wG)
    return rep
