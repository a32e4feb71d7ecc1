"""End-to-end verification pipeline for one instance."""

from __future__ import annotations

from typing import Callable

from .config import InstanceSpec, RunConfig
from .dilation import Dilation, build_unitary_dilation
from .fundamental import (
    FundamentalPair,
    OperatorTriple,
    commuting_normal_residuals,
    check_hypothesis_symmetry,
    necessary_checks,
    radius_certificates,
    solve_adjoint_fundamental,
    solve_fundamental,
    defect_intertwining_residuals,
    cross_intertwining_residuals,
    defect_product_residuals,
    mixed_defect_residuals,
)
from .generators import build_instance
from .linalg import operator_norm
from .report import VerificationReport
from .verify import (
    minimality_rank_check,
    reconstruct_uniqueness,
    verify_block_identities,
    verify_dilation_equality,
    verify_zero_block_structure,
    verify_schaffer_structure,
    verify_dilation_conditions,
)

DILATION_STAGES = ("dilation", "equality", "schaffer", "block_identities", "zero_blocks",
                   "uniqueness", "minimality")


def _condition_holds(pair: FundamentalPair, tol: float) -> tuple[bool, float]:
    resid = max(commuting_normal_residuals(pair))
    scale = max(1.0, operator_norm(pair.F1), operator_norm(pair.F2)) ** 2
    return resid <= tol * scale, resid


def fundamental_residual_checks(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair,
                                tol: float) -> VerificationReport:
    """The four fundamental-equation residuals at ``tol * max(1, ||A|| + ||B||)``."""
    rep = VerificationReport()
    thr = tol * max(1.0, operator_norm(t.A) + operator_norm(t.B))
    rep.add("F1", fp.residuals[0], thr)
    rep.add("F2", fp.residuals[1], thr)
    rep.add("G1", gp.residuals[0], thr)
    rep.add("G2", gp.residuals[1], thr)
    return rep


def intertwining_checks(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair,
                        tol: float) -> VerificationReport:
    rep = VerificationReport()
    scale = max(1.0, operator_norm(t.A), operator_norm(t.B), operator_norm(t.P),
                operator_norm(fp.F1), operator_norm(fp.F2),
                operator_norm(gp.F1), operator_norm(gp.F2)) ** 2
    for name, (r1, r2) in (("defect_intertwining", defect_intertwining_residuals(t, fp)),
                           ("cross_intertwining", cross_intertwining_residuals(t, fp, gp)),
                           ("defect_product", defect_product_residuals(t, fp, gp)),
                           ("mixed_defect", mixed_defect_residuals(t, fp, gp))):
        rep.add(f"{name}.first", r1, tol * scale)
        rep.add(f"{name}.second", r2, tol * scale)
    return rep


def _stage(rep: VerificationReport, name: str, fn: Callable[[], VerificationReport | None]):
    try:
        sub = fn()
    except Exception as exc:  # a failing stage must not stop independent stages
        rep.errors[name] = f"{type(exc).__name__}: {exc}"
        return None
    if isinstance(sub, VerificationReport):
        rep.merge(sub, prefix=f"{name}.")
    return sub


def verify_triple(t: OperatorTriple, cfg: RunConfig | None = None) -> VerificationReport:
    """Run every check on ``t`` and collect the residuals in one report.

    Dilation stages run only when the commutation hypothesis holds for both
    fundamental pairs; otherwise they are recorded as skipped.  The
    ``certified`` flag in ``meta`` is true when the necessary checks pass,
    both solves succeed, the hypothesis holds and the dilation was built.
    """
    cfg = cfg or RunConfig()
    rep = VerificationReport(config=cfg.to_dict())
    rep.meta["n"] = t.n
    nec = _stage(rep, "necessary", lambda: necessary_checks(t, cfg.tol))
    necessary_ok = nec is not None and nec.passed

    fp = _stage(rep, "solve_F", lambda: solve_fundamental(t, cfg.rank_tol, cfg.tol))
    gp = _stage(rep, "solve_G", lambda: solve_adjoint_fundamental(t, cfg.rank_tol, cfg.tol))
    dil: Dilation | None = None
    hypothesis = False
    if fp is not None and gp is not None:
        rep.meta["defect_ranks"] = [fp.dim, gp.dim]
        _stage(rep, "fundamental", lambda: fundamental_residual_checks(t, fp, gp, cfg.tol))
        _stage(rep, "intertwining", lambda: intertwining_checks(t, fp, gp, cfg.tol))
        okF, rF = _condition_holds(fp, cfg.tol)
        okG, rG = _condition_holds(gp, cfg.tol)
        rep.meta["commuting_normal"] = {"F": rF, "G": rG}
        hypothesis = okF and okG
        _stage(rep, "symmetry", lambda: check_hypothesis_symmetry(t, fp, gp, cfg.tol, cfg.rank_tol))
        _stage(rep, "radius", lambda: radius_certificates(fp, gp, cfg.z_samples, cfg.tol,
                                                         cfg.angular_grid))
        if hypothesis:
            dil = _stage(rep, "build", lambda: build_unitary_dilation(t, fp, gp, cfg.tol))

    if dil is None:
        reasons = []
        if not necessary_ok:
            reasons.append("input failed the necessary checks")
        if fp is not None and gp is not None and not hypothesis:
            reasons.append("commutation hypothesis fails on the fundamental operators")
        reason = "; ".join(reasons) or "dilation not built"
        for s in DILATION_STAGES:
            rep.skip(s, reason)
    else:
        rep.meta["dilation_dims"] = [dil.dims.n, dil.dims.r, dil.dims.s]
        _stage(rep, "dilation", lambda: verify_dilation_conditions(
            dil, cfg.samples, cfg.seed, cfg.tol, cfg.unitary_tol))
        _stage(rep, "equality", lambda: verify_dilation_equality(dil, cfg.K_max, cfg.tol))
        _stage(rep, "schaffer", lambda: verify_schaffer_structure(dil, cfg.uniqueness_depth))
        _stage(rep, "block_identities", lambda: verify_block_identities(dil, cfg.depth, cfg.tol))
        _stage(rep, "zero_blocks", lambda: verify_zero_block_structure(dil, cfg.uniqueness_depth))
        _stage(rep, "uniqueness", lambda: reconstruct_uniqueness(dil, cfg.uniqueness_depth, cfg.tol))
        _stage(rep, "minimality", lambda: minimality_rank_check(dil, cfg.depth))
    rep.meta["certified"] = bool(necessary_ok and dil is not None)
    return rep


def run_suite(spec: InstanceSpec, cfg: RunConfig | None = None) -> VerificationReport:
    """Build the instance described by ``spec`` and verify it."""
    cfg = cfg or RunConfig()
    try:
        t = build_instance(spec)
    except Exception as exc:
        rep = VerificationReport(config=cfg.to_dict(), meta={"spec": spec.to_dict(),
                                                             "certified": False})
        rep.errors["generate"] = f"{type(exc).__name__}: {exc}"
        return rep
    rep = verify_triple(t, cfg)
    rep.meta["spec"] = spec.to_dict()
    return rep
