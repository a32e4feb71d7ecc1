"""Residual checks on a constructed dilation.

Every check works on exact finitely supported vectors (see
:mod:`tetrablock.dilation`); no infinite operator is ever truncated.  Each
function returns a :class:`~tetrablock.report.VerificationReport`.
"""

from __future__ import annotations

import numpy as np

from .dilation import BLOCK_NAMES, BlockOperator, Dilation, DilationVector, SpaceDims, VectorBatch
from .fundamental import DEFAULT_TOL, FundamentalPair, OperatorTriple
from .linalg import adj, numerical_rank, operator_norm
from .report import VerificationReport

UNITARY_TOL = 1e-12
EXACT_TOL = 1e-14


def _basis(dims: SpaceDims, part: str, depth: int):
    if part == "h":
        return [DilationVector.basis(dims, "h", i) for i in range(dims.n)]
    dim = dims.r if part == "p" else dims.s
    return [DilationVector.basis(dims, part, j, k) for k in range(depth) for j in range(dim)]


def _diff(x: DilationVector, y: DilationVector) -> float:
    return x.distance(y)


def _max(vals) -> float:
    return max(vals, default=0.0)


def verify_dilation_equality(dil: Dilation, K_max: int = 4, tol: float = DEFAULT_TOL) -> VerificationReport:
    """``A^m B^n P^l h = P_H R1^m R2^n U^l h`` for all ``m + n + l <= K_max``.

    Powers are applied one factor at a time to the basis vectors of ``H``.
    """
    t = dil.triple
    dims = dil.dims
    A, B, P = t.A, t.B, t.P
    worst, where = 0.0, None
    I = np.eye(dims.n)
    Ppow = [I]
    for _ in range(K_max):
        Ppow.append(P @ Ppow[-1])
    for i in range(dims.n):
        x = DilationVector.basis(dims, "h", i)
        for l in range(K_max + 1):
            y = x
            for n_ in range(K_max - l + 1):
                z = y
                target = np.linalg.matrix_power(B, n_) @ Ppow[l] @ I[:, i]
                for m in range(K_max - l - n_ + 1):
                    err = float(np.linalg.norm(z.h - target))
                    if where is None or err > worst:
                        worst, where = err, (m, n_, l)
                    z = dil.R1.apply(z)
                    target = A @ target
                y = dil.R2.apply(y)
            x = dil.U.apply(x)
    rep = VerificationReport(config={"K_max": K_max, "tol": tol})
    scale = max(1.0, operator_norm(A), operator_norm(B), operator_norm(P)) ** K_max
    rep.add("dilation_equality", worst, tol * scale,
            note=f"worst (m,n,l) = {where}")
    return rep


def verify_dilation_conditions(dil: Dilation, samples: int = 200, seed: int = 0,
                               tol: float = DEFAULT_TOL, unitary_tol: float = UNITARY_TOL,
                               max_support: int = 6) -> VerificationReport:
    """Tetrablock-unitary conditions for ``(R1, R2, U)`` on random vectors.

    Pairwise commutation, ``R1 = R2* U``, ``||R2 v|| <= ||v||`` (a sampled
    contraction check, not a norm computation), unitarity of ``U`` and
    normality of ``R1``, ``R2``.  Vectors are unit norm, so residuals are
    relative.
    """
    rng = np.random.default_rng(seed)
    R1, R2, U = dil.R1, dil.R2, dil.U
    v = VectorBatch.random(dil.dims, rng, samples, max_support)
    r1v, r2v, uv = R1.apply(v), R2.apply(v), U.apply(v)
    vals = {
        "commute_R1_R2": R1.apply(r2v).distances(R2.apply(r1v)),
        "commute_R1_U": R1.apply(uv).distances(U.apply(r1v)),
        "commute_R2_U": R2.apply(uv).distances(U.apply(r2v)),
        "R1_eq_R2adj_U": r1v.distances(R2.apply_adjoint(uv)),
        "R2_contraction": np.maximum(r2v.norms() - v.norms(), 0.0),
        "U_isometry": U.apply_adjoint(uv).distances(v),
        "U_coisometry": U.apply(U.apply_adjoint(v)).distances(v),
        "R1_normal": R1.apply(R1.apply_adjoint(v)).distances(R1.apply_adjoint(r1v)),
        "R2_normal": R2.apply(R2.apply_adjoint(v)).distances(R2.apply_adjoint(r2v)),
    }
    acc = {k: float(np.max(x)) for k, x in vals.items()}
    rep = VerificationReport(config={"samples": samples, "seed": seed, "tol": tol,
                                     "unitary_tol": unitary_tol})
    for k, x in acc.items():
        thr = unitary_tol if k.startswith("U_") else tol
        note = "sampled contraction check" if k == "R2_contraction" else ""
        rep.add(k, x, thr, note)
    return rep


def verify_schaffer_structure(dil: Dilation, depth: int = 6, tol: float = UNITARY_TOL) -> VerificationReport:
    """``U`` in the ordering ``l2(D_P) + H + l2(D_P*)`` matches the Schaffer blocks.

    Expected actions are rebuilt from ``P`` and the defect operators, not
    from the blocks stored in ``U``:

        U1 a = (0, a0, a1, ...)      U2 h = (D_P h, 0, ...)
        U3 b = (-P* b0, 0, ...)      U4 b = D_P* b0        U5 b = (b1, b2, ...)

    and the three blocks below the diagonal vanish, with ``P`` in the middle.
    """
    dims, U = dil.dims, dil.U
    P = dil.triple.P
    J, K = dil.fp.space.embed, dil.gp.space.embed
    DP, DPs = dil.fp.space.defect, dil.gp.space.defect
    res = {k: 0.0 for k in ("U1_forward_shift", "U2_defect", "U3_minus_Padj",
                            "U4_adj_defect", "U5_backward_shift", "P_middle",
                            "zero_blocks")}
    for k in range(depth):
        for j in range(dims.r):
            w = U.apply(DilationVector.basis(dims, "p", j, k))
            expect = np.zeros((k + 2, dims.r), complex)
            expect[k + 1, j] = 1
            res["U1_forward_shift"] = max(res["U1_forward_shift"],
                                          _tail_diff(w.tail_p, expect))
            res["zero_blocks"] = max(res["zero_blocks"], np.linalg.norm(w.h),
                                     np.linalg.norm(w.tail_ps))
    for i in range(dims.n):
        e = np.zeros(dims.n, complex)
        e[i] = 1
        w = U.apply(DilationVector.basis(dims, "h", i))
        res["U2_defect"] = max(res["U2_defect"],
                               _tail_diff(w.tail_p, (adj(J) @ DP @ e)[None, :]))
        res["P_middle"] = max(res["P_middle"], np.linalg.norm(w.h - P @ e))
        res["zero_blocks"] = max(res["zero_blocks"], np.linalg.norm(w.tail_ps))
    for k in range(depth):
        for j in range(dims.s):
            w = U.apply(DilationVector.basis(dims, "ps", j, k))
            b0 = K[:, j] if k == 0 else np.zeros(dims.n, complex)
            res["U3_minus_Padj"] = max(res["U3_minus_Padj"],
                                       _tail_diff(w.tail_p, (adj(J) @ (-adj(P) @ b0))[None, :]))
            res["U4_adj_defect"] = max(res["U4_adj_defect"], np.linalg.norm(w.h - DPs @ b0))
            expect = np.zeros((max(k, 0), dims.s), complex)
            if k >= 1:
                expect[k - 1, j] = 1
            res["U5_backward_shift"] = max(res["U5_backward_shift"],
                                           _tail_diff(w.tail_ps, expect))
    rep = VerificationReport(config={"depth": depth, "tol": tol})
    for k, x in res.items():
        rep.add(k, x, tol)
    return rep


def _tail_diff(x: np.ndarray, y: np.ndarray) -> float:
    n = max(len(x), len(y))
    X = np.zeros((n, x.shape[1] if x.ndim == 2 else y.shape[1]), complex)
    Y = np.zeros_like(X)
    X[: len(x)] = x
    Y[: len(y)] = y
    return float(np.linalg.norm(X - Y))


def block_matrix_residuals(t: OperatorTriple, fp: FundamentalPair,
                              gp: FundamentalPair) -> dict[str, float]:
    """The finite identities that make ``R1`` and ``R2`` commute.

    All maps are restricted to the defect space of ``P*`` by composing with
    its projector on the right.
    """
    F1, F2 = fp.lifted()
    G1, G2 = gp.lifted()
    DP, DPs = fp.space.defect, gp.space.defect
    Pi = gp.space.projector
    A, B, P = t.A, t.B, t.P
    Ps = adj(P)
    F1s, F2s, G1s, G2s = adj(F1), adj(F2), adj(G1), adj(G2)
    return {
        "a_first": operator_norm((A @ DPs @ G1 + DPs @ G2 @ G2s
                                  - B @ DPs @ G2 - DPs @ G1 @ G1s) @ Pi),
        "a_second": operator_norm((DPs @ G2 @ G1 - DPs @ G1 @ G2) @ Pi),
        "b_first": operator_norm((F2s @ DP @ DPs @ G1 - F1 @ F1s @ Ps - F2s @ Ps @ G2s
                                  - F1s @ DP @ DPs @ G2 + F2 @ F2s @ Ps + F1s @ Ps @ G1s) @ Pi),
        "b_second": operator_norm((F2s @ Ps @ G1 - F1s @ Ps @ G2) @ Pi),
        "c": operator_norm((F2s @ F1s @ Ps - F1s @ F2s @ Ps) @ Pi),
    }


def _block_identity(dil: Dilation, lhs, rhs, depth: int) -> float:
    """Max over ``D_P*`` basis vectors of ``||(X1 Y1 + X2 Y2) e - (X3 Y3 + X4 Y4) e||``."""
    worst = 0.0
    for e in _basis(dil.dims, "ps", depth):
        left = lhs[0][0].apply(lhs[0][1].apply(e)) + lhs[1][0].apply(lhs[1][1].apply(e))
        right = rhs[0][0].apply(rhs[0][1].apply(e)) + rhs[1][0].apply(rhs[1][1].apply(e))
        worst = max(worst, _diff(left, right))
    return worst


def verify_block_identities(dil: Dilation, depth: int = 4,
                               tol: float = DEFAULT_TOL) -> VerificationReport:
    """Matrix identities (a)-(c) behind ``R1 R2 = R2 R1`` plus the three block identities.

    The block identities ``V1 C2 + C1 D2 = V2 C1 + C2 D1``,
    ``V1 C3 + C1 D3 = V3 C1 + C3 D1`` and its ``R2`` analogue are evaluated
    on basis vectors of the ``D_P*`` tail at positions ``< depth``.
    """
    rep = VerificationReport(config={"depth": depth, "tol": tol})
    scale = max(1.0, operator_norm(dil.fp.F1), operator_norm(dil.fp.F2),
                operator_norm(dil.gp.F1), operator_norm(dil.gp.F2)) ** 2
    for k, x in block_matrix_residuals(dil.triple, dil.fp, dil.gp).items():
        rep.add(f"identity_{k}", x, tol * scale)
    V1, V2, V3 = dil.V1, dil.V2, dil.V3
    C1, C2, C3 = dil.C(1), dil.C(2), dil.C(3)
    D1, D2, D3 = dil.D(1), dil.D(2), dil.D(3)
    rep.add("block_R1R2", _block_identity(dil, [(V1, C2), (C1, D2)], [(V2, C1), (C2, D1)], depth),
            tol * scale)
    rep.add("block_R1U", _block_identity(dil, [(V1, C3), (C1, D3)], [(V3, C1), (C3, D1)], depth),
            tol * scale)
    rep.add("block_R2U", _block_identity(dil, [(V2, C3), (C2, D3)], [(V3, C2), (C3, D2)], depth),
            tol * scale)
    return rep


def _adjoint_column_blocks(op_adjoint, dims: SpaceDims) -> tuple[np.ndarray, np.ndarray, float]:
    """Blocks ``X0, X1`` of ``op_adjoint(a at position 0) = (X0 a, X1 a, 0, ...)``.

    Returns the blocks and the norm of anything beyond position 1.
    """
    s = dims.s
    X0 = np.zeros((s, s), complex)
    X1 = np.zeros((s, s), complex)
    spill = 0.0
    for j in range(s):
        w = op_adjoint(DilationVector.basis(dims, "ps", j, 0))
        tail = w.tail_ps
        if len(tail) > 0:
            X0[:, j] = tail[0]
        if len(tail) > 1:
            X1[:, j] = tail[1]
        spill = max(spill, float(np.linalg.norm(tail[2:])), float(np.linalg.norm(w.h)),
                    float(np.linalg.norm(w.tail_p)))
    return X0, X1, spill


def reconstruct_uniqueness(dil: Dilation, depth: int = 6, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Rebuild the coupling and Toeplitz blocks of ``R1``, ``R2`` from ``V1``, ``V2`` and ``U``.

    Any tetrablock unitary dilation ``(R1~, R2~, U)`` extending ``V1``, ``V2``
    is forced to have ``C1~ = V2* C3``, ``C2~ = V1* C3`` and

        D2~*(a, 0, 0, ...) = (C3* V2* C3 + D3* C2~* C3)(a, 0, 0, ...),

    extended to later positions by ``D2~* D3* = D3* D2~*`` (and likewise for
    ``D1~``).  These are recomputed through ``apply``/``apply_adjoint`` and
    compared with the constructed blocks on tail positions ``< depth``.  The
    unitarity relations ``D3* D3 + C3* C3 = I`` and ``C3* V3 = 0`` are
    checked directly.
    """
    dims = dil.dims
    V1, V2, V3 = dil.V1, dil.V2, dil.V3
    C1, C2, C3 = dil.C(1), dil.C(2), dil.C(3)
    D1, D2, D3 = dil.D(1), dil.D(2), dil.D(3)
    ps_basis = _basis(dims, "ps", depth)
    res = {}

    res["C1_eq_V2adj_C3"] = _max(_diff(V2.apply_adjoint(C3.apply(e)), C1.apply(e)) for e in ps_basis)
    res["C2_eq_V1adj_C3"] = _max(_diff(V1.apply_adjoint(C3.apply(e)), C2.apply(e)) for e in ps_basis)

    # C~2* = C3* V1 and C~1* = C3* V2 (adjoints of the reconstructed couplings).
    def d2_star(e):
        c3e = C3.apply(e)
        return (D3.apply_adjoint(C3.apply_adjoint(V1.apply(c3e)))
                + C3.apply_adjoint(V2.apply_adjoint(c3e)))

    def d1_star(e):
        c3e = C3.apply(e)
        return (D3.apply_adjoint(C3.apply_adjoint(V2.apply(c3e)))
                + C3.apply_adjoint(V1.apply_adjoint(c3e)))

    rebuilt = {}
    for label, fn, D in (("D2", d2_star, D2), ("D1", d1_star, D1)):
        X0, X1, spill = _adjoint_column_blocks(fn, dims)
        # D~* has X0 on the diagonal and X1 on the subdiagonal, so D~ has
        # X0* on the diagonal and X1* on the superdiagonal.
        Dt = BlockOperator.from_blocks(f"{label}~", dims, d_diag=adj(X0), d_super=adj(X1))
        rebuilt[label] = Dt
        res[f"{label}_reconstructed"] = _max(_diff(Dt.apply(e), D.apply(e)) for e in ps_basis)
        res[f"{label}_adjoint_support"] = spill

    # Second half of R1~ = R2~* U: D1~ = C2~* C3 + D2~* D3, with C2~* = C3* V1.
    D2t = rebuilt["D2"]
    res["D1_eq_C2adj_C3_plus_D2adj_D3"] = _max(
        _diff(C3.apply_adjoint(V1.apply(C3.apply(e))) + D2t.apply_adjoint(D3.apply(e)),
              D1.apply(e))
        for e in ps_basis
    )
    res["U_unitarity_D3adjD3_plus_C3adjC3"] = _max(
        _diff(D3.apply_adjoint(D3.apply(e)) + C3.apply_adjoint(C3.apply(e)), e) for e in ps_basis
    )
    htilde = _basis(dims, "h", depth) + _basis(dims, "p", depth)
    res["U_unitarity_C3adjV3"] = _max(C3.apply_adjoint(V3.apply(x)).norm() for x in htilde)

    rep = VerificationReport(config={"depth": depth, "tol": tol})
    scale = max(1.0, operator_norm(dil.gp.F1), operator_norm(dil.gp.F2),
                operator_norm(dil.fp.F1), operator_norm(dil.fp.F2)) ** 2
    for k, x in res.items():
        rep.add(k, x, tol * scale)
    return rep


def verify_zero_block_structure(dil: Dilation, depth: int = 6, tol: float = EXACT_TOL) -> VerificationReport:
    """Zero blocks of ``R1``, ``R2`` in the ordering ``l2(D_P) + H + l2(D_P*)``.

    Positions (2,1), (3,1) and (3,2) must vanish exactly and the (2,2)
    compressions must be ``A`` and ``B``.
    """
    dims = dil.dims
    rep = VerificationReport(config={"depth": depth, "tol": tol})
    t = dil.triple
    for name, R, S in (("R1", dil.R1, t.A), ("R2", dil.R2, t.B)):
        b21 = b31 = b32 = b22 = 0.0
        for e in _basis(dims, "p", depth):
            w = R.apply(e)
            b21 = max(b21, float(np.linalg.norm(w.h)))
            b31 = max(b31, float(np.linalg.norm(w.tail_ps)))
        for i, e in enumerate(_basis(dims, "h", depth)):
            w = R.apply(e)
            b32 = max(b32, float(np.linalg.norm(w.tail_ps)))
            b22 = max(b22, float(np.linalg.norm(w.h - S[:, i])))
        rep.add(f"{name}_block21_zero", b21, tol)
        rep.add(f"{name}_block31_zero", b31, tol)
        rep.add(f"{name}_block32_zero", b32, tol)
        rep.add(f"{name}_block22_eq_{'A' if name == 'R1' else 'B'}", b22, tol)
    return rep


def minimality_rank_check(dil: Dilation, depth: int = 4, rel_tol: float = 1e-10) -> VerificationReport:
    """Finite-depth stand-in for minimality of the dilation space.

    Computes the numerical rank of ``{U^m h : h in a basis of H, |m| <= depth}``
    inside ``H`` plus ``depth`` positions of each tail.  The rank should equal
    ``n + depth (r + s)`` up to an edge slack of ``r + s``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    dims, U = dil.dims, dil.U
    cols, overflow = [], 0.0
    for e in _basis(dims, "h", depth):
        fwd, bwd = e, e
        cols.append(e.dense(depth)[0])
        for _ in range(depth):
            fwd = U.apply(fwd)
            bwd = U.apply_adjoint(bwd)
            for w in (fwd, bwd):
                kept, dropped = w.dense(depth)
                cols.append(kept)
                overflow = max(overflow, dropped)
    M = np.array(cols).T
    rank = numerical_rank(M, rel_tol)
    full = dims.n + depth * (dims.r + dims.s)
    slack = dims.r + dims.s
    rep = VerificationReport(config={"depth": depth, "rel_tol": rel_tol})
    ok = full - slack <= rank <= full
    rep.add_verdict("minimality_rank", "pass" if ok else "fail", residual=full - rank,
                    threshold=slack,
                    note=f"rank {rank}, full {full}, edge slack {slack}; finite-depth surrogate")
    rep.add("orbit_within_window", overflow, EXACT_TOL)
    rep.meta.update(rank=rank, full=full, slack=slack)
    return rep


def perturb_R1(dil: Dilation, rng: np.random.Generator, magnitude: float = 1e-3,
               block: str | None = None) -> tuple[Dilation, str]:
    """Add a random matrix of operator norm ``magnitude`` to one non-empty block of ``R1``."""
    R1 = dil.R1
    names = [b for b in BLOCK_NAMES if getattr(R1, b).size]
    if block is None:
        block = names[int(rng.integers(len(names)))]
    elif block not in names:
        raise ValueError(f"block {block!r} is empty or unknown")
    shape = getattr(R1, block).shape
    delta = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    delta *= magnitude / operator_norm(delta)
    return dil.with_R1(R1.perturbed(block, delta)), block


def perturbation_detected(dil: Dilation, samples: int = 200, seed: int = 0,
                          tol: float = DEFAULT_TOL, depth: int = 6) -> tuple[bool, list[str]]:
    """Whether commutation, ``R1 = R2* U`` or the uniqueness reconstruction flags ``dil``."""
    rep = VerificationReport()
    rep.merge(verify_dilation_conditions(dil, samples, seed, tol), "dilation.")
    rep.merge(reconstruct_uniqueness(dil, depth, tol), "uniqueness.")
    failed = rep.failures()
    return bool(failed), failed
