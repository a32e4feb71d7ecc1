"""Exact block operators on H + l2(D_P) + l2(D_P*).

Every operator in the dilation maps finitely supported sequences to finitely
supported sequences, so vectors are stored exactly: a head vector in ``H``
and two tails, each an ``(L, dim)`` array whose row ``k`` is the coordinate
vector at sequence position ``k``.  Nothing is truncated during ``apply``.

All operators used here share one sparsity pattern, parameterised by eight
coordinate blocks::

    h'    = head h            + c_head c_0
    a'_0  = head_to_tail h    + tail_diag a_0 + c_tail c_0
    a'_k  = tail_sub a_{k-1}  + tail_diag a_k                 (k >= 1)
    c'_k  = d_diag c_k        + d_super c_{k+1}

The isometric parts ``V_i`` use only the first three lines, the ``C_i`` only
the ``c_*`` blocks, the ``D_i`` only the ``d_*`` blocks, and ``R1``, ``R2``,
``U`` use all of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .fundamental import (
    DEFAULT_TOL,
    FundamentalPair,
    OperatorTriple,
    commuting_normal_residuals,
    solve_adjoint_fundamental,
    solve_fundamental,
)
from .linalg import DEFAULT_RANK_TOL, adj, operator_norm


class DilationHypothesisError(ValueError):
    """The fundamental operators fail the commutation hypothesis of the construction."""


@dataclass(frozen=True)
class SpaceDims:
    """``n = dim H``, ``r = dim D_P``, ``s = dim D_P*``."""

    n: int
    r: int
    s: int


def _as_tail(x, dim: int) -> np.ndarray:
    if x is None or dim == 0:
        return np.zeros((0, dim), complex)
    return np.asarray(x, complex).reshape(-1, dim)


def _trim(tail: np.ndarray) -> np.ndarray:
    k = len(tail)
    while k and not tail[k - 1].any():
        k -= 1
    return tail[:k]


@dataclass(frozen=True)
class DilationVector:
    h: np.ndarray
    tail_p: np.ndarray
    tail_ps: np.ndarray

    @classmethod
    def make(cls, dims: SpaceDims, h=None, tail_p=None, tail_ps=None) -> "DilationVector":
        """Build from array-likes; missing parts are zero, trailing zero rows trimmed."""
        h = np.zeros(dims.n, complex) if h is None else np.asarray(h, complex).reshape(dims.n)
        return cls(h, _trim(_as_tail(tail_p, dims.r)), _trim(_as_tail(tail_ps, dims.s)))

    @classmethod
    def zeros(cls, dims: SpaceDims) -> "DilationVector":
        return cls(np.zeros(dims.n, complex), np.zeros((0, dims.r), complex),
                   np.zeros((0, dims.s), complex))

    @classmethod
    def basis(cls, dims: SpaceDims, part: str, index: int, position: int = 0) -> "DilationVector":
        """Unit vector in ``part`` ('h', 'p' or 'ps') at a tail position."""
        v = cls.zeros(dims)
        if part == "h":
            h = np.zeros(dims.n, complex)
            h[index] = 1
            return replace(v, h=h)
        dim = dims.r if part == "p" else dims.s
        tail = np.zeros((position + 1, dim), complex)
        tail[position, index] = 1
        return replace(v, **{"tail_p" if part == "p" else "tail_ps": tail})

    @classmethod
    def random(cls, dims: SpaceDims, rng: np.random.Generator, max_support: int = 6,
               unit: bool = True) -> "DilationVector":
        def g(*shape):
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

        v = cls.make(dims, g(dims.n), g(rng.integers(0, max_support + 1), dims.r),
                     g(rng.integers(0, max_support + 1), dims.s))
        return v.scaled(1.0 / v.norm()) if unit and v.norm() > 0 else v

    def _rebuild(self, h, a, c) -> "DilationVector":
        return DilationVector(h, _trim(a), _trim(c))

    @property
    def support(self) -> int:
        return max(len(self.tail_p), len(self.tail_ps))

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.h, self.h).real
                             + np.vdot(self.tail_p, self.tail_p).real
                             + np.vdot(self.tail_ps, self.tail_ps).real))

    def inner(self, other: "DilationVector") -> complex:
        """``<self, other>``, linear in the first argument."""
        total = np.vdot(other.h, self.h)
        for x, y in ((self.tail_p, other.tail_p), (self.tail_ps, other.tail_ps)):
            k = min(len(x), len(y))
            total += np.vdot(y[:k], x[:k])
        return complex(total)

    def distance(self, other: "DilationVector") -> float:
        """``||self - other||`` without materializing the difference."""
        total = np.sum(np.abs(self.h - other.h) ** 2)
        for x, y in ((self.tail_p, other.tail_p), (self.tail_ps, other.tail_ps)):
            k = min(len(x), len(y))
            total += np.sum(np.abs(x[:k] - y[:k]) ** 2)
            total += np.sum(np.abs(x[k:]) ** 2) + np.sum(np.abs(y[k:]) ** 2)
        return float(np.sqrt(total))

    def scaled(self, alpha: complex) -> "DilationVector":
        return DilationVector(alpha * self.h, alpha * self.tail_p, alpha * self.tail_ps)

    def __add__(self, other: "DilationVector") -> "DilationVector":
        return DilationVector(self.h + other.h, _trim(_pad_add(self.tail_p, other.tail_p)),
                              _trim(_pad_add(self.tail_ps, other.tail_ps)))

    def __sub__(self, other: "DilationVector") -> "DilationVector":
        return self + other.scaled(-1.0)

    def dense(self, levels: int) -> tuple[np.ndarray, float]:
        """Coordinates on ``H + first levels positions of each tail``, plus the dropped norm."""
        a, c = self.tail_p, self.tail_ps
        pa = np.zeros((levels, a.shape[1]), complex)
        pc = np.zeros((levels, c.shape[1]), complex)
        pa[: min(levels, len(a))] = a[:levels]
        pc[: min(levels, len(c))] = c[:levels]
        kept = np.concatenate([self.h, pa.ravel(), pc.ravel()])
        dropped = np.sqrt(np.vdot(a[levels:], a[levels:]).real + np.vdot(c[levels:], c[levels:]).real)
        return kept, float(dropped)


def _pad_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if len(x) < len(y):
        x, y = y, x
    out = x.copy()
    out[: len(y)] += y
    return out


@dataclass(frozen=True)
class VectorBatch:
    """``N`` dilation vectors stacked along a leading axis.

    Tails are zero-padded to a common length, which changes nothing in the
    exact arithmetic; operators act on all members at once.
    """

    h: np.ndarray        # (N, n)
    tail_p: np.ndarray   # (N, L, r)
    tail_ps: np.ndarray  # (N, M, s)

    @classmethod
    def stack(cls, vecs: list[DilationVector]) -> "VectorBatch":
        if not vecs:
            raise ValueError("empty batch")
        r, s = vecs[0].tail_p.shape[1], vecs[0].tail_ps.shape[1]
        L = max(len(v.tail_p) for v in vecs)
        M = max(len(v.tail_ps) for v in vecs)
        a = np.zeros((len(vecs), L, r), complex)
        c = np.zeros((len(vecs), M, s), complex)
        for i, v in enumerate(vecs):
            a[i, : len(v.tail_p)] = v.tail_p
            c[i, : len(v.tail_ps)] = v.tail_ps
        return cls(np.array([v.h for v in vecs]), a, c)

    @classmethod
    def random(cls, dims: SpaceDims, rng: np.random.Generator, count: int,
               max_support: int = 6) -> "VectorBatch":
        return cls.stack([DilationVector.random(dims, rng, max_support) for _ in range(count)])

    def _rebuild(self, h, a, c) -> "VectorBatch":
        return VectorBatch(h, _trim_batch(a), _trim_batch(c))

    def __len__(self) -> int:
        return self.h.shape[0]

    def __getitem__(self, i: int) -> DilationVector:
        return DilationVector(self.h[i], _trim(self.tail_p[i]), _trim(self.tail_ps[i]))

    def norms(self) -> np.ndarray:
        sq = (np.sum(np.abs(self.h) ** 2, axis=1)
              + np.sum(np.abs(self.tail_p) ** 2, axis=(1, 2))
              + np.sum(np.abs(self.tail_ps) ** 2, axis=(1, 2)))
        return np.sqrt(sq)

    def distances(self, other: "VectorBatch") -> np.ndarray:
        """Per-member ``||self_i - other_i||``."""
        sq = np.sum(np.abs(self.h - other.h) ** 2, axis=1)
        for x, y in ((self.tail_p, other.tail_p), (self.tail_ps, other.tail_ps)):
            k = min(x.shape[1], y.shape[1])
            sq = sq + np.sum(np.abs(x[:, :k] - y[:, :k]) ** 2, axis=(1, 2))
            sq = sq + np.sum(np.abs(x[:, k:]) ** 2, axis=(1, 2))
            sq = sq + np.sum(np.abs(y[:, k:]) ** 2, axis=(1, 2))
        return np.sqrt(sq)


def _trim_batch(tail: np.ndarray) -> np.ndarray:
    k = tail.shape[1]
    while k and not tail[:, k - 1].any():
        k -= 1
    return tail[:, :k]


BLOCK_NAMES = ("head", "head_to_tail", "tail_diag", "tail_sub",
               "c_head", "c_tail", "d_diag", "d_super")
PARTS = {
    "V": ("head", "head_to_tail", "tail_diag", "tail_sub"),
    "C": ("c_head", "c_tail"),
    "D": ("d_diag", "d_super"),
}


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """One operator of the dilation family, stored as its eight coordinate blocks."""

    kind: str
    dims: SpaceDims
    head: np.ndarray
    head_to_tail: np.ndarray
    tail_diag: np.ndarray
    tail_sub: np.ndarray
    c_head: np.ndarray
    c_tail: np.ndarray
    d_diag: np.ndarray
    d_super: np.ndarray

    @classmethod
    def from_blocks(cls, kind: str, dims: SpaceDims, **blocks) -> "BlockOperator":
        n, r, s = dims.n, dims.r, dims.s
        shapes = {"head": (n, n), "head_to_tail": (r, n), "tail_diag": (r, r),
                  "tail_sub": (r, r), "c_head": (n, s), "c_tail": (r, s),
                  "d_diag": (s, s), "d_super": (s, s)}
        unknown = set(blocks) - set(shapes)
        if unknown:
            raise ValueError(f"unknown blocks {sorted(unknown)}")
        full = {}
        for name, shape in shapes.items():
            M = np.asarray(blocks.get(name, np.zeros(shape)), dtype=np.complex128)
            if M.shape != shape:
                raise ValueError(f"block {name} has shape {M.shape}, expected {shape}")
            full[name] = M
        return cls(kind, dims, **full)

    def part(self, which: str, kind: str | None = None) -> "BlockOperator":
        """Keep only the 'V', 'C' or 'D' blocks; the rest become zero."""
        keep = PARTS[which]
        blocks = {k: getattr(self, k) for k in keep}
        return BlockOperator.from_blocks(kind or f"{self.kind}.{which}", self.dims, **blocks)

    def perturbed(self, block: str, delta: np.ndarray) -> "BlockOperator":
        return replace(self, **{block: getattr(self, block) + delta}, kind=self.kind + "~")

    @cached_property
    def _adjoint_blocks(self) -> dict[str, np.ndarray]:
        # Row-vector convention: M applied to the rows of X is X @ M.T.
        return {k: getattr(self, k).conj() for k in BLOCK_NAMES}

    def apply(self, v):
        """Exact action on a :class:`DilationVector` or a :class:`VectorBatch`."""
        a, c = v.tail_p, v.tail_ps
        L, M = a.shape[-2], c.shape[-2]
        c0 = c[..., 0, :] if M else np.zeros(c.shape[:-2] + (self.dims.s,), complex)
        h_out = v.h @ self.head.T + c0 @ self.c_head.T
        a_out = np.zeros(a.shape[:-2] + (L + 1, self.dims.r), complex)
        if L:
            a_out[..., :L, :] = a @ self.tail_diag.T
            a_out[..., 1:, :] += a @ self.tail_sub.T
        a_out[..., 0, :] += v.h @ self.head_to_tail.T + c0 @ self.c_tail.T
        c_out = np.zeros_like(c)
        if M:
            c_out[...] = c @ self.d_diag.T
            c_out[..., :-1, :] += c[..., 1:, :] @ self.d_super.T
        return v._rebuild(h_out, a_out, c_out)

    def apply_adjoint(self, v):
        b = self._adjoint_blocks
        a, c = v.tail_p, v.tail_ps
        L, M = a.shape[-2], c.shape[-2]
        a0 = a[..., 0, :] if L else np.zeros(a.shape[:-2] + (self.dims.r,), complex)
        h_out = v.h @ b["head"] + a0 @ b["head_to_tail"]
        a_out = np.zeros_like(a)
        if L:
            a_out[...] = a @ b["tail_diag"]
            a_out[..., :-1, :] += a[..., 1:, :] @ b["tail_sub"]
        c_out = np.zeros(c.shape[:-2] + (M + 1, self.dims.s), complex)
        if M:
            c_out[..., :M, :] = c @ b["d_diag"]
            c_out[..., 1:, :] += c @ b["d_super"]
        c_out[..., 0, :] += v.h @ b["c_head"] + a0 @ b["c_tail"]
        return v._rebuild(h_out, a_out, c_out)


@dataclass(frozen=True, eq=False)
class Identity:
    dims: SpaceDims
    kind: str = "identity"

    def apply(self, v: DilationVector) -> DilationVector:
        return v

    def apply_adjoint(self, v: DilationVector) -> DilationVector:
        return v


@dataclass(frozen=True, eq=False)
class Composition:
    """``ops[0] @ ops[1] @ ...``; the last factor acts first."""

    ops: tuple
    kind: str = "composition"

    @property
    def dims(self) -> SpaceDims:
        return self.ops[0].dims

    def apply(self, v: DilationVector) -> DilationVector:
        for op in reversed(self.ops):
            v = op.apply(v)
        return v

    def apply_adjoint(self, v: DilationVector) -> DilationVector:
        for op in self.ops:
            v = op.apply_adjoint(v)
        return v


DilationOperator = BlockOperator | Identity | Composition


def apply(op: DilationOperator, v: DilationVector) -> DilationVector:
    _check_dims(op, v)
    return op.apply(v)


def apply_adjoint(op: DilationOperator, v: DilationVector) -> DilationVector:
    _check_dims(op, v)
    return op.apply_adjoint(v)


def compose(*ops: DilationOperator) -> Composition:
    return Composition(tuple(ops))


def apply_power(op: DilationOperator, v: DilationVector, k: int) -> DilationVector:
    for _ in range(k):
        v = op.apply(v)
    return v


def _check_dims(op, v: DilationVector) -> None:
    d = op.dims
    if (v.h.shape[-1:] != (d.n,) or v.tail_p.shape[-1:] != (d.r,)
            or v.tail_ps.shape[-1:] != (d.s,)):
        raise ValueError(
            f"dimension mismatch: operator on (n={d.n}, r={d.r}, s={d.s}), vector with "
            f"h{v.h.shape}, tail_p{v.tail_p.shape}, tail_ps{v.tail_ps.shape}"
        )


@dataclass(frozen=True, eq=False)
class Dilation:
    """The unitary dilation ``(R1, R2, U)`` together with the data it was built from."""

    triple: OperatorTriple
    fp: FundamentalPair
    gp: FundamentalPair
    R1: BlockOperator
    R2: BlockOperator
    U: BlockOperator
    consistency: dict = field(default_factory=dict)

    @property
    def dims(self) -> SpaceDims:
        return self.U.dims

    @property
    def V1(self) -> BlockOperator:
        return self.R1.part("V", "V1")

    @property
    def V2(self) -> BlockOperator:
        return self.R2.part("V", "V2")

    @property
    def V3(self) -> BlockOperator:
        return self.U.part("V", "V3")

    def C(self, i: int) -> BlockOperator:
        return (self.R1, self.R2, self.U)[i - 1].part("C", f"C{i}")

    def D(self, i: int) -> BlockOperator:
        return (self.R1, self.R2, self.U)[i - 1].part("D", f"D{i}")

    def with_R1(self, R1: BlockOperator) -> "Dilation":
        return replace(self, R1=R1)


def _coordinates(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair):
    J, K = fp.space.embed, gp.space.embed
    dp = adj(J) @ fp.space.defect               # D_P : H -> D_P, r x n
    dps = gp.space.defect @ K                   # D_P* restricted to D_P*, n x s
    ps = adj(J) @ adj(t.P) @ K                  # P* : D_P* -> D_P, r x s
    leak = operator_norm(adj(t.P) @ K - J @ ps) if K.size else 0.0
    return dp, dps, ps, leak


def _require_commuting_normal(fp: FundamentalPair, tol: float, label: str) -> None:
    c1, c2 = commuting_normal_residuals(fp)
    scale = max(1.0, operator_norm(fp.F1), operator_norm(fp.F2)) ** 2
    if max(c1, c2) > tol * scale:
        raise DilationHypothesisError(
            f"{label}: commutation hypothesis on the fundamental operators fails "
            f"(||[X1,X2]|| = {c1:.3e}, ||[X1,X1*]-[X2,X2*]|| = {c2:.3e})"
        )


def build_isometric_dilation(t: OperatorTriple, fp: FundamentalPair,
                             tol: float = DEFAULT_TOL) -> tuple[BlockOperator, BlockOperator, BlockOperator]:
    """``(V1, V2, V3)`` on ``H + l2(D_P)``, acting as ``V_i + 0`` on the full space.

    ``V3`` is the minimal isometric dilation of ``P``; ``V1``, ``V2`` are the
    lower-triangular Toeplitz-type extensions of ``A``, ``B`` built from the
    fundamental operators.  The defect space of ``P*`` is taken as trivial
    here, so the returned operators have ``s = 0``.
    """
    _require_commuting_normal(fp, tol, "isometric dilation")
    J = fp.space.embed
    dims = SpaceDims(t.n, fp.dim, 0)
    dp = adj(J) @ fp.space.defect
    F1, F2 = fp.F1, fp.F2
    V1 = BlockOperator.from_blocks("V1", dims, head=t.A, head_to_tail=adj(F2) @ dp,
                                   tail_diag=F1, tail_sub=adj(F2))
    V2 = BlockOperator.from_blocks("V2", dims, head=t.B, head_to_tail=adj(F1) @ dp,
                                   tail_diag=F2, tail_sub=adj(F1))
    V3 = BlockOperator.from_blocks("V3", dims, head=t.P, head_to_tail=dp,
                                   tail_sub=np.eye(fp.dim))
    return V1, V2, V3


def build_unitary_dilation(t: OperatorTriple, fp: FundamentalPair, gp: FundamentalPair,
                           tol: float = DEFAULT_TOL) -> Dilation:
    """``(R1, R2, U)`` on ``H + l2(D_P) + l2(D_P*)``.

    Upper block triangular with respect to ``(H + l2(D_P)) + l2(D_P*)``: the
    diagonal blocks are ``V_i`` and the Toeplitz operators ``D_i``, and the
    coupling ``C_i`` only reads position 0 of the ``D_P*`` tail.
    """
    _require_commuting_normal(fp, tol, "unitary dilation (F)")
    _require_commuting_normal(gp, tol, "unitary dilation (G)")
    dims = SpaceDims(t.n, fp.dim, gp.dim)
    dp, dps, ps, leak = _coordinates(t, fp, gp)
    F1, F2, G1, G2 = fp.F1, fp.F2, gp.F1, gp.F2
    Ir, Is = np.eye(dims.r), np.eye(dims.s)
    R1 = BlockOperator.from_blocks(
        "R1", dims,
        head=t.A, head_to_tail=adj(F2) @ dp, tail_diag=F1, tail_sub=adj(F2),
        c_head=dps @ G2, c_tail=-adj(F2) @ ps,
        d_diag=adj(G1), d_super=G2,
    )
    R2 = BlockOperator.from_blocks(
        "R2", dims,
        head=t.B, head_to_tail=adj(F1) @ dp, tail_diag=F2, tail_sub=adj(F1),
        c_head=dps @ G1, c_tail=-adj(F1) @ ps,
        d_diag=adj(G2), d_super=G1,
    )
    U = BlockOperator.from_blocks(
        "U", dims,
        head=t.P, head_to_tail=dp, tail_sub=Ir,
        c_head=dps, c_tail=-ps,
        d_super=Is,
    )
    return Dilation(t, fp, gp, R1, R2, U, {"P_adj_defect_leak": leak})


def dilation_from(t: OperatorTriple, rank_tol: float = DEFAULT_RANK_TOL,
                  tol: float = DEFAULT_TOL) -> Dilation:
    """Solve both fundamental equations and build the unitary dilation."""
    fp = solve_fundamental(t, rank_tol, tol)
    gp = solve_adjoint_fundamental(t, rank_tol, tol)
    return build_unitary_dilation(t, fp, gp, tol)


def truncate_to_matrix(op: DilationOperator, levels: int, return_edge: bool = False):
    """Dense compression of ``op`` to ``H`` plus the first ``levels`` positions of each tail.

    Basis order: ``H``, then ``D_P`` positions ``0..levels-1``, then ``D_P*``
    positions ``0..levels-1``.  The compression of ``U`` is unitary only away
    from the truncation edge; with ``return_edge=True`` the operator norm of
    the part pushed beyond the edge is returned alongside the matrix.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    d = op.dims
    cols, spill = [], []
    basis = [("h", i, 0) for i in range(d.n)]
    basis += [("p", j, k) for k in range(levels) for j in range(d.r)]
    basis += [("ps", j, k) for k in range(levels) for j in range(d.s)]
    for part, idx, pos in basis:
        w = op.apply(DilationVector.basis(d, part, idx, pos))
        kept, _ = w.dense(levels)
        cols.append(kept)
        spill.append(np.concatenate([w.tail_p[levels:].ravel(), w.tail_ps[levels:].ravel()]))
    size = d.n + levels * (d.r + d.s)
    M = np.array(cols).T if cols else np.zeros((size, 0), complex)
    if not return_edge:
        return M
    width = max((len(x) for x in spill), default=0)
    E = np.zeros((width, len(basis)), complex)
    for j, x in enumerate(spill):
        E[: len(x), j] = x
    return M, operator_norm(E)
