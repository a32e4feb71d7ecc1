"""Instance families that are tetrablock contractions by construction.

* scalar / diagonal: a point of the closed tetrablock, or a direct sum of
  such points (the sup norm of a polynomial over a direct sum is the max
  over the summands).
* unitary: simultaneously diagonalizable ``(N2* N3, N2, N3)`` with ``N3``
  unitary and ``N2`` a normal contraction.
* compressed-isometry: block Toeplitz multiplication operators with symbols
  ``G1* + G2 z``, ``G2* + G1 z`` and ``z`` compressed to the first few
  coefficient blocks, which span a co-invariant subspace.
* polynomial: ``(c T, d T, e T^2)`` for a contraction ``T`` and a point
  ``(c, d, e)`` of the closed tetrablock.  The map ``z -> (c z, d z, e z^2)``
  sends the closed disc into the closed tetrablock, so von Neumann's
  inequality makes the triple a tetrablock contraction.  For non-normal
  ``T`` and ``|c| != |d|`` the commutation hypothesis on the fundamental
  operators fails, which gives negative instances for the F/G equivalence.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .config import InstanceSpec
from .domain import TetraPoint, point_in_closure
from .fundamental import (
    DEFAULT_TOL,
    FundamentalEquationError,
    OperatorTriple,
    commuting_normal_residuals,
    solve_adjoint_fundamental,
    solve_fundamental,
)
from .linalg import (
    DEFAULT_ANGULAR_GRID,
    DEFAULT_RANK_TOL,
    adj,
    as_matrix,
    commutator,
    commutator_residual,
    numerical_radius,
    operator_norm,
    random_unitary,
)

MEMBERSHIP_TOL = 1e-12


class GeneratorError(ValueError):
    """Generator preconditions are not met."""


def _require_member(p) -> TetraPoint:
    p = p if isinstance(p, TetraPoint) else TetraPoint(*p)
    if not point_in_closure(p, MEMBERSHIP_TOL).in_closure:
        raise GeneratorError(f"point {p.as_tuple()} is outside the closed tetrablock")
    return p


def generate_scalar_instance(p) -> OperatorTriple:
    p = _require_member(p)
    return OperatorTriple(*(np.array([[x]], complex) for x in p.as_tuple()))


def generate_diagonal_instance(points: Iterable) -> OperatorTriple:
    pts = [_require_member(p) for p in points]
    if not pts:
        raise GeneratorError("need at least one point")
    cols = np.array([p.as_tuple() for p in pts], complex)
    return OperatorTriple(*(np.diag(cols[:, k]) for k in range(3)))


def generate_tetrablock_unitary(n: int, seed: int | None = None, *,
                                moduli=None, phases=None, rng=None) -> OperatorTriple:
    """``N3 = Q diag(phases) Q*``, ``N2 = Q diag(moduli) Q*``, ``N1 = N2* N3``.

    ``moduli`` are the (complex, modulus at most one) eigenvalues of ``N2``
    and ``phases`` the unimodular eigenvalues of ``N3``; both are drawn from
    the seed when omitted.
    """
    if n < 1:
        raise GeneratorError("n must be >= 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    if moduli is None:
        moduli = np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    if phases is None:
        phases = np.exp(2j * np.pi * rng.random(n))
    moduli = np.asarray(moduli, complex).reshape(n)
    phases = np.asarray(phases, complex).reshape(n)
    if np.any(np.abs(moduli) > 1 + MEMBERSHIP_TOL):
        raise GeneratorError("eigenvalues of N2 must have modulus at most 1")
    if not np.allclose(np.abs(phases), 1.0, atol=1e-12):
        raise GeneratorError("eigenvalues of N3 must be unimodular")
    Q = random_unitary(n, rng) if n > 1 else np.eye(1, dtype=complex)
    N3 = Q @ np.diag(phases) @ adj(Q)
    N2 = Q @ np.diag(moduli) @ adj(Q)
    return OperatorTriple(adj(N2) @ N3, N2, N3)


def toeplitz_triple(G1, G2, levels: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First ``levels`` coefficient blocks of the multiplication operators."""
    G1 = as_matrix(G1, square=True, name="G1")
    G2 = as_matrix(G2, square=True, name="G2")
    if G1.shape != G2.shape:
        raise GeneratorError("G1 and G2 must have equal shape")
    if levels < 1:
        raise GeneratorError("levels must be >= 1")
    k = G1.shape[0]
    S = np.eye(levels, k=-1)
    A = np.kron(np.eye(levels), adj(G1)) + np.kron(S, G2)
    B = np.kron(np.eye(levels), adj(G2)) + np.kron(S, G1)
    P = np.kron(S, np.eye(k))
    return A, B, P


def generate_compressed_isometry_instance(G1, G2, levels: int, *, tol: float = DEFAULT_TOL,
                                          rank_tol: float = DEFAULT_RANK_TOL,
                                          angular_grid: int = DEFAULT_ANGULAR_GRID,
                                          z_samples: int = 16,
                                          filter_condition: bool = True) -> OperatorTriple:
    """Compressed block Toeplitz triple with symbols ``G1* + G2 z``, ``G2* + G1 z``, ``z``.

    Hypotheses: ``[G1, G2] = 0``, ``[G1, G1*] = [G2, G2*]`` and
    ``w(G1 + z G2) <= 1`` on a ``z_samples`` grid of the circle.  The
    resulting triple is kept only if both fundamental solves succeed and the
    commutation condition holds for ``F`` and ``G`` at ``tol`` (compression
    is not guaranteed to preserve it).
    """
    A, B, P = toeplitz_triple(G1, G2, levels)
    G1, G2 = as_matrix(G1), as_matrix(G2)
    scale = max(1.0, operator_norm(G1), operator_norm(G2)) ** 2
    c1 = commutator_residual(G1, G2)
    c2 = operator_norm(commutator(G1, adj(G1)) - commutator(G2, adj(G2)))
    if max(c1, c2) > tol * scale:
        raise GeneratorError(f"G1, G2 violate the commutation hypothesis ({c1:.2e}, {c2:.2e})")
    zs = np.exp(2j * np.pi * np.arange(z_samples) / z_samples)
    w = max(numerical_radius(G1 + z * G2, angular_grid) for z in zs)
    if w > 1 + tol:
        raise GeneratorError(f"numerical radius of G1 + z G2 reaches {w:.6f} > 1")
    t = OperatorTriple(A, B, P)
    if filter_condition:
        try:
            fp = solve_fundamental(t, rank_tol, tol)
            gp = solve_adjoint_fundamental(t, rank_tol, tol)
        except FundamentalEquationError as exc:
            raise GeneratorError(f"compressed triple rejected: {exc}") from exc
        for label, pair in (("F", fp), ("G", gp)):
            sc = max(1.0, operator_norm(pair.F1), operator_norm(pair.F2)) ** 2
            if max(commuting_normal_residuals(pair)) > tol * sc:
                raise GeneratorError(f"compressed triple rejected: condition fails on the {label} side")
    return t


def random_commuting_normal_pair(k: int, rng: np.random.Generator,
                                 radius: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Simultaneously diagonal ``G1, G2`` with ``|a_i| + |b_i| <= radius``.

    For a commuting normal pair ``w(G1 + z G2) = max_i |a_i + z b_i|``, whose
    maximum over the circle is ``max_i (|a_i| + |b_i|)``.
    """
    mod = rng.random((k, 2))
    mod = radius * rng.random((k, 1)) * mod / mod.sum(axis=1, keepdims=True)
    eig = mod * np.exp(2j * np.pi * rng.random((k, 2)))
    Q = random_unitary(k, rng) if k > 1 else np.eye(1, dtype=complex)
    return (Q @ np.diag(eig[:, 0]) @ adj(Q), Q @ np.diag(eig[:, 1]) @ adj(Q))


def random_contraction(n: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Complex Gaussian matrix rescaled to operator norm ``norm``."""
    T = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return norm * T / max(operator_norm(T), 1e-300)


def generate_polynomial_instance(T, point) -> OperatorTriple:
    """``(c T, d T, e T^2)`` for a contraction ``T`` and ``(c, d, e)`` in the closed tetrablock."""
    T = as_matrix(T, square=True, name="T")
    if operator_norm(T) > 1 + MEMBERSHIP_TOL:
        raise GeneratorError("T must be a contraction")
    c, d, e = _require_member(point).as_tuple()
    return OperatorTriple(c * T, d * T, e * (T @ T))


# ---------------------------------------------------------------- sampling

def sample_closure_points(m: int, rng: np.random.Generator) -> list[TetraPoint]:
    """Points of the closed tetrablock by rejection from the box ``|Re|, |Im| <= 1``."""
    out: list[TetraPoint] = []
    while len(out) < m:
        z = rng.uniform(-1, 1, size=(4 * m, 3)) + 1j * rng.uniform(-1, 1, size=(4 * m, 3))
        for row in z:
            if point_in_closure(tuple(row), MEMBERSHIP_TOL).in_closure:
                out.append(TetraPoint(*row))
                if len(out) == m:
                    break
    return out


def sample_bE_points(m: int, rng: np.random.Generator) -> list[TetraPoint]:
    """``(x1, conj(x1) x3, x3)`` with ``|x1| <= 1`` and ``|x3| = 1``."""
    x1 = np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
    x3 = np.exp(2j * np.pi * rng.random(m))
    return [TetraPoint(a, np.conj(a) * c, c) for a, c in zip(x1, x3)]


def sample_polynomial_point(rng: np.random.Generator, equal_moduli: bool = False) -> TetraPoint:
    """A random ``(c, d, e)`` in the closed tetrablock, optionally with ``|c| = |d|``."""
    while True:
        c, d, e = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
        if equal_moduli:
            d = abs(c) * d / abs(d)
        p = (c, d, e)
        if point_in_closure(p, MEMBERSHIP_TOL).in_closure:
            return TetraPoint(*p)


# ---------------------------------------------------------------- specs

def _pt(d) -> tuple[complex, complex, complex]:
    from .io import complex_from_json

    if len(d) != 3:
        raise GeneratorError("a point needs three coordinates")
    return tuple(complex_from_json(v) for v in d)


def build_instance(spec: InstanceSpec) -> OperatorTriple:
    """Deterministically realize an :class:`InstanceSpec`."""
    from .io import load_triple, matrix_from_json

    p, rng = spec.params, np.random.default_rng(spec.seed)
    if spec.kind == "scalar":
        return generate_scalar_instance(_pt(p["point"]))
    if spec.kind == "diagonal":
        if "points" in p:
            return generate_diagonal_instance([_pt(q) for q in p["points"]])
        return generate_diagonal_instance(sample_closure_points(int(p.get("n", 3)), rng))
    if spec.kind == "unitary":
        return generate_tetrablock_unitary(int(p.get("n", 3)), rng=rng)
    if spec.kind == "compressed-isometry":
        levels = int(p.get("levels", 2))
        if "G1" in p:
            G1, G2 = matrix_from_json(p["G1"]), matrix_from_json(p["G2"])
        else:
            G1, G2 = random_commuting_normal_pair(int(p.get("k", 2)), rng)
        return generate_compressed_isometry_instance(G1, G2, levels)
    if spec.kind == "polynomial":
        n = int(p.get("n", 3))
        T = random_contraction(n, rng, float(p.get("norm", 1.0)))
        point = _pt(p["point"]) if "point" in p else sample_polynomial_point(
            rng, bool(p.get("equal_moduli", False)))
        return generate_polynomial_instance(T, point)
    if spec.kind == "file":
        return load_triple(p["path"])
    raise GeneratorError(f"unsupported kind {spec.kind!r}")


def corpus(family: str, count: int, seed: int = 0) -> list[InstanceSpec]:
    """``count`` random specs of one family with seeds ``seed, seed + 1, ...``.

    Dimensions stay at desk scale (``n <= 8``).
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        s = seed + i
        if family == "scalar":
            q = sample_closure_points(1, rng)[0]
            from .io import complex_to_json

            params = {"point": [complex_to_json(x) for x in q.as_tuple()]}
        elif family == "diagonal":
            params = {"n": int(rng.integers(1, 7))}
        elif family == "unitary":
            params = {"n": int(rng.integers(1, 7))}
        elif family == "compressed-isometry":
            k = int(rng.integers(1, 4))
            params = {"k": k, "levels": int(rng.integers(1, max(2, 8 // k) + 1))}
        elif family == "polynomial":
            params = {"n": int(rng.integers(2, 6)), "norm": float(rng.uniform(0.3, 1.0)),
                      "equal_moduli": bool(i % 2)}
        else:
            raise GeneratorError(f"unknown family {family!r}")
        out.append(InstanceSpec(family, params, seed=s, note=f"{family} corpus #{i}"))
    return out


FAMILIES = ("scalar", "diagonal", "unitary", "compressed-isometry", "polynomial")
