import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tetrablock.dilation import (
    DilationHypothesisError,
    DilationVector,
    Identity,
    SpaceDims,
    VectorBatch,
    apply,
    apply_adjoint,
    apply_power,
    build_isometric_dilation,
    build_unitary_dilation,
    compose,
    dilation_from,
    truncate_to_matrix,
)
from tetrablock.fundamental import OperatorTriple, solve_adjoint_fundamental, solve_fundamental
from tetrablock.generators import build_instance, corpus, generate_scalar_instance

from conftest import seeds

FAMILIES = ["scalar", "diagonal", "unitary", "compressed-isometry"]


def scalar_dil(x1, x2, x3):
    return dilation_from(generate_scalar_instance((x1, x2, x3)))


def random_dilation(seed, family=None):
    rng = np.random.default_rng(seed)
    family = family or FAMILIES[int(rng.integers(len(FAMILIES)))]
    return dilation_from(build_instance(corpus(family, 1, seed)[0]))


def ops_of(dil):
    return {"R1": dil.R1, "R2": dil.R2, "U": dil.U, "V1": dil.V1, "V2": dil.V2, "V3": dil.V3,
            "C1": dil.C(1), "D3": dil.D(3), "id": Identity(dil.dims),
            "comp": compose(dil.R1, dil.U)}


class TestVectors:
    def test_trailing_zeros_trimmed(self):
        d = SpaceDims(1, 1, 1)
        v = DilationVector.make(d, [1], [[1], [0], [0]], [[0]])
        assert v.tail_p.shape == (1, 1) and v.tail_ps.shape == (0, 1)

    def test_basis(self):
        v = DilationVector.basis(SpaceDims(2, 2, 1), "p", 1, 3)
        assert v.support == 4 and v.tail_p[3, 1] == 1 and v.norm() == 1

    def test_zero_dimensional_tails(self):
        v = DilationVector.random(SpaceDims(2, 0, 0), np.random.default_rng(0))
        assert v.tail_p.shape[1] == 0 and v.norm() == pytest.approx(1)

    def test_inner_and_distance(self, rng):
        d = SpaceDims(2, 2, 3)
        x, y = DilationVector.random(d, rng), DilationVector.random(d, rng)
        assert (x - y).norm() == pytest.approx(x.distance(y), abs=1e-15)
        assert x.inner(x).real == pytest.approx(x.norm() ** 2)

    def test_batch_roundtrip(self, rng):
        d = SpaceDims(2, 1, 2)
        vs = [DilationVector.random(d, rng) for _ in range(5)]
        b = VectorBatch.stack(vs)
        for i, v in enumerate(vs):
            assert b[i].distance(v) == 0
        assert np.allclose(b.norms(), [v.norm() for v in vs])


class TestIsometric:
    def test_zero_triple(self):
        t = generate_scalar_instance((0, 0, 0))
        V1, V2, V3 = build_isometric_dilation(t, solve_fundamental(t))
        w = V3.apply(DilationVector.basis(V3.dims, "h", 0))
        assert np.allclose(w.tail_p, [[1]]) and w.h[0] == 0
        assert V1.apply(DilationVector.basis(V1.dims, "h", 0)).norm() == 0

    def test_scalar_V1(self):
        t = generate_scalar_instance((0.3, 0.4, 0))
        V1, _, _ = build_isometric_dilation(t, solve_fundamental(t))
        w = V1.apply(DilationVector.basis(V1.dims, "h", 0))
        assert w.h[0] == pytest.approx(0.3) and np.allclose(w.tail_p, [[0.4]])

    def test_V3_tail_support_one(self):
        t = generate_scalar_instance((0.3, 0.4, 0.5))
        _, _, V3 = build_isometric_dilation(t, solve_fundamental(t))
        assert V3.apply(DilationVector.basis(V3.dims, "h", 0)).support == 1

    @given(seeds)
    def test_V3_isometric(self, seed):
        dil = random_dilation(seed)
        rng = np.random.default_rng(seed)
        _, _, V3 = build_isometric_dilation(dil.triple, dil.fp)
        for _ in range(20):
            v = DilationVector.random(V3.dims, rng)
            assert abs(V3.apply(v).norm() - v.norm()) <= 1e-12

    def test_hypothesis_failure(self):
        T = np.array([[0, 1], [0, 0]], complex)
        t = OperatorTriple(0.6 * T, 0.3 * T, np.zeros((2, 2)))
        with pytest.raises(DilationHypothesisError):
            build_isometric_dilation(t, solve_fundamental(t))
        with pytest.raises(DilationHypothesisError):
            build_unitary_dilation(t, solve_fundamental(t), solve_adjoint_fundamental(t))


class TestUnitaryDilation:
    def test_scalar_bilateral_shift(self):
        dil = scalar_dil(0.3, 0.4, 0)
        w = dil.U.apply(DilationVector.basis(dil.dims, "h", 0))
        assert w.h[0] == 0 and np.allclose(w.tail_p, [[1]]) and w.tail_ps.shape[0] == 0

    def test_C3_on_position_zero(self):
        dil = scalar_dil(0.3, 0.4, 0.5)
        w = dil.U.apply(DilationVector.basis(dil.dims, "ps", 0, 0))
        dps = np.sqrt(0.75)
        assert w.h[0] == pytest.approx(dps)
        assert np.allclose(w.tail_p, [[-0.5]]) and w.tail_ps.shape[0] == 0
        # D3 shifts the tail down
        w = dil.U.apply(DilationVector.basis(dil.dims, "ps", 0, 2))
        assert np.allclose(w.tail_ps, [[0], [1]])

    def test_unitary_P_collapses(self):
        t = build_instance(corpus("unitary", 1, 4)[0])
        dil = dilation_from(t)
        assert dil.dims.r == 0 and dil.dims.s == 0
        for i in range(t.n):
            e = DilationVector.basis(dil.dims, "h", i)
            assert np.allclose(dil.U.apply(e).h, t.P[:, i])
            assert np.allclose(dil.R1.apply(e).h, t.A[:, i])

    @given(seeds)
    def test_support_grows_by_at_most_one(self, seed):
        dil = random_dilation(seed)
        rng = np.random.default_rng(seed)
        for op in ops_of(dil).values():
            grow = len(op.ops) if op.kind == "composition" else 1
            v = DilationVector.random(dil.dims, rng)
            assert op.apply(v).support <= v.support + grow
            assert op.apply_adjoint(v).support <= v.support + grow

    @given(seeds)
    def test_adjoint_duality(self, seed):
        dil = random_dilation(seed)
        rng = np.random.default_rng(seed)
        for op in ops_of(dil).values():
            for _ in range(10):
                x, y = DilationVector.random(dil.dims, rng), DilationVector.random(dil.dims, rng)
                lhs = op.apply(x).inner(y)
                rhs = x.inner(op.apply_adjoint(y))
                assert abs(lhs - rhs) <= 1e-12 * x.norm() * y.norm()

    @given(seeds)
    def test_U_unitary_exact(self, seed):
        dil = random_dilation(seed)
        rng = np.random.default_rng(seed)
        for _ in range(10):
            v = DilationVector.random(dil.dims, rng)
            assert dil.U.apply(dil.U.apply_adjoint(v)).distance(v) <= 1e-12
            assert dil.U.apply_adjoint(dil.U.apply(v)).distance(v) <= 1e-12

    def test_batch_matches_single(self, rng):
        dil = random_dilation(3, "compressed-isometry")
        vs = [DilationVector.random(dil.dims, rng) for _ in range(6)]
        b = VectorBatch.stack(vs)
        for op in (dil.R1, dil.R2, dil.U):
            out, outa = op.apply(b), op.apply_adjoint(b)
            for i, v in enumerate(vs):
                assert out[i].distance(op.apply(v)) <= 1e-15
                assert outa[i].distance(op.apply_adjoint(v)) <= 1e-15


class TestFunctional:
    def test_identity(self, rng):
        dil = scalar_dil(0.1, 0.2, 0.3)
        v = DilationVector.random(dil.dims, rng)
        assert apply(Identity(dil.dims), v) is v

    def test_dims_checked(self):
        dil = scalar_dil(0.1, 0.2, 0.3)
        with pytest.raises(ValueError, match="dimension mismatch"):
            apply(dil.U, DilationVector.zeros(SpaceDims(2, 1, 1)))
        with pytest.raises(ValueError):
            apply_adjoint(dil.U, DilationVector.zeros(SpaceDims(1, 2, 1)))

    def test_power_and_composition(self, rng):
        dil = scalar_dil(0.1, 0.2, 0.3)
        v = DilationVector.random(dil.dims, rng)
        assert apply_power(dil.U, v, 2).distance(compose(dil.U, dil.U).apply(v)) == 0


class TestTruncation:
    def test_scalar_levels_one(self):
        dil = scalar_dil(0.3, 0.4, 0)
        M, edge = truncate_to_matrix(dil.U, 1, return_edge=True)
        # basis: h, D_P position 0, D_P* position 0
        assert np.allclose(M, [[0, 0, 1], [1, 0, 0], [0, 0, 0]])
        assert edge == pytest.approx(1.0)

    def test_identity(self):
        d = SpaceDims(2, 1, 1)
        assert np.allclose(truncate_to_matrix(Identity(d), 3), np.eye(2 + 3 + 3))

    def test_V3_isometric_below_edge(self):
        dil = scalar_dil(0.2, 0.1, 0.5)
        L = 6
        M = truncate_to_matrix(dil.V3, L)
        # the V3 part ignores the D_P* tail; columns of H and the first L-1 positions are orthonormal
        keep = list(range(1 + L - 1))
        G = M[:, keep].conj().T @ M[:, keep]
        assert np.allclose(G, np.eye(len(keep)), atol=1e-12)

    def test_levels_validated(self):
        with pytest.raises(ValueError):
            truncate_to_matrix(Identity(SpaceDims(1, 1, 1)), 0)
