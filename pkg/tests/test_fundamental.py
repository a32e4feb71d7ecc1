from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tetrablock.fundamental import (
    FundamentalEquationError,
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
from tetrablock.generators import (
    build_instance,
    corpus,
    generate_scalar_instance,
    generate_tetrablock_unitary,
)
from tetrablock.linalg import DefectSpace, adj, defect_operator, operator_norm

from conftest import seeds


def scalar(x1, x2, x3):
    return generate_scalar_instance((x1, x2, x3))


def zero_triple(n=2):
    Z = np.zeros((n, n))
    return OperatorTriple(Z, Z, Z)


def exact_scalar_F(x1, x2, x3):
    """Scalar arithmetic in exact rationals: F1 = (x1 - x2 p)/(1 - p^2)."""
    x1, x2, x3 = (Fraction(str(v)) for v in (x1, x2, x3))
    den = 1 - x3 * x3
    return float((x1 - x2 * x3) / den), float((x2 - x1 * x3) / den)


class TestSolve:
    def test_scalar_example(self):
        fp = solve_fundamental(scalar(0.3, 0.4, 0.5))
        F1, F2 = exact_scalar_F(0.3, 0.4, 0.5)
        assert F1 == pytest.approx(2 / 15, abs=1e-15)
        assert F2 == pytest.approx(1 / 3, abs=1e-15)
        assert abs(fp.F1[0, 0] - F1) <= 1e-14 and abs(fp.F2[0, 0] - F2) <= 1e-14

    def test_adjoint_scalar_example(self):
        gp = solve_adjoint_fundamental(scalar(0.3, 0.4, 0.5))
        assert abs(gp.F1[0, 0] - 2 / 15) <= 1e-14 and abs(gp.F2[0, 0] - 1 / 3) <= 1e-14

    def test_adjoint_conjugates(self):
        gp = solve_adjoint_fundamental(scalar(0.3 + 0.1j, 0.4, 0))
        assert abs(gp.F1[0, 0] - (0.3 - 0.1j)) <= 1e-15 and abs(gp.F2[0, 0] - 0.4) <= 1e-15

    def test_p_zero(self):
        gp = solve_adjoint_fundamental(scalar(0.3, 0.4, 0))
        assert gp.F1[0, 0] == pytest.approx(0.3) and gp.F2[0, 0] == pytest.approx(0.4)

    def test_unitary_P_gives_empty_pair(self):
        t = generate_tetrablock_unitary(3, 1)
        fp = solve_fundamental(t)
        assert fp.F1.shape == (0, 0) and fp.F2.shape == (0, 0) and fp.dim == 0
        assert solve_adjoint_fundamental(t).dim == 0

    def test_zero_triple(self):
        fp = solve_fundamental(zero_triple())
        assert np.all(fp.F1 == 0) and np.all(fp.F2 == 0) and fp.dim == 2

    def test_unsolvable(self):
        # P = diag(1, 0) has defect kernel e0 but A - B*P = A has a nonzero (0, 0) entry.
        A = np.diag([0.5, 0])
        t = OperatorTriple(A, np.zeros((2, 2)), np.diag([1.0, 0]))
        with pytest.raises(FundamentalEquationError, match="unsolvable at tolerance"):
            solve_fundamental(t)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            OperatorTriple(np.eye(2), np.eye(2), np.eye(3))

    def test_arrays_frozen(self):
        t = scalar(0.1, 0.2, 0.3)
        with pytest.raises(ValueError):
            t.A[0, 0] = 1

    @given(seeds)
    def test_adjoint_duality(self, seed):
        spec = corpus("compressed-isometry", 1, seed)[0]
        t = build_instance(spec)
        gp = solve_adjoint_fundamental(t)
        other = solve_fundamental(OperatorTriple(adj(t.A), adj(t.B), adj(t.P)))
        assert operator_norm(gp.F1 - other.F1) <= 1e-12
        assert operator_norm(gp.F2 - other.F2) <= 1e-12


@pytest.mark.parametrize("family", ["scalar", "diagonal", "compressed-isometry", "polynomial"])
def test_round_trip(family):
    for spec in corpus(family, 8, seed=101):
        t = build_instance(spec)
        fp, gp = solve_fundamental(t), solve_adjoint_fundamental(t)
        thr = 1e-9 * max(1, operator_norm(t.A) + operator_norm(t.B))
        F1, F2 = fp.lifted()
        D = fp.space.defect
        assert operator_norm(D @ F1 @ D - (t.A - adj(t.B) @ t.P)) <= thr
        assert operator_norm(D @ F2 @ D - (t.B - adj(t.A) @ t.P)) <= thr
        G1, G2 = gp.lifted()
        Ds = gp.space.defect
        assert operator_norm(Ds @ G1 @ Ds - (adj(t.A) - t.B @ adj(t.P))) <= thr
        assert operator_norm(Ds @ G2 @ Ds - (adj(t.B) - t.A @ adj(t.P))) <= thr


class TestIntertwining:
    def test_scalar(self):
        t = scalar(0.3, 0.4, 0.5)
        fp, gp = solve_fundamental(t), solve_adjoint_fundamental(t)
        for r in (defect_intertwining_residuals(t, fp), cross_intertwining_residuals(t, fp, gp), defect_product_residuals(t, fp, gp),
                  mixed_defect_residuals(t, fp, gp)):
            assert max(r) <= 1e-12

    def test_zero(self):
        t = zero_triple()
        fp, gp = solve_fundamental(t), solve_adjoint_fundamental(t)
        for r in (defect_intertwining_residuals(t, fp), cross_intertwining_residuals(t, fp, gp), defect_product_residuals(t, fp, gp),
                  mixed_defect_residuals(t, fp, gp)):
            assert max(r) == 0

    @given(seeds, st.sampled_from(["diagonal", "compressed-isometry", "polynomial", "unitary"]))
    def test_generated(self, seed, family):
        t = build_instance(corpus(family, 1, seed)[0])
        fp, gp = solve_fundamental(t), solve_adjoint_fundamental(t)
        for r in (defect_intertwining_residuals(t, fp), cross_intertwining_residuals(t, fp, gp), defect_product_residuals(t, fp, gp),
                  mixed_defect_residuals(t, fp, gp)):
            assert max(r) <= 1e-9

    def test_intertwining_detects_wrong_F(self):
        t = scalar(0.3, 0.4, 0.5)
        fp = solve_fundamental(t)
        bad = FundamentalPair(fp.F1 + 0.01, fp.F2, fp.space, fp.residuals)
        assert defect_intertwining_residuals(t, bad)[0] > 1e-3


def _pair(F1, F2):
    _, space = defect_operator(np.zeros((len(F1), len(F1))))
    return FundamentalPair(np.asarray(F1, complex), np.asarray(F2, complex), space, (0.0, 0.0))


class TestCommutingNormal:
    def test_scalar_defect(self):
        assert commuting_normal_residuals(_pair([[0.3 + 0.2j]], [[-0.5j]])) == (0.0, 0.0)

    def test_diagonal(self):
        assert commuting_normal_residuals(_pair(np.diag([0.1, 0.2j]), np.diag([0.3, 0.4]))) == (0.0, 0.0)

    def test_jordan_and_identity(self):
        c1, c2 = commuting_normal_residuals(_pair([[0, 1], [0, 0]], np.eye(2)))
        assert c1 == 0.0 and c2 == pytest.approx(1.0)

    def test_empty(self):
        sp = DefectSpace(0, np.zeros((2, 0)), np.zeros((2, 2)), np.zeros((0, 0)))
        assert commuting_normal_residuals(FundamentalPair(np.zeros((0, 0)), np.zeros((0, 0)), sp, (0, 0))) == (0, 0)


class TestHypothesisSymmetry:
    def test_scalar(self):
        rep = check_hypothesis_symmetry(scalar(0.3, 0.4, 0.5))
        assert rep.passed and "satisfied" in rep.checks["hypothesis_symmetry"].note

    def test_diagonal(self):
        t = build_instance(corpus("diagonal", 1, 3)[0])
        assert check_hypothesis_symmetry(t).passed

    def test_violated_on_both_sides(self):
        # (c T, d T, 0) with |c| != |d| and T non-normal: both sides violate.
        T = np.array([[0, 1], [0, 0]], complex)
        t = OperatorTriple(0.6 * T, 0.3 * T, np.zeros((2, 2)))
        rep = check_hypothesis_symmetry(t)
        assert rep.passed
        assert rep.meta["commuting_normal_F"]["class"] == "violated"
        assert rep.meta["commuting_normal_G"]["class"] == "violated"

    def test_dead_zone_is_inconclusive(self):
        T = np.array([[0, 1], [0, 0]], complex)
        eps = 3e-9
        # [F1, F1*] - [F2, F2*] has norm (c^2 - d^2) here, placed inside (tol, 10 tol].
        c = np.sqrt(0.25 + eps)
        t = OperatorTriple(c * T, 0.5 * T, np.zeros((2, 2)))
        rep = check_hypothesis_symmetry(t)
        assert rep.checks["hypothesis_symmetry"].verdict == "inconclusive"

    def test_corpus_zero_disagreements(self):
        for fam in ("polynomial", "compressed-isometry"):
            for spec in corpus(fam, 10, seed=5):
                rep = check_hypothesis_symmetry(build_instance(spec))
                assert rep.checks["hypothesis_symmetry"].verdict == "pass"


class TestRadius:
    def test_zero_pair(self):
        rep = radius_certificates(_pair([[0]], [[0]]), _pair([[0]], [[0]]))
        assert rep.passed and rep.meta["max_radius_F"] == 0

    def test_scalar_p_zero(self):
        t = scalar(0.3, 0.4, 0)
        rep = radius_certificates(solve_fundamental(t), solve_adjoint_fundamental(t))
        assert rep.meta["max_radius_G"] == pytest.approx(0.7, abs=1e-12)
        assert rep.passed

    def test_violation(self):
        rep = radius_certificates(_pair([[0.8]], [[0.8]]), _pair([[0]], [[0]]))
        assert not rep.passed

    @given(seeds, st.sampled_from(["diagonal", "compressed-isometry", "polynomial"]))
    def test_generated(self, seed, family):
        t = build_instance(corpus(family, 1, seed)[0])
        assert radius_certificates(solve_fundamental(t), solve_adjoint_fundamental(t)).passed


class TestNecessary:
    def test_passes_on_scalar(self):
        assert necessary_checks(scalar(0.3, 0.4, 0.5)).passed

    def test_noncommuting(self):
        J = np.array([[0, 1], [0, 0]])
        rep = necessary_checks(OperatorTriple(J, J.T, np.zeros((2, 2))))
        assert "commute_AB" in rep.failures()
