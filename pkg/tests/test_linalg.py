import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tetrablock.linalg import (
    NotAContractionError,
    adj,
    commutator_residual,
    defect_operator,
    hermitian_eig,
    intertwining_residuals,
    numerical_radius,
    operator_norm,
    random_unitary,
)

from conftest import complex_matrices, contractions, seeds

J2 = np.array([[0, 1], [0, 0]], complex)


def power_iteration_norm(M, iters=2000):
    """Independent oracle: sqrt of the top eigenvalue of M*M by power iteration."""
    x = np.ones(M.shape[1], complex) + 0.1j * np.arange(M.shape[1])
    G = M.conj().T @ M
    for _ in range(iters):
        y = G @ x
        if np.linalg.norm(y) == 0:
            return 0.0
        x = y / np.linalg.norm(y)
    return float(np.sqrt(np.vdot(x, G @ x).real))


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(np.eye(2)) == pytest.approx(1.0, abs=1e-15)

    def test_partial_isometry(self):
        assert operator_norm(J2) == pytest.approx(1.0, abs=1e-15)

    def test_empty_is_zero(self):
        assert operator_norm(np.zeros((0, 0))) == 0.0

    def test_matches_power_iteration(self, rng):
        M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        assert abs(operator_norm(M) - power_iteration_norm(M)) <= 1e-10

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            operator_norm(np.array([[np.nan]]))

    @given(complex_matrices())
    def test_adjoint_invariance(self, M):
        assert abs(operator_norm(M) - operator_norm(adj(M))) <= 1e-12 * max(1, operator_norm(M))


class TestNumericalRadius:
    def test_zero(self):
        assert numerical_radius(np.zeros((3, 3))) == 0.0

    def test_hermitian_equals_norm(self, rng):
        X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        H = X + adj(X)
        assert abs(numerical_radius(H) - operator_norm(H)) <= 1e-8

    def test_jordan_block(self):
        # Frozen from a dense 2000-angle grid evaluation: 0.5000000000000001.
        assert abs(numerical_radius(J2) - 0.5) <= 1e-6

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            numerical_radius(J2, angular_grid=4)

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError):
            numerical_radius(np.zeros((2, 3)))

    def test_scalar(self):
        assert numerical_radius(np.array([[0.3 + 0.4j]])) == pytest.approx(0.5)

    @given(complex_matrices(max_n=5))
    def test_norm_sandwich(self, M):
        w, nrm = numerical_radius(M), operator_norm(M)
        assert w <= nrm + 1e-10
        assert nrm <= 2 * w + 1e-6 * max(1, nrm)

    @given(complex_matrices(max_n=4), st.floats(0, 2 * np.pi))
    def test_rotation_invariant(self, M, theta):
        a = numerical_radius(M)
        b = numerical_radius(np.exp(1j * theta) * M)
        assert abs(a - b) <= 1e-6 * max(1, a)


class TestDefectOperator:
    def test_zero_gives_identity(self):
        D, sp = defect_operator(np.zeros((3, 3)))
        assert np.allclose(D, np.eye(3)) and sp.dim == 3

    def test_unitary_gives_zero(self, rng):
        D, sp = defect_operator(random_unitary(4, rng))
        assert sp.dim == 0 and np.abs(D).max() < 1e-12
        assert sp.embed.shape == (4, 0)

    def test_scalar(self):
        D, sp = defect_operator(np.array([[0.5]]))
        assert sp.dim == 1 and D[0, 0] == pytest.approx(np.sqrt(0.75), abs=1e-15)

    def test_not_a_contraction(self):
        with pytest.raises(NotAContractionError):
            defect_operator(np.array([[1.1]]))

    def test_slightly_over_one_is_clamped(self):
        D, sp = defect_operator(np.array([[1 + 1e-13]]))
        assert sp.dim == 0

    @given(contractions(max_n=8))
    def test_square_and_embedding(self, P):
        D, sp = defect_operator(P)
        n = P.shape[0]
        assert operator_norm(D @ D - (np.eye(n) - adj(P) @ P)) <= 1e-10 * max(1, operator_norm(P) ** 2)
        assert np.allclose(adj(sp.embed) @ sp.embed, np.eye(sp.dim), atol=1e-12)
        assert operator_norm(D - adj(D)) <= 1e-14
        # the embedding spans the range of D
        assert operator_norm(sp.projector @ D - D) <= 1e-10
        assert operator_norm(sp.lift(sp.coord_defect) - D) <= 1e-10


class TestIntertwining:
    def test_zero(self):
        assert intertwining_residuals(np.zeros((2, 2))) == (0.0, 0.0)

    def test_unitary(self, rng):
        r1, r2 = intertwining_residuals(random_unitary(3, rng))
        assert r1 <= 1e-12 and r2 <= 1e-12

    def test_random_contractions(self, rng):
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 9))
            M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            P = rng.uniform(0, 1) * M / operator_norm(M)
            worst = max(worst, *intertwining_residuals(P))
        assert worst <= 1e-10


class TestCommutator:
    def test_self(self, rng):
        X = rng.normal(size=(3, 3))
        assert commutator_residual(X, X) == 0.0

    def test_diagonal(self):
        assert commutator_residual(np.diag([1, 2j]), np.diag([3, 4])) == 0.0

    def test_jordan(self):
        assert commutator_residual(J2, adj(J2)) == pytest.approx(1.0)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            commutator_residual(np.eye(2), np.eye(3))


@given(complex_matrices(max_n=5))
def test_spectral_factorization(M):
    H = M + adj(M)
    f = hermitian_eig(H)
    assert operator_norm(f.reconstruct() - H) <= 1e-10 * max(1, operator_norm(H))
    Q = f.eigenvectors
    assert np.allclose(adj(Q) @ Q, np.eye(len(Q)), atol=1e-12)


@given(seeds, st.integers(1, 6))
def test_random_unitary_is_unitary(seed, n):
    U = random_unitary(n, np.random.default_rng(seed))
    assert np.allclose(adj(U) @ U, np.eye(n), atol=1e-12)
