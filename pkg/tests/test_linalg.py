import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opiniongame.errors import NotPositiveDefiniteError, SingularMatrixError
from opiniongame.linalg import cholesky, gen_eigen_max, relative_residual, solve_linear, sym_eigen
from oracles import jacobi_eigenvalues

seeds = st.integers(0, 2**32 - 1)


def random_spd(rng, n, shift=0.5):
    X = rng.normal(size=(n, n))
    return X @ X.T + shift * np.eye(n)


class TestSolve:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.5])
        np.testing.assert_array_equal(solve_linear(np.eye(3), b), b)

    def test_path3_nash(self):
        M = np.array([[2, -1, 0], [-1, 3, -1], [0, -1, 2]], float)
        np.testing.assert_allclose(solve_linear(M, [0, 0.5, 1]), [0.25, 0.5, 0.75], atol=1e-15)

    def test_refinement_oracle(self):
        rng = np.random.default_rng(1)
        M = rng.normal(size=(6, 6)) + 6 * np.eye(6)
        b = rng.normal(size=6)
        z = solve_linear(M, b)
        # one step of iterative refinement should not move the answer
        dz = np.linalg.lstsq(M, b - M @ z, rcond=None)[0]
        assert np.abs(dz).max() <= 1e-12 * np.abs(z).max()
        assert relative_residual(M, z, b) <= 1e-10

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])

    @given(seeds, st.integers(1, 10))
    @settings(max_examples=40, deadline=None)
    def test_residual_property(self, seed, n):
        rng = np.random.default_rng(seed)
        U, _ = np.linalg.qr(rng.normal(size=(n, n)))
        V, _ = np.linalg.qr(rng.normal(size=(n, n)))
        sv = np.logspace(0, -rng.uniform(0, 8), n)  # condition number <= 1e8
        M = U @ np.diag(sv) @ V.T
        b = rng.normal(size=n)
        assert relative_residual(M, solve_linear(M, b), b) <= 1e-10


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)).R, np.eye(3))

    def test_hand_example(self):
        R = cholesky([[4.0, 2.0], [2.0, 3.0]]).R
        np.testing.assert_allclose(R, [[2.0, 1.0], [0.0, np.sqrt(2.0)]], atol=1e-15)

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    @given(seeds, st.integers(1, 9))
    @settings(max_examples=40, deadline=None)
    def test_reconstruction(self, seed, n):
        M = random_spd(np.random.default_rng(seed), n)
        R = cholesky(M).R
        assert np.allclose(R, np.triu(R)) and np.all(np.diag(R) > 0)
        assert np.abs(R.T @ R - M).max() <= 1e-8 * np.abs(M).max()


class TestSymEigen:
    def test_path3_laplacian(self):
        L = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], float)
        np.testing.assert_allclose(sym_eigen(L).eigenvalues, [0, 1, 3], atol=1e-12)
        np.testing.assert_allclose(sym_eigen(2 * L).eigenvalues, [0, 2, 6], atol=1e-12)

    def test_identity(self):
        np.testing.assert_allclose(sym_eigen(np.eye(4)).eigenvalues, 1.0)

    def test_sign_convention(self):
        dec = sym_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
        for k in range(2):
            v = dec.eigenvectors[:, k]
            i = np.argmax(np.abs(v) >= np.abs(v).max() - 1e-12)
            assert v[i] > 0

    @given(seeds, st.integers(1, 9))
    @settings(max_examples=40, deadline=None)
    def test_contracts_against_jacobi(self, seed, n):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, n))
        M = X + X.T
        dec = sym_eigen(M)
        lam, Q = dec.eigenvalues, dec.eigenvectors
        norm = max(1.0, np.abs(M).sum(axis=1).max())
        assert np.all(np.diff(lam) >= 0)
        assert np.abs(M @ Q - Q * lam).max() <= 1e-8 * norm
        assert np.abs(Q.T @ Q - np.eye(n)).max() <= 1e-8
        assert np.abs(Q @ np.diag(lam) @ Q.T - M).max() <= 1e-8 * norm
        np.testing.assert_allclose(lam, jacobi_eigenvalues(M), atol=1e-9 * norm)


class TestGenEigenMax:
    def test_equal_pair(self):
        B = random_spd(np.random.default_rng(0), 4)
        lam, _ = gen_eigen_max(B, B)
        assert lam == pytest.approx(1.0, abs=1e-12)

    def test_diagonal(self):
        lam, x = gen_eigen_max(np.diag([2.0, 1.0]), np.eye(2))
        assert lam == pytest.approx(2.0)
        np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-12)

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            gen_eigen_max(np.eye(2), np.diag([1.0, -1.0]))

    def test_random_probe_oracle(self):
        rng = np.random.default_rng(5)
        B = random_spd(rng, 5)
        X = rng.normal(size=(5, 5))
        C = X @ X.T
        lam, x = gen_eigen_max(C, B)
        assert x @ B @ x == pytest.approx(1.0, rel=1e-9)
        assert (x @ C @ x) / (x @ B @ x) == pytest.approx(lam, rel=1e-9)
        probes = rng.normal(size=(1000, 5))
        q = np.einsum("ki,ij,kj->k", probes, C, probes) / np.einsum("ki,ij,kj->k", probes, B, probes)
        assert lam >= q.max() - 1e-9
        # independent oracle: eigenvalues of B^{-1/2} C B^{-1/2} by Jacobi
        w, V = np.linalg.eigh(B)
        Bmh = V @ np.diag(w**-0.5) @ V.T
        assert lam == pytest.approx(jacobi_eigenvalues(Bmh @ C @ Bmh)[-1], rel=1e-9)

    @given(seeds, st.integers(1, 7))
    @settings(max_examples=40, deadline=None)
    def test_dominates_rayleigh_quotients(self, seed, n):
        rng = np.random.default_rng(seed)
        B = random_spd(rng, n)
        X = rng.normal(size=(n, n))
        C = X + X.T
        lam, x = gen_eigen_max(C, B)
        assert np.abs(C @ x - lam * B @ x).max() <= 1e-8 * max(1.0, np.abs(C).max(), abs(lam) * np.abs(B).max())
        for _ in range(20):
            p = rng.normal(size=n)
            assert lam >= (p @ C @ p) / (p @ B @ p) - 1e-9 * max(1.0, abs(lam))
