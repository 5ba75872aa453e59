import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbpkit.errors import NotSymmetric, SingularMatrix
from sbpkit.linalg import LuFactorization, lu_solve, numeric_rank, sym_eigenvalues


def test_lu_identity_returns_rhs():
    v = np.array([3.0, -1.0, 0.5, 2.0, 7.0])
    assert np.allclose(lu_solve(np.eye(5), v), v, atol=0)


def test_lu_diagonal():
    assert np.allclose(lu_solve(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])


def test_lu_tridiagonal_substitution():
    m = 2.0 * np.eye(4) - np.eye(4, k=1) - np.eye(4, k=-1)
    x = lu_solve(m, np.array([1.0, 0.0, 0.0, 1.0]))
    # oracle: direct substitution M @ (1,1,1,1) = (1,0,0,1)
    assert np.allclose(m @ np.ones(4), [1.0, 0.0, 0.0, 1.0], atol=0)
    assert np.abs(x - 1.0).max() < 1e-13


def test_lu_singular_raises():
    m = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix):
        lu_solve(m, np.array([1.0, 1.0]))


def test_lu_residual_bound():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(60, 60)) + 60 * np.eye(60)
    b = rng.normal(size=60)
    x = lu_solve(m, b)
    norm_m = np.abs(m).sum(axis=1).max()
    assert np.abs(m @ x - b).max() <= 1e-10 * norm_m * np.abs(x).max()


@settings(deadline=None, max_examples=20)
@given(st.integers(2, 200), st.integers(0, 2 ** 31))
def test_lu_roundtrip_random(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + n * np.eye(n)
    x = rng.normal(size=n)
    got = lu_solve(m, m @ x)
    assert np.abs(got - x).max() <= 1e-9 * max(1.0, np.abs(x).max())


def test_lu_factorization_reuse():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(30, 30)) + 30 * np.eye(30)
    lu = LuFactorization(m)
    for _ in range(3):
        b = rng.normal(size=30)
        assert np.abs(m @ lu.solve(b, refine=1, matrix=m) - b).max() < 1e-10


def test_eigen_diagonal():
    rep = sym_eigenvalues(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(rep.eigenvalues, [1.0, 2.0, 3.0], atol=1e-14)
    assert rep.spectral_radius == 3.0
    assert rep.min_eigenvalue == 1.0


def test_eigen_reflection():
    rep = sym_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(rep.eigenvalues, [-1.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("n", [6, 12, 30])
def test_eigen_dirichlet_laplacian_closed_form(n):
    t = 2.0 * np.eye(n - 1) - np.eye(n - 1, k=1) - np.eye(n - 1, k=-1)
    rep = sym_eigenvalues(t)
    exact = np.sort(2.0 - 2.0 * np.cos(np.arange(1, n) * np.pi / n))
    assert np.abs(rep.eigenvalues - exact).max() < 1e-12


def test_eigen_rejects_asymmetric():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotSymmetric):
        sym_eigenvalues(m)


@settings(deadline=None, max_examples=15)
@given(st.integers(2, 40), st.integers(0, 2 ** 31))
def test_eigen_trace_property(n, seed):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=(n, n))
    s = s + s.T
    rep = sym_eigenvalues(s)
    tol = 1e-9 * np.abs(s).max() * n
    assert abs(rep.eigenvalues.sum() - np.trace(s)) <= max(tol, 1e-12)


@settings(deadline=None, max_examples=10)
@given(st.integers(3, 30), st.integers(0, 2 ** 31))
def test_eigen_permutation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=(n, n))
    s = s + s.T
    perm = rng.permutation(n)
    rep = sym_eigenvalues(s)
    rep_p = sym_eigenvalues(s[np.ix_(perm, perm)])
    assert np.abs(rep.eigenvalues - rep_p.eigenvalues).max() < 1e-10 * max(1.0, rep.spectral_radius)


def test_eigen_accuracy_against_lapack():
    rng = np.random.default_rng(11)
    s = rng.normal(size=(50, 50))
    s = s + s.T
    rep = sym_eigenvalues(s)
    exact = np.sort(np.linalg.eigvalsh(s))
    norm2 = np.abs(exact).max()
    assert np.abs(rep.eigenvalues - exact).max() <= 1e-10 * norm2


def test_numeric_rank_zero_matrix():
    assert numeric_rank(np.zeros((4, 4))) == 0


def test_numeric_rank_rank_one():
    assert numeric_rank(np.ones((6, 6))) == 1


def test_numeric_rank_env_override(monkeypatch):
    s = np.diag([1.0, 1e-6, 1e-12])
    assert numeric_rank(s) == 2
    monkeypatch.setenv("SBP_RANK_TOL", "1e-3")
    assert numeric_rank(s) == 1
