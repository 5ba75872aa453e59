import numpy as np
import pytest

from sbpkit.errors import SingularInterior
from sbpkit.linalg import numeric_rank
from sbpkit.operators import build_d2, make_grid
from sbpkit.pseudoinverse import (
    PseudoinverseBundle,
    build_g2,
    extract_interior,
    filtered_pseudoinverse,
    moore_penrose,
    solve_neumann_system,
)

ALPHA_STAR_24 = 481.3408873321106


def unit(n, i):
    v = np.zeros(n + 1)
    v[i] = 1.0
    return v


def projector(n):
    return np.eye(n + 1) - np.ones((n + 1, n + 1)) / (n + 1)


# -- interior extraction -----------------------------------------------------------


def test_extract_interior_small():
    a = np.arange(9.0).reshape(3, 3)
    assert extract_interior(a) == np.array([[4.0]])


def test_extract_interior_order2():
    op = build_d2(make_grid(4), 2)
    want = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]) / op.grid.h
    assert np.abs(extract_interior(op.A) - want).max() == 0.0


def test_interior_rank_full_at_classical_parameter():
    op = build_d2(make_grid(24), 6, 490.0)
    assert numeric_rank(extract_interior(op.A), 1e-9) == 23


# -- bordered inverse ----------------------------------------------------------------


def test_g2_identity_action_on_ones():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    g2 = build_g2(op)
    n = g.n
    ones = np.ones(n + 1)
    want = ones - (n + 1) / 2.0 * (unit(n, 0) + unit(n, n))
    assert np.abs(op.A @ g2 @ ones - want).max() < 1e-9 * (n + 1)


def test_g2_order2_matches_direct_inverse():
    op = build_d2(make_grid(4), 2)
    g2 = build_g2(op)
    want = np.linalg.inv(extract_interior(op.A))
    assert np.abs(g2[1:-1, 1:-1] - want).max() < 1e-12 * np.abs(want).max()
    assert np.abs(g2[0]).max() == 0.0 and np.abs(g2[:, 0]).max() == 0.0
    assert np.abs(g2[-1]).max() == 0.0 and np.abs(g2[:, -1]).max() == 0.0


def test_g2_singular_at_limit():
    op = build_d2(make_grid(24), 6, ALPHA_STAR_24)
    with pytest.raises(SingularInterior):
        build_g2(op)


# -- Moore-Penrose inverse --------------------------------------------------------------


def penrose_residuals(a, ap, n):
    proj = projector(n)
    scale_a = np.abs(a).max()
    scale_ap = np.abs(ap).max()
    return {
        "ap_in_range": np.abs(a @ ap @ a - a).max() / scale_a,
        "ap_idempotent": np.abs(ap @ a @ ap - ap).max() / scale_ap,
        "a_ap_symmetric": np.abs(a @ ap - (a @ ap).T).max(),
        "ap_a_symmetric": np.abs(ap @ a - (ap @ a).T).max(),
        "projection": np.abs(ap @ a - proj).max(),
    }


@pytest.mark.parametrize("order", [2, 6])
@pytest.mark.parametrize("alpha", [481.5, 484.3, 490.0])
@pytest.mark.parametrize("n", [12, 24, 50])
def test_penrose_identities(order, alpha, n):
    op = build_d2(make_grid(n), order, alpha if order == 6 else None)
    ap = moore_penrose(op)
    for name, res in penrose_residuals(op.A, ap, n).items():
        assert res <= 1e-8, (name, res)


def test_moore_penrose_annihilates_constants():
    op = build_d2(make_grid(24), 6, 490.0)
    ap = moore_penrose(op)
    assert np.abs(ap @ np.ones(25)).max() < 1e-12


def test_moore_penrose_boundary_difference_response():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    ap = moore_penrose(op)
    rhs = unit(24, 24) - unit(24, 0)
    assert np.abs(ap @ rhs - (g.nodes - 0.5)).max() < 1e-10


@pytest.mark.parametrize("order,n", [(2, 8), (2, 16), (6, 12), (6, 16)])
def test_moore_penrose_against_eigendecomposition_oracle(order, n):
    """Brute-force oracle: invert the nonzero eigenvalues, zero out the null one."""
    op = build_d2(make_grid(n), order, 490.0 if order == 6 else None)
    w, v = np.linalg.eigh(op.A)
    cut = 1e-9 * np.abs(w).max()
    inv = np.where(np.abs(w) > cut, 1.0 / np.where(w == 0.0, 1.0, w), 0.0)
    oracle = (v * inv) @ v.T
    ap = moore_penrose(op)
    assert np.abs(ap - oracle).max() <= 1e-7 * np.abs(oracle).max()


# -- filtered variant ---------------------------------------------------------------------


def test_filtered_rows_of_residual_identical():
    op = build_d2(make_grid(24), 6, 490.0)
    b = filtered_pseudoinverse(op)
    res = b @ op.A - np.eye(25)
    assert np.abs(res - res[0]).max() < 1e-9
    assert np.linalg.matrix_rank(res, tol=1e-8) <= 1


def test_filtered_symmetric():
    op = build_d2(make_grid(24), 6, 484.3)
    b = filtered_pseudoinverse(op)
    assert np.abs(b - b.T).max() < 1e-12 * np.abs(b).max()


def test_filtered_mean_subtraction_recovers_projection():
    rng = np.random.default_rng(5)
    op = build_d2(make_grid(24), 6, 490.0)
    b = filtered_pseudoinverse(op)
    ones = np.ones(25)
    for _ in range(5):
        w = rng.normal(size=25)
        lhs = b @ (op.A @ w)
        lhs = lhs - lhs.mean() * ones
        rhs = w - w.mean() * ones
        assert np.abs(lhs - rhs).max() < 1e-8


# -- mean-zero solves --------------------------------------------------------------------


def test_solve_quadratic_right_hand_side():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    x = g.nodes
    b = op.A @ x ** 2
    v = solve_neumann_system(op, b)
    want = x ** 2 - np.mean(x ** 2)
    assert np.abs(v - want).max() < 1e-9
    assert np.abs(op.A @ v - b).max() < 1e-8 * np.abs(b).max()


def test_solve_zero_gives_zero():
    op = build_d2(make_grid(24), 6, 490.0)
    assert np.abs(solve_neumann_system(op, np.zeros(25))).max() == 0.0


def test_solve_boundary_difference():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    v = solve_neumann_system(op, unit(24, 24) - unit(24, 0))
    assert np.abs(v - (g.nodes - 0.5)).max() < 1e-10


@pytest.mark.parametrize("n", [12, 24, 50])
def test_solve_methods_agree_and_mean_zero(n):
    rng = np.random.default_rng(n)
    g = make_grid(n)
    op = build_d2(g, 6, 484.3)
    b = op.A @ rng.normal(size=n + 1)       # consistent right-hand side
    v_mp = solve_neumann_system(op, b, method="moore_penrose")
    v_f = solve_neumann_system(op, b, method="filtered")
    assert np.abs(v_mp - v_f).max() < 1e-8 * max(1.0, np.abs(v_mp).max())
    assert abs(v_mp.sum()) < 1e-10 * (n + 1)
    assert abs(v_f.sum()) < 1e-10 * (n + 1)


def test_solve_least_squares_for_inconsistent_rhs():
    """For b outside the column space the result minimizes |A v - b| among
    mean-zero vectors (checked against the dense pseudoinverse)."""
    g = make_grid(16)
    op = build_d2(g, 6, 490.0)
    b = np.ones(17)                          # pure nullspace component
    b[3] += 2.0
    v = solve_neumann_system(op, b)
    want = moore_penrose(op) @ b
    assert np.abs(v - want).max() < 1e-9 * max(1.0, np.abs(want).max())


def test_bundle_caches_and_solves():
    op = build_d2(make_grid(12), 6, 490.0)
    bundle = PseudoinverseBundle(op)
    assert bundle.G2.shape == (13, 13)
    assert np.abs(bundle.Aplus - moore_penrose(op)).max() < 1e-12
    b = op.A @ op.grid.nodes ** 2
    assert np.abs(bundle.solve(b) - solve_neumann_system(op, b)).max() == 0.0


def test_solve_singular_at_limit():
    op = build_d2(make_grid(24), 6, ALPHA_STAR_24)
    with pytest.raises(SingularInterior):
        solve_neumann_system(op, np.zeros(25))
