from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbpkit.errors import GridTooSmall, InvalidN, MissingAlpha, MissingParameter
from sbpkit.operators import (
    BETA_ACCURACY,
    BETA_BANDWIDTH,
    FREE_DIRECTION_VECTOR,
    build_boundary_derivative,
    build_d1,
    build_d2,
    calibrate_beta,
    make_grid,
    operator_from_json,
    operator_to_json,
    solve_closure_system,
    verify_sbp,
    _first_derivative_closure,
)

H6_BOUNDARY = (13649, 60065, 27110, 53590, 39385, 43801)


def all_pass(report):
    failures = {k: v for k, v in report.items() if not v[2]}
    assert not failures, failures


# -- grids ---------------------------------------------------------------------


def test_make_grid_small():
    g = make_grid(2)
    assert np.allclose(g.nodes, [0.0, 0.5, 1.0], atol=0)


def test_make_grid_spacing():
    assert make_grid(4).h == 0.25


def test_make_grid_midpoint():
    g = make_grid(24)
    assert len(g.nodes) == 25
    assert g.nodes[12] == 0.5
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    gaps = np.diff(g.nodes)
    assert np.abs(gaps - g.h).max() < 1e-16


def test_make_grid_rejects_tiny():
    with pytest.raises(InvalidN):
        make_grid(1)


# -- boundary derivative stencils -------------------------------------------------


def exact_one_sided(order):
    """Independent rational Vandermonde solve for the expected stencil."""
    m = order + 1
    rows = [[Fraction(i) ** k for i in range(m)] for k in range(m)]
    rhs = [Fraction(int(k == 1)) for k in range(m)]
    # Cramer-free: sympy-less Gaussian elimination over Fractions
    for col in range(m):
        piv = next(r for r in range(col, m) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(m):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
                rhs[r] -= f * rhs[col]
    return [rhs[r] / rows[r][r] for r in range(m)]


@pytest.mark.parametrize("order,expected", [
    (2, (Fraction(-3, 2), Fraction(2), Fraction(-1, 2))),
    (4, (Fraction(-25, 12), Fraction(4), Fraction(-3), Fraction(4, 3), Fraction(-1, 4))),
])
def test_boundary_derivative_known_stencils(order, expected):
    assert tuple(exact_one_sided(order)) == expected
    got = build_boundary_derivative(order, h=0.1)
    assert np.abs(got - np.array([float(c) for c in expected]) / 0.1).max() < 1e-11


@pytest.mark.parametrize("order", [2, 3, 4])
def test_boundary_derivative_matches_rational_solve(order):
    got = build_boundary_derivative(order, h=1.0)
    want = np.array([float(c) for c in exact_one_sided(order)])
    assert np.abs(got - want).max() < 1e-12
    assert abs(got.sum()) < 1e-11


# -- closure system -----------------------------------------------------------------


def test_closure_system_rank_and_nullity():
    cs = solve_closure_system(make_grid(24))
    assert cs.system_rank == 20
    assert cs.nullspace_dim == 1
    assert cs.residual <= 1e-10


def test_closure_nullspace_is_rank_one_outer_product():
    cs = solve_closure_system(make_grid(24))
    k = FREE_DIRECTION_VECTOR
    expected = np.outer(k, k) / (k @ k)
    assert np.abs(cs.nullspace_direction - expected).max() < 1e-12


def test_closure_corner_reference_entry():
    g = make_grid(24)
    cs = solve_closure_system(g)
    assert cs.corner[0, 0] * 180.0 * g.h == pytest.approx(-19697 / 72, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 481.5, 490.0])
def test_closure_reconstructs_operator_corner(alpha):
    g = make_grid(24)
    cs = solve_closure_system(g)
    corner = cs.corner_at(alpha)
    a = build_d2(g, 6, alpha).A[:6, :6]
    assert np.abs(corner - a).max() <= 1e-9 * np.abs(a).max()


def test_closure_derives_published_norm():
    """The quadrature values fall out of the solved closure via the
    second-moment sums, independently of the hard-coded table."""
    g = make_grid(24)
    cs = solve_closure_system(g)
    block = cs.corner * g.h                     # dimensionless corner
    interior = np.array([-2.0, 27.0, -270.0, 490.0, -270.0, 27.0, -2.0]) / 180.0
    for j in range(6):
        moment = sum(block[j, i] * (i - j) ** 2 for i in range(6))
        for col in range(6, j + 4):
            moment += interior[col - j + 3] * (col - j) ** 2
        h_j = -moment / 2.0
        assert h_j == pytest.approx(H6_BOUNDARY[j] / 43200.0, abs=1e-12)


# -- second derivative ----------------------------------------------------------------


def test_d2_order6_corner_matches_closed_form():
    g = make_grid(24)
    k = FREE_DIRECTION_VECTOR
    for alpha in (0.0, 490.0):
        a = build_d2(g, 6, alpha).A
        want00 = (-19697 / 72 + alpha) / (180.0 * g.h)
        assert a[0, 0] == pytest.approx(want00, rel=1e-15)
        want05 = (278033 / 576 - alpha) / (180.0 * g.h)
        assert a[0, 5] == pytest.approx(want05, rel=1e-15)


def test_d2_order6_norm_values_exact():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    for j, v in enumerate(H6_BOUNDARY):
        exact = float(Fraction(v, 43200 * g.n))
        assert op.h_diag[j] == exact
        assert op.h_diag[g.n - j] == exact
    assert np.all(op.h_diag[6:-6] == g.h)


def test_d2_order6_interior_stencil():
    g = make_grid(24)
    op = build_d2(g, 6, 490.0)
    stencil = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / (180.0 * g.h ** 2)
    assert np.abs(op.D2[12, 9:16] - stencil).max() < 1e-9 / g.h ** 2 * 1e-6


def test_d2_norm_independent_of_alpha():
    g = make_grid(24)
    h1 = build_d2(g, 6, 481.4).h_diag
    h2 = build_d2(g, 6, 600.0).h_diag
    assert np.array_equal(h1, h2)


@pytest.mark.parametrize("order,alpha,n", [
    (6, 490.0, 24), (6, 481.5, 12), (6, 484.3, 11), (2, None, 6), (4, None, 12),
])
def test_verify_sbp_passes(order, alpha, n):
    all_pass(verify_sbp(build_d2(make_grid(n), order, alpha)))


def test_d2_order2_exact_linear_response():
    op = build_d2(make_grid(4), 2)
    x = op.grid.nodes
    target = np.zeros(5)
    target[0] = -1.0
    target[-1] = 1.0
    assert np.array_equal(op.A @ x, target)


def test_d2_quartic_exact_everywhere_order6():
    g = make_grid(24)
    op = build_d2(g, 6, 487.1)
    x = g.nodes
    assert np.abs(op.D2 @ x ** 4 - 12.0 * x ** 2).max() < 1e-10 / g.h ** 2


def test_d2_mirror_under_grid_reversal():
    g = make_grid(13)
    op = build_d2(g, 6, 484.3)
    assert np.abs(op.A - op.A[::-1, ::-1]).max() == 0.0
    assert np.abs(op.D2 - op.D2[::-1, ::-1]).max() < 1e-16 / g.h ** 2
    assert np.array_equal(op.d_right, -op.d_left[::-1])


def test_d2_errors():
    with pytest.raises(MissingAlpha):
        build_d2(make_grid(24), 6)
    with pytest.raises(GridTooSmall):
        build_d2(make_grid(10), 6, 490.0)
    with pytest.raises(GridTooSmall):
        build_d2(make_grid(6), 4)
    with pytest.raises(GridTooSmall):
        build_d2(make_grid(2), 2)


# -- first derivative ------------------------------------------------------------------


@pytest.mark.parametrize("order,param", [(2, {}), (4, {}), (6, {"t": 0.7})])
def test_d1_sbp_identity(order, param):
    n = 16
    op = build_d1(make_grid(n), order, **param)
    boundary = np.zeros((n + 1, n + 1))
    boundary[0, 0] = -1.0
    boundary[n, n] = 1.0
    assert np.abs(op.Q + op.Q.T - boundary).max() < 1e-13


def test_d1_order2_first_row():
    op = build_d1(make_grid(4), 2)
    assert np.allclose(op.D1[0], np.array([-1.0, 1.0, 0.0, 0.0, 0.0]) / op.grid.h, atol=0)


def test_d1_closure_rank():
    _, _, rank, unknowns = _first_derivative_closure(6)
    assert unknowns == 15
    assert rank == 14


@settings(deadline=None, max_examples=10)
@given(st.floats(-5.0, 5.0))
def test_d1_family_cubic_exact_for_all_t(t):
    g = make_grid(12)
    op = build_d1(g, 6, t=t)
    x = g.nodes
    for k in range(4):
        exact = k * x ** (k - 1) if k else np.zeros_like(x)
        assert np.abs(op.D1 @ x ** k - exact).max() < 1e-9 / g.h ** k * g.h


def test_d1_verify_passes():
    all_pass(verify_sbp(build_d1(make_grid(20), 6, t=-1.0)))
    all_pass(verify_sbp(build_d1(make_grid(12), 4)))


def test_d1_errors():
    with pytest.raises(MissingParameter):
        build_d1(make_grid(12), 6)
    with pytest.raises(MissingParameter):
        build_d1(make_grid(12), 4, t=1.0)
    with pytest.raises(MissingParameter):
        build_d1(make_grid(12), 6, t=1.0, beta=0.69)


# -- beta calibration -----------------------------------------------------------------


def test_calibration_anchor_betas():
    cal = calibrate_beta(make_grid(24))
    assert cal.beta_of_t(cal.t_accuracy) == pytest.approx(BETA_ACCURACY, abs=1e-12)
    assert cal.beta_of_t(cal.t_bandwidth) == pytest.approx(BETA_BANDWIDTH, abs=1e-12)
    assert abs(cal.t_of_beta(cal.beta_of_t(1.23)) - 1.23) < 1e-10


def test_calibration_accuracy_anchor_property():
    """At the accuracy-optimal member, row 5 is exact on the fourth monomial."""
    g = make_grid(24)
    cal = calibrate_beta(g)
    op = build_d1(g, 6, t=cal.t_accuracy)
    x = g.nodes
    err = op.D1[5] @ x ** 4 - 4.0 * x[5] ** 3
    assert abs(err) < 1e-9 / g.h ** 3
    generic = build_d1(g, 6, t=cal.t_accuracy + 0.5)
    assert abs(generic.D1[5] @ x ** 4 - 4.0 * x[5] ** 3) > 100 * abs(err)


def test_calibration_bandwidth_anchor_property():
    """At the bandwidth-optimal member, the first row drops to five nonzeros."""
    g = make_grid(24)
    cal = calibrate_beta(g)
    op = build_d1(g, 6, beta=BETA_BANDWIDTH)
    row = op.Q[0, :9]
    assert np.abs(row[cal.zeroed_column]) < 1e-12
    assert np.count_nonzero(np.abs(row) > 1e-12) == 5


def test_calibration_cross_validation_threshold():
    cal = calibrate_beta(make_grid(24))
    assert cal.validation_alpha == pytest.approx(481.6401641339156, abs=1e-4)


# -- JSON round trip -------------------------------------------------------------------


def test_operator_json_roundtrip():
    op = build_d2(make_grid(12), 6, 484.3)
    text = operator_to_json(op)
    back = operator_from_json(text)
    assert back.order == 6 and back.alpha == 484.3 and back.n == 12
    assert np.abs(back.A - op.A).max() == 0.0
    assert np.abs(back.D2 - op.D2).max() == 0.0
    assert operator_to_json(back) == text
