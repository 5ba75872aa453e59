"""Structural analyses of the second-derivative family: rank relations, the
positive-semi-definiteness limit of the free parameter, borrowing capacity,
first/second-derivative compatibility, truncation error and spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoCrossing, NormMismatch, TransformResidual
from .linalg import SpectrumReport, sym_eigenvalues, numeric_rank
from .operators import (
    FREE_DIRECTION_VECTOR,
    Grid,
    SbpFirstDerivative,
    SbpSecondDerivative,
    _min_alpha_for_compatibility,
    build_d1,
    build_d2,
    calibrate_beta,
    make_grid,
)
from .pseudoinverse import _interior_factorization, extract_interior


def _inf_norm(m: np.ndarray) -> float:
    return float(np.abs(m).sum(axis=1).max())


# -- rank structure ----------------------------------------------------------------


def check_rank_relation(op: SbpSecondDerivative, rel_tol: float | None = None):
    """Numeric ranks of A and its interior block; the second is always one less."""
    rank_a = numeric_rank(op.A, rel_tol)
    rank_abar = numeric_rank(extract_interior(op.A), rel_tol)
    return rank_a, rank_abar, rank_a == rank_abar + 1


def sylvester_transform(op: SbpSecondDerivative) -> np.ndarray:
    """Congruence Z A Z^T collapsing A onto blockdiag(0, Abar, 1).

    Z adds every row to the first (exposing the constant nullvector) and the
    x-weighted interior rows to the last (exposing the boundary identity).
    """
    n = op.n
    x = op.grid.nodes
    z = np.zeros((n + 1, n + 1))
    z[0, :] = 1.0
    z[1:-1, 1:-1] = np.eye(n - 1)
    z[n, 1:-1] = x[1:-1]
    z[n, n] = 1.0
    delta = z @ op.A @ z.T
    expected = np.zeros_like(delta)
    expected[1:-1, 1:-1] = extract_interior(op.A)
    expected[n, n] = 1.0
    residual = np.abs(delta - expected).max()
    if residual > 1e-9 * _inf_norm(op.A):
        raise TransformResidual(
            f"congruence residual {residual:.3e} exceeds 1e-9 * |A|"
        )
    return delta


# -- stability limit of the free parameter ------------------------------------------


@dataclass(frozen=True)
class AlphaStarResult:
    """The two parameter values at which the interior block goes singular."""

    n: int
    roots: tuple[float, float]          # ascending
    eigenvalues_2x2: tuple[float, float]

    @property
    def limit(self) -> float:
        """Smallest alpha keeping A positive semi-definite."""
        return self.roots[1]


def alpha_star(n: int) -> AlphaStarResult:
    """Both singular parameter values via the rank-two boundary update.

    The corner perturbation is k k^T scaled; compressing the interior
    inverse at the classical parameter onto the two update directions gives
    a 2x2 matrix whose eigenvalues map to the singular alphas in closed form.
    """
    grid = make_grid(n)
    op = build_d2(grid, 6, alpha=490.0)
    lu, abar = _interior_factorization(op)
    k = FREE_DIRECTION_VECTOR
    e = np.zeros((n - 1, 2))
    e[:5, 0] = k[1:]                     # left update, interior part
    e[-5:, 1] = k[1:][::-1]              # mirrored right update
    solved = np.column_stack([
        lu.solve(e[:, 0], refine=1, matrix=abar),
        lu.solve(e[:, 1], refine=1, matrix=abar),
    ])
    s = e.T @ solved
    tr = s[0, 0] + s[1, 1]
    disc = np.sqrt(max((s[0, 0] - s[1, 1]) ** 2 + 4.0 * s[0, 1] * s[1, 0], 0.0))
    lam = ((tr - disc) / 2.0, (tr + disc) / 2.0)
    roots = tuple(sorted(490.0 - 180.0 * grid.h / v for v in lam))
    return AlphaStarResult(n=n, roots=roots, eigenvalues_2x2=lam)


# -- borrowing capacity --------------------------------------------------------------


@dataclass(frozen=True)
class BorrowingResult:
    gamma: float
    xi_boundary: float
    xi_cross: float


def borrowing_capacity(op: SbpSecondDerivative) -> BorrowingResult:
    """Largest gamma keeping A - h*gamma*(dL dL^T + dR dR^T) semi-definite,
    from quadratic forms of the boundary-derivative stencils against the
    interior inverse."""
    lu, abar = _interior_factorization(op)
    dl = op.d_left[1:-1]
    dr = op.d_right[1:-1]
    g2_dl = lu.solve(dl, refine=1, matrix=abar)
    xi_boundary = 1.0 + dl @ g2_dl
    xi_cross = 1.0 + dr @ g2_dl
    gamma = 1.0 / (op.grid.h * (xi_boundary + abs(xi_cross)))
    return BorrowingResult(gamma=float(gamma), xi_boundary=float(xi_boundary),
                           xi_cross=float(xi_cross))


# -- compatibility of D1 with D2 -----------------------------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    alpha: float | None
    beta: float | None
    min_eig_R: float
    compatible: bool


def compatibility_remainder(op2: SbpSecondDerivative, op1: SbpFirstDerivative) -> np.ndarray:
    if op2.n != op1.n:
        raise NormMismatch("operators live on different grids")
    if np.abs(op2.h_diag - op1.h_diag).max() > 1e-13 * op2.h_diag.max():
        raise NormMismatch("operators carry different quadrature norms")
    return op2.A - op1.D1.T @ (op1.h_diag[:, None] * op1.D1)


def compatibility(op2: SbpSecondDerivative, op1: SbpFirstDerivative) -> CompatibilityReport:
    """Whether A dominates the quadratic form of D1 (R = A - D1^T H D1 >= 0)."""
    r = compatibility_remainder(op2, op1)
    rep = sym_eigenvalues(r)
    compatible = rep.min_eigenvalue >= -1e-10 * _inf_norm(r)
    return CompatibilityReport(alpha=op2.alpha, beta=op1.beta,
                               min_eig_R=rep.min_eigenvalue, compatible=compatible)


def compatibility_min_alpha(beta: float, n: int, tol: float = 1e-7) -> float:
    """Smallest alpha of the sixth-order family compatible with D1 at beta."""
    grid = make_grid(n)
    t = calibrate_beta(grid).t_of_beta(beta)
    d1 = build_d1(grid, 6, t=t)
    lo = alpha_star(n).limit - 1.0
    try:
        return _min_alpha_for_compatibility(grid, d1, lo=lo, hi=600.0, tol=tol)
    except NoCrossing:
        raise NoCrossing(
            f"D1 at beta={beta} is not compatible with any alpha <= 600"
        ) from None


# -- truncation error -----------------------------------------------------------------


def truncation_vector(op: SbpSecondDerivative) -> np.ndarray:
    """Leading boundary truncation error: residual of the fifth monomial."""
    if op.order != 6:
        raise ValueError("truncation vector is defined for the sixth-order family")
    x = op.grid.nodes
    return -op.D2 @ x ** 5 + 20.0 * x ** 3


def boundary_truncation_affine(n: int = 24):
    """Exact affine coefficients (p_j, q_j) of the six boundary truncation
    entries r_j(alpha) = p_j + q_j * alpha, as rationals.

    Evaluated in exact arithmetic from the closure tables; the float path
    through D2 loses too many digits to cancellation for optimizer use.
    """
    from fractions import Fraction

    from .operators import _CORNER6_RATIONAL, FREE_DIRECTION_VECTOR as kf

    h = Fraction(1, n)
    k = [int(v) for v in kf]
    interior = [Fraction(c, 180) for c in (-2, 27, -270, 490, -270, 27, -2)]
    h_tilde = [Fraction(v, 43200) for v in (13649, 60065, 27110, 53590, 39385, 43801)]
    d_stencil = _exact_one_sided_derivative(order_of_accuracy=4)

    out = []
    for j in range(6):
        acc = Fraction(0)
        slope = Fraction(0)
        for i in range(6):
            num, den = _CORNER6_RATIONAL[j][i]
            acc += Fraction(num, 180 * den) * i ** 5
            slope += Fraction(k[j] * k[i], 180) * i ** 5
        for col in range(6, j + 4):
            acc += interior[col - j + 3] * col ** 5
        if j == 0:
            acc += sum(c * i ** 5 for i, c in enumerate(d_stencil))
        p = h ** 3 * (acc / h_tilde[j] + 20 * j ** 3)
        q = h ** 3 * (slope / h_tilde[j])
        out.append((p, q))
    return out


def _exact_one_sided_derivative(order_of_accuracy: int):
    """Rational minimal-width one-sided first-derivative stencil (h = 1)."""
    from fractions import Fraction

    m = order_of_accuracy + 1
    rows = [[Fraction(i ** k) for i in range(m)] for k in range(m)]
    rhs = [Fraction(1) if k == 1 else Fraction(0) for k in range(m)]
    for col in range(m):                      # exact Gaussian elimination
        pivot_row = next(r for r in range(col, m) if rows[r][col] != 0)
        rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        rhs[col], rhs[pivot_row] = rhs[pivot_row], rhs[col]
        for r in range(m):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col] / rows[col][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
                rhs[r] = rhs[r] - factor * rhs[col]
    return [rhs[r] / rows[r][r] for r in range(m)]


def truncation_optimum(grid: Grid, norm: str = "l2") -> float:
    """Free-parameter value minimizing the truncation vector in the given norm.

    The truncation vector is affine in alpha with support on the twelve
    boundary entries, so the weighted quadratic has a closed-form minimizer;
    it is evaluated in exact rational arithmetic.
    """
    from fractions import Fraction

    coeffs = boundary_truncation_affine(grid.n)
    if norm == "l2":
        weights = [Fraction(1)] * 6
    elif norm == "h":
        weights = [Fraction(v, 43200) for v in (13649, 60065, 27110, 53590, 39385, 43801)]
    else:
        raise ValueError(f"unknown norm {norm!r}")
    num = sum(w * p * q for w, (p, q) in zip(weights, coeffs))
    den = sum(w * q * q for w, (p, q) in zip(weights, coeffs))
    return float(-num / den)


# -- spectra ---------------------------------------------------------------------------


def spectrum_sweep(builder, alpha_grid, extra_params=None) -> list[SpectrumReport]:
    """Eigenvalue reports for a parameterized family of symmetric matrices.

    ``builder(alpha, **extra_params)`` must return a symmetric matrix (use
    ``similarity_symmetrize`` for boundary-modified operators first).  Rows
    come back in grid order.
    """
    extra = extra_params or {}
    return [sym_eigenvalues(builder(alpha, **extra)) for alpha in alpha_grid]


def similarity_symmetrize(d: np.ndarray, h_diag: np.ndarray) -> np.ndarray:
    """Symmetric matrix sharing the eigenvalues of D when H D is symmetric."""
    root = np.sqrt(h_diag)
    return (root[:, None] * d) / root[None, :]
