"""Closed-form pseudoinverses of the singular pure-Neumann matrix A.

With the interior block Abar nonsingular, embedding its inverse in a border
of zeros gives G2, and the Moore-Penrose inverse of A is

    A+ = (I - P) G2 (I - P) + (x - 1/2)(x - 1/2)^T,    P = ones ones^T / (n+1).

A cheaper variant B = G2 + x x^T acts as a right-preconditioner whose
solution agrees with the Moore-Penrose one after mean subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SingularInterior, SingularMatrix
from .linalg import LuFactorization
from .operators import SbpSecondDerivative

INTERIOR_PIVOT_TOL = 1e-12


def extract_interior(a: np.ndarray) -> np.ndarray:
    """The block of A with first and last row and column deleted."""
    a = np.asarray(a)
    if a.shape[0] < 3:
        raise ValueError("matrix too small to have an interior block")
    return a[1:-1, 1:-1]


def _interior_factorization(op: SbpSecondDerivative) -> tuple[LuFactorization, np.ndarray]:
    abar = extract_interior(op.A)
    try:
        return LuFactorization(abar, pivot_tol=INTERIOR_PIVOT_TOL), abar
    except SingularMatrix as exc:
        raise SingularInterior(
            f"interior block of A is numerically singular: {exc}"
        ) from exc


def _solve_interior(lu: LuFactorization, abar: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return lu.solve(rhs, refine=1, matrix=abar)


def _g2_apply(lu: LuFactorization, abar: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """G2 @ vec without forming G2."""
    out = np.zeros_like(vec)
    out[1:-1] = _solve_interior(lu, abar, vec[1:-1])
    return out


def build_g2(op: SbpSecondDerivative) -> np.ndarray:
    """Bordered inverse of the interior block, verified against A G2."""
    lu, abar = _interior_factorization(op)
    n = op.n
    g2 = np.zeros((n + 1, n + 1))
    inv = np.empty_like(abar)
    eye = np.eye(n - 1)
    for j in range(n - 1):
        inv[:, j] = _solve_interior(lu, abar, eye[:, j])
    g2[1:-1, 1:-1] = inv
    x = op.grid.nodes
    e_l = np.zeros(n + 1)
    e_l[0] = 1.0
    e_r = np.zeros(n + 1)
    e_r[n] = 1.0
    expected = np.eye(n + 1) - np.outer(e_l, 1.0 - x) - np.outer(e_r, x)
    residual = np.abs(op.A @ g2 - expected).max()
    if residual > 1e-8 * max(1.0, np.abs(op.A).max() * np.abs(g2).max()):
        raise SingularInterior(
            f"A G2 identity residual {residual:.3e}; interior inverse unreliable"
        )
    return g2


@dataclass
class PseudoinverseBundle:
    """Factorization-backed access to G2, the Moore-Penrose inverse and the
    filtered variant for one second-derivative operator."""

    op: SbpSecondDerivative

    def __post_init__(self):
        self._lu, self._abar = _interior_factorization(self.op)

    @cached_property
    def G2(self) -> np.ndarray:
        return build_g2(self.op)

    @cached_property
    def Aplus(self) -> np.ndarray:
        return moore_penrose(self.op, g2=self.G2)

    @cached_property
    def B(self) -> np.ndarray:
        return filtered_pseudoinverse(self.op, g2=self.G2)

    def solve(self, b: np.ndarray, method: str = "moore_penrose") -> np.ndarray:
        return solve_neumann_system(self.op, b, method=method,
                                    _factorization=(self._lu, self._abar))


def moore_penrose(op: SbpSecondDerivative, g2: np.ndarray | None = None) -> np.ndarray:
    """Moore-Penrose inverse of A via the bordered interior inverse."""
    if g2 is None:
        g2 = build_g2(op)
    n = op.n
    x = op.grid.nodes
    proj = np.eye(n + 1) - np.ones((n + 1, n + 1)) / (n + 1)
    centered = x - 0.5
    return proj @ g2 @ proj + np.outer(centered, centered)


def filtered_pseudoinverse(op: SbpSecondDerivative, g2: np.ndarray | None = None) -> np.ndarray:
    """The cheap pseudoinverse B = G2 + x x^T; B A = I plus a rank-one
    constant-row correction, so mean subtraction recovers the Moore-Penrose
    solution for consistent right-hand sides."""
    if g2 is None:
        g2 = build_g2(op)
    x = op.grid.nodes
    return g2 + np.outer(x, x)


def solve_neumann_system(op: SbpSecondDerivative, b: np.ndarray,
                         method: str = "moore_penrose",
                         _factorization=None) -> np.ndarray:
    """Mean-zero solution of A v = b.

    The ``moore_penrose`` method returns the least-squares mean-zero solution
    for any b.  The ``filtered`` method forms only G2 b and x^T b and is
    valid for b in the column space of A; it is not projected first.
    """
    b = np.asarray(b, dtype=float)
    n = op.n
    if b.shape != (n + 1,):
        raise ValueError(f"right-hand side must have length {n + 1}")
    lu, abar = _factorization if _factorization is not None else _interior_factorization(op)
    x = op.grid.nodes
    ones = np.ones(n + 1)
    if method == "filtered":
        v = _g2_apply(lu, abar, b) + x * (x @ b)
        return v - v.mean() * ones
    if method != "moore_penrose":
        raise ValueError(f"unknown method {method!r}")
    bc = b - b.mean() * ones
    v = _g2_apply(lu, abar, bc)
    v = v - v.mean() * ones
    centered = x - 0.5
    return v + centered * (centered @ b)
