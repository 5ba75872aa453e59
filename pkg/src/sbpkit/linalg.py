"""Dense linear-algebra kernel: LU solves, symmetric eigenvalues, numeric rank.

Everything here operates on plain float64 numpy arrays and is sized for the
dense matrices this package produces (a few hundred rows at most).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import NotSymmetric, SingularMatrix

DEFAULT_RANK_TOL = 1e-9


def _rank_tol_default() -> float:
    return float(os.environ.get("SBP_RANK_TOL", DEFAULT_RANK_TOL))


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of a symmetric matrix plus derived summary quantities."""

    eigenvalues: np.ndarray        # sorted ascending
    spectral_radius: float
    min_eigenvalue: float
    numeric_rank: int
    tolerance_used: float


class LuFactorization:
    """LU decomposition with row pivoting, reusable for many right-hand sides.

    Raises SingularMatrix during construction when a pivot falls below
    ``pivot_tol * max|M|`` (scaled by the infinity norm of the input).
    """

    def __init__(self, matrix: np.ndarray, pivot_tol: float = 1e-14):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"square matrix required, got shape {m.shape}")
        n = m.shape[0]
        scale = np.abs(m).max()
        if scale == 0.0:
            raise SingularMatrix("zero matrix")
        threshold = pivot_tol * scale
        perm = np.arange(n)
        for k in range(n):
            p = k + int(np.argmax(np.abs(m[k:, k])))
            if abs(m[p, k]) < threshold:
                raise SingularMatrix(
                    f"pivot {abs(m[p, k]):.3e} below threshold {threshold:.3e} "
                    f"at column {k}"
                )
            if p != k:
                m[[k, p]] = m[[p, k]]
                perm[[k, p]] = perm[[p, k]]
            m[k + 1:, k] /= m[k, k]
            m[k + 1:, k + 1:] -= np.outer(m[k + 1:, k], m[k, k + 1:])
        self._lu = m
        self._perm = perm
        self.n = n

    def solve(self, rhs: np.ndarray, refine: int = 1,
              matrix: np.ndarray | None = None) -> np.ndarray:
        """Solve M x = rhs.  ``refine`` extra residual-correction passes are
        applied when the original matrix is available (it is kept by callers
        that need the extra digits)."""
        b = np.asarray(rhs, dtype=float)
        x = self._solve_once(b)
        if matrix is not None:
            for _ in range(refine):
                r = b - matrix @ x
                x = x + self._solve_once(r)
        return x

    def _solve_once(self, b: np.ndarray) -> np.ndarray:
        if b.ndim != 1:
            raise ValueError("solve expects a vector right-hand side")
        lu, n = self._lu, self.n
        x = b[self._perm].astype(float, copy=True)
        for k in range(1, n):           # forward (unit lower triangle)
            x[k] -= lu[k, :k] @ x[:k]
        for k in range(n - 1, -1, -1):  # backward
            x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
        return x


def lu_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a square system by LU with row pivoting."""
    m = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if b.shape != (m.shape[0],):
        raise ValueError(f"rhs length {b.shape} does not match matrix {m.shape}")
    return LuFactorization(m).solve(b, refine=1, matrix=m)


def sym_eigenvalues(matrix: np.ndarray, rank_tol: float | None = None) -> SpectrumReport:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    The input is checked for symmetry (NotSymmetric on failure) and
    symmetrized as (S + S^T)/2 before decomposition.  Iteration stops when
    the off-diagonal Frobenius norm drops below 1e-13 times the Frobenius
    norm of the matrix, capped at 100 sweeps.
    """
    s = np.asarray(matrix, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"square matrix required, got shape {s.shape}")
    scale = np.abs(s).max()
    if scale > 0 and np.abs(s - s.T).max() > 1e-12 * scale:
        raise NotSymmetric(
            f"asymmetry {np.abs(s - s.T).max():.3e} exceeds 1e-12 * {scale:.3e}"
        )
    a = 0.5 * (s + s.T)
    n = a.shape[0]
    fro = np.linalg.norm(a)
    if n > 1 and fro > 0.0:
        stop = 1e-13 * fro
        for sweep in range(100):
            off = np.sqrt(np.sum(np.square(a - np.diag(np.diag(a)))))
            if off < stop:
                break
            # Rotation threshold for early sweeps; later sweeps rotate on any
            # entry that still matters relative to its diagonal neighbours.
            tresh = 0.2 * off / (n * n) if sweep < 3 else 0.0
            _jacobi_sweep(a, n, tresh)
    eigs = np.sort(np.diag(a).copy())
    tol = _rank_tol_default() if rank_tol is None else float(rank_tol)
    top = float(np.abs(eigs).max()) if n else 0.0
    rank = int(np.count_nonzero(np.abs(eigs) > tol * top)) if top > 0 else 0
    return SpectrumReport(
        eigenvalues=eigs,
        spectral_radius=float(np.abs(eigs).max()),
        min_eigenvalue=float(eigs[0]),
        numeric_rank=rank,
        tolerance_used=tol,
    )


def _jacobi_sweep(a: np.ndarray, n: int, tresh: float = 0.0) -> None:
    """One cyclic sweep of two-sided Jacobi rotations, in place.

    Pairs are visited in tournament (round-robin) order so that each round
    consists of disjoint rotations, which are applied simultaneously with
    vectorized row/column updates.
    """
    m = n + (n % 2)
    idx = list(range(m))
    for _ in range(m - 1):
        half = m // 2
        raw = [(idx[i], idx[m - 1 - i]) for i in range(half)]
        pairs = [(min(p, q), max(p, q)) for p, q in raw if max(p, q) < n]
        idx = [idx[0], idx[-1]] + idx[1:-1]
        if not pairs:
            continue
        ps = np.array([p for p, _ in pairs])
        qs = np.array([q for _, q in pairs])
        apq = a[ps, qs]
        app = a[ps, ps]
        aqq = a[qs, qs]
        # Entries negligible against both diagonal neighbours are zeroed
        # without a rotation; sub-threshold entries wait for a later sweep.
        tiny = (np.abs(app) + 100.0 * np.abs(apq) == np.abs(app)) & \
               (np.abs(aqq) + 100.0 * np.abs(apq) == np.abs(aqq))
        if tiny.any():
            a[ps[tiny], qs[tiny]] = 0.0
            a[qs[tiny], ps[tiny]] = 0.0
        act = (~tiny) & (np.abs(apq) > tresh) & (apq != 0.0)
        if not act.any():
            continue
        ps, qs, apq, app, aqq = ps[act], qs[act], apq[act], app[act], aqq[act]
        theta = 0.5 * (aqq - app) / apq
        t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        t = np.where(theta == 0.0, 1.0, t)
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        rows_p = a[ps, :].copy()
        rows_q = a[qs, :].copy()
        a[ps, :] = c[:, None] * rows_p - s[:, None] * rows_q
        a[qs, :] = s[:, None] * rows_p + c[:, None] * rows_q
        cols_p = a[:, ps].copy()
        cols_q = a[:, qs].copy()
        a[:, ps] = cols_p * c[None, :] - cols_q * s[None, :]
        a[:, qs] = cols_p * s[None, :] + cols_q * c[None, :]
        a[ps, qs] = 0.0
        a[qs, ps] = 0.0


def numeric_rank(matrix: np.ndarray, rel_tol: float | None = None) -> int:
    """Number of eigenvalues exceeding rel_tol times the largest magnitude one."""
    tol = _rank_tol_default() if rel_tol is None else float(rel_tol)
    if tol <= 0:
        raise ValueError("rel_tol must be positive")
    return sym_eigenvalues(matrix, rank_tol=tol).numeric_rank
