"""Boundary-condition-modified discretization matrices.

Weak (penalty) imposition of Dirichlet or Neumann data turns the approximation
of the second derivative into

    Dirichlet side:  D = D2 + H^{-1} (mu e - (-/+) d) e^T,   mu = -phi/(h gamma)
    Neumann side:    D = D2 + sigma H^{-1} e d^T,            sigma_L = 1, sigma_R = -1

with matching forcing contributions carrying the boundary data.  For pure
Neumann conditions the boundary-derivative terms cancel and D = -H^{-1} A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BorrowingUnavailable, InvalidPhi, SingularInterior
from .operators import SbpSecondDerivative

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

SIGMA_LEFT = 1.0
SIGMA_RIGHT = -1.0


def _require_bc(bc: str) -> str:
    b = bc.lower()
    if b not in (DIRICHLET, NEUMANN):
        raise ValueError(f"boundary condition must be dirichlet or neumann, got {bc!r}")
    return b


@dataclass(frozen=True)
class SatDiscretization:
    """Penalty-modified operator D with its symmetric form H D."""

    op: SbpSecondDerivative
    bc_left: str
    bc_right: str
    phi: float | None
    gamma: float | None
    mu: float | None
    D: np.ndarray
    symmetric_form: np.ndarray

    @property
    def n(self) -> int:
        return self.op.n

    @property
    def grid(self):
        return self.op.grid

    def has_dirichlet(self) -> bool:
        return DIRICHLET in (self.bc_left, self.bc_right)

    def similar_symmetric(self) -> np.ndarray:
        """Symmetric matrix with the eigenvalues of D."""
        root = np.sqrt(self.op.h_diag)
        return (root[:, None] * self.D) / root[None, :]

    def to_dict(self) -> dict:
        from .operators import operator_to_dict
        data = operator_to_dict(self.op)
        data.update({
            "bc_left": self.bc_left,
            "bc_right": self.bc_right,
            "phi": self.phi,
            "gamma": self.gamma,
            "mu": self.mu,
        })
        return data

    def to_json(self) -> str:
        from .render import render_json
        return render_json(self.to_dict())


def build_discretization(op: SbpSecondDerivative, bc_left: str, bc_right: str,
                         phi: float | None = None) -> SatDiscretization:
    """Assemble the boundary-modified matrix for the requested conditions.

    ``phi`` (>= 1) sets the Dirichlet penalty strength and is required when
    any side is Dirichlet; the borrowing capacity entering the penalty scale
    is recomputed for the operator at hand, so Dirichlet sides need a
    parameter strictly above the semi-definiteness limit.
    """
    bc_left = _require_bc(bc_left)
    bc_right = _require_bc(bc_right)
    n = op.n
    h = op.grid.h
    e_l = np.zeros(n + 1)
    e_l[0] = 1.0
    e_r = np.zeros(n + 1)
    e_r[n] = 1.0

    gamma = mu = None
    if DIRICHLET in (bc_left, bc_right):
        if phi is None or phi < 1.0:
            raise InvalidPhi(f"Dirichlet penalty needs phi >= 1, got {phi}")
        from .analysis import borrowing_capacity
        try:
            gamma = borrowing_capacity(op).gamma
        except SingularInterior as exc:
            raise BorrowingUnavailable(
                "no borrowing capacity at the semi-definiteness limit"
            ) from exc
        mu = -float(phi) / (h * gamma)
    elif phi is not None:
        raise InvalidPhi("phi only applies to Dirichlet sides")

    # Assemble H*D directly from A so that the Neumann cancellation of the
    # boundary-derivative terms is exact.
    hd = -op.A.copy()
    if bc_left == DIRICHLET:
        hd -= np.outer(e_l, op.d_left)
        hd += np.outer(mu * e_l - op.d_left, e_l)
    if bc_right == DIRICHLET:
        hd += np.outer(e_r, op.d_right)
        hd += np.outer(mu * e_r + op.d_right, e_r)
    d = hd / op.h_diag[:, None]
    return SatDiscretization(
        op=op, bc_left=bc_left, bc_right=bc_right,
        phi=None if phi is None else float(phi), gamma=gamma, mu=mu,
        D=d, symmetric_form=hd,
    )


def assemble_forcing(disc: SatDiscretization, f_values: np.ndarray,
                     g_left: float, g_right: float) -> np.ndarray:
    """Forcing vector combining the interior source with boundary data."""
    f = np.asarray(f_values, dtype=float)
    n = disc.n
    if f.shape != (n + 1,):
        raise ValueError(f"forcing must have length {n + 1}")
    op = disc.op
    out = f.copy()
    if disc.bc_left == DIRICHLET:
        vec = -(disc.mu * _unit(n, 0) - op.d_left) * g_left
    else:
        vec = -SIGMA_LEFT * _unit(n, 0) * g_left
    out += vec / op.h_diag
    if disc.bc_right == DIRICHLET:
        vec = -(disc.mu * _unit(n, n) + op.d_right) * g_right
    else:
        vec = -SIGMA_RIGHT * _unit(n, n) * g_right
    out += vec / op.h_diag
    return out


def _unit(n: int, index: int) -> np.ndarray:
    v = np.zeros(n + 1)
    v[index] = 1.0
    return v
