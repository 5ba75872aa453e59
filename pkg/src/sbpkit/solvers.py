"""Steady and time-dependent solves driven by manufactured solutions.

Poisson problems reduce to one linear solve (direct for Dirichlet/mixed
boundaries, pseudoinverse for pure Neumann).  Heat and wave problems are
marched with the classical fourth-order Runge-Kutta scheme, with the step
size tied to the spectral radius of the discretization matrix so that the
time error stays subdominant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularMatrix, SingularSystem, UnstableStep, UsageError
from .linalg import LuFactorization, sym_eigenvalues
from .operators import SbpSecondDerivative
from .pseudoinverse import solve_neumann_system
from .sat import DIRICHLET, NEUMANN, SatDiscretization, assemble_forcing, build_discretization


# -- manufactured solutions ---------------------------------------------------------


@dataclass(frozen=True)
class ManufacturedSolution:
    """Analytic solution with the derivative evaluators needed to generate
    forcing terms and boundary data."""

    name: str
    u: Callable
    u_x: Callable
    u_t: Callable
    u_tt: Callable
    u_xx: Callable
    parameters: dict = field(default_factory=dict)

    def forcing(self, kind: str, x, t: float):
        if kind == "poisson":
            return -self.u_xx(x, t)
        if kind == "heat":
            return self.u_t(x, t) - self.u_xx(x, t)
        if kind == "wave":
            return self.u_tt(x, t) - self.u_xx(x, t)
        raise ValueError(f"unknown equation kind {kind!r}")

    def boundary_data(self, bc: str, x_val: float, t: float) -> float:
        if bc == DIRICHLET:
            return float(self.u(x_val, t))
        return float(self.u_x(x_val, t))


def monomial_solution(degree: int) -> ManufacturedSolution:
    """u = x^degree, constant in time."""
    d = int(degree)

    def u(x, t=0.0):
        return np.asarray(x, dtype=float) ** d

    def u_x(x, t=0.0):
        x = np.asarray(x, dtype=float)
        return d * x ** (d - 1) if d >= 1 else np.zeros_like(x)

    def u_zero(x, t=0.0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def u_xx(x, t=0.0):
        x = np.asarray(x, dtype=float)
        return d * (d - 1) * x ** (d - 2) if d >= 2 else np.zeros_like(x)

    name = {2: "quad", 5: "poly5"}.get(d, f"poly{d}")
    return ManufacturedSolution(name=name, u=u, u_x=u_x, u_t=u_zero,
                                u_tt=u_zero, u_xx=u_xx, parameters={"degree": d})


def heat_solution(c: float = 3.0) -> ManufacturedSolution:
    """Forcing-free heat solution: two counter-propagating thermal waves
    normalized at the right boundary."""
    c = float(c)
    norm = math.exp(c) + math.exp(-c)

    def parts(x, t):
        x = np.asarray(x, dtype=float)
        phase_p = c * x + 2.0 * c * c * t
        phase_m = -c * x + 2.0 * c * c * t
        ep = np.exp(c * (x - 1.0))
        em = np.exp(-c * (x - 1.0))
        return phase_p, phase_m, ep, em

    def u(x, t):
        pp, pm, ep, em = parts(x, t)
        return (np.sin(pp) * ep + np.sin(pm) * em) / norm

    def u_x(x, t):
        pp, pm, ep, em = parts(x, t)
        return c * (ep * (np.cos(pp) + np.sin(pp)) - em * (np.cos(pm) + np.sin(pm))) / norm

    def u_t(x, t):
        pp, pm, ep, em = parts(x, t)
        return 2.0 * c * c * (np.cos(pp) * ep + np.cos(pm) * em) / norm

    def u_xx(x, t):
        return u_t(x, t)            # forcing-free by construction

    def u_tt(x, t):
        pp, pm, ep, em = parts(x, t)
        return -4.0 * c ** 4 * (np.sin(pp) * ep + np.sin(pm) * em) / norm

    return ManufacturedSolution(name="heat_c", u=u, u_x=u_x, u_t=u_t,
                                u_tt=u_tt, u_xx=u_xx, parameters={"c": c})


def wave_solution() -> ManufacturedSolution:
    """Forcing-free standing wave cos(2 pi x + 1) cos(2 pi t + 2)."""
    w = 2.0 * math.pi

    def u(x, t):
        return np.cos(w * np.asarray(x, dtype=float) + 1.0) * math.cos(w * t + 2.0)

    def u_x(x, t):
        return -w * np.sin(w * np.asarray(x, dtype=float) + 1.0) * math.cos(w * t + 2.0)

    def u_t(x, t):
        return -w * np.cos(w * np.asarray(x, dtype=float) + 1.0) * math.sin(w * t + 2.0)

    def u_tt(x, t):
        return -w * w * np.cos(w * np.asarray(x, dtype=float) + 1.0) * math.cos(w * t + 2.0)

    def u_xx(x, t):
        return u_tt(x, t)

    return ManufacturedSolution(name="wave_trig", u=u, u_x=u_x, u_t=u_t,
                                u_tt=u_tt, u_xx=u_xx)


def manufactured_solution(name: str, c: float = 3.0) -> ManufacturedSolution:
    if name == "poly5":
        return monomial_solution(5)
    if name == "quad":
        return monomial_solution(2)
    if name == "heat_c":
        return heat_solution(c)
    if name == "wave_trig":
        return wave_solution()
    raise ValueError(f"unknown manufactured solution {name!r}")


# -- error norms ---------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    h_norm: float
    l2_norm: float
    max_norm: float
    mean_over_time: float | None = None


def error_norms(eps: np.ndarray, h_diag: np.ndarray) -> ErrorReport:
    eps = np.asarray(eps, dtype=float)
    if eps.shape != np.asarray(h_diag).shape:
        raise ValueError("error vector and norm diagonal must have equal length")
    return ErrorReport(
        h_norm=float(np.sqrt(eps @ (h_diag * eps))),
        l2_norm=float(np.sqrt(eps @ eps)),
        max_norm=float(np.abs(eps).max()),
    )


# -- steady Poisson -------------------------------------------------------------------


def poisson_solve(disc: SatDiscretization, ms: ManufacturedSolution,
                  method: str = "moore_penrose"):
    """Steady solve of the boundary-modified system; returns (v, ErrorReport).

    Dirichlet/mixed boundaries use an LU solve on the symmetric form (phi = 1
    makes it singular).  Pure Neumann boundaries go through the pseudoinverse
    and the error is measured against the mean-shifted solution.
    """
    op = disc.op
    x = op.grid.nodes
    f = ms.forcing("poisson", x, 0.0)
    g_l = ms.boundary_data(disc.bc_left, 0.0, 0.0)
    g_r = ms.boundary_data(disc.bc_right, 1.0, 0.0)
    full = assemble_forcing(disc, f, g_l, g_r)
    b = op.h_diag * full
    u = ms.u(x, 0.0)
    if disc.has_dirichlet():
        matrix = -disc.symmetric_form
        try:
            v = LuFactorization(matrix, pivot_tol=1e-12).solve(b, refine=1, matrix=matrix)
        except SingularMatrix as exc:
            raise SingularSystem(
                f"boundary-modified system is singular (phi={disc.phi})"
            ) from exc
        eps = u - v
    else:
        v = solve_neumann_system(op, b, method=method)
        eps = u - u.mean() - v
    return v, error_norms(eps, op.h_diag)


# -- time marching ---------------------------------------------------------------------


@dataclass
class TimeSolveResult:
    times: np.ndarray
    h_norm_history: np.ndarray
    v_final: np.ndarray
    report: ErrorReport          # error at the final time, mean_over_time filled
    dt: float
    spectral_radius: float
    snapshots: list


def spectral_radius_of(disc: SatDiscretization) -> float:
    return sym_eigenvalues(disc.similar_symmetric()).spectral_radius


def _boundary_forcing_parts(disc: SatDiscretization):
    """Constant vectors multiplying the left/right boundary data in the
    assembled forcing (the data enters linearly)."""
    n = disc.n
    zero = np.zeros(n + 1)
    left = assemble_forcing(disc, zero, 1.0, 0.0)
    right = assemble_forcing(disc, zero, 0.0, 1.0)
    return left, right


def _march(disc: SatDiscretization, ms: ManufacturedSolution, kind: str,
           t_end: float, dt: float, snapshot_stride: int, second_order: bool):
    op = disc.op
    x = op.grid.nodes
    h_diag = op.h_diag
    d = disc.D
    left_vec, right_vec = _boundary_forcing_parts(disc)

    def forcing_at(t: float) -> np.ndarray:
        return (ms.forcing(kind, x, t)
                + left_vec * ms.boundary_data(disc.bc_left, 0.0, t)
                + right_vec * ms.boundary_data(disc.bc_right, 1.0, t))

    v = np.asarray(ms.u(x, 0.0), dtype=float)
    w = np.asarray(ms.u_t(x, 0.0), dtype=float) if second_order else None

    if second_order:
        def rhs(t, state):
            vv, ww = state
            return ww, d @ vv + forcing_at(t)
    else:
        def rhs(t, state):
            return (d @ state[0] + forcing_at(t),)

    steps = max(1, int(round(t_end / dt)))
    dt = t_end / steps
    times = np.empty(steps + 1)
    errors = np.empty(steps + 1)
    times[0] = 0.0
    errors[0] = 0.0
    snapshots = [(0.0, v.copy())] if snapshot_stride else []
    state = (v, w) if second_order else (v,)
    initial_scale = None
    for step in range(1, steps + 1):
        t = (step - 1) * dt
        k1 = rhs(t, state)
        k2 = rhs(t + dt / 2, tuple(s + dt / 2 * k for s, k in zip(state, k1)))
        k3 = rhs(t + dt / 2, tuple(s + dt / 2 * k for s, k in zip(state, k2)))
        k4 = rhs(t + dt, tuple(s + dt * k for s, k in zip(state, k3)))
        state = tuple(
            s + dt / 6 * (a + 2 * b + 2 * c + e)
            for s, a, b, c, e in zip(state, k1, k2, k3, k4)
        )
        t_now = step * dt
        eps = np.asarray(ms.u(x, t_now)) - state[0]
        err = float(np.sqrt(eps @ (h_diag * eps)))
        times[step] = t_now
        errors[step] = err
        if initial_scale is None and err > 0.0:
            initial_scale = err
        if not np.isfinite(err) or (initial_scale and err > 1e6 * initial_scale):
            raise UnstableStep(
                f"error norm {err:.3e} exceeds 1e6 x initial at t={t_now:.4f}",
                history=(times[:step + 1].copy(), errors[:step + 1].copy()),
            )
        if snapshot_stride and step % snapshot_stride == 0:
            snapshots.append((t_now, state[0].copy()))
    eps = np.asarray(ms.u(x, t_end)) - state[0]
    final = error_norms(eps, h_diag)
    report = ErrorReport(h_norm=final.h_norm, l2_norm=final.l2_norm,
                         max_norm=final.max_norm,
                         mean_over_time=float(errors.mean()))
    return TimeSolveResult(times=times, h_norm_history=errors,
                           v_final=state[0], report=report, dt=dt,
                           spectral_radius=float("nan"), snapshots=snapshots)


def heat_solve(disc: SatDiscretization, ms: ManufacturedSolution, t_end: float,
               dt: float | None = None, snapshot_stride: int = 10) -> TimeSolveResult:
    """March v_t = D v + forcing with classical RK4 from exact initial data.

    The default step is 2.5 / rho(D), inside the RK4 stability interval on
    the negative real axis.
    """
    rho = spectral_radius_of(disc)
    if dt is None:
        dt = 2.5 / rho
    elif dt * rho > 2.5:
        raise UsageError(
            f"dt={dt} violates the stability bound dt*rho <= 2.5 (rho={rho:.3e})"
        )
    result = _march(disc, ms, "heat", t_end, dt, snapshot_stride, second_order=False)
    result.spectral_radius = rho
    return result


def wave_solve(disc: SatDiscretization, ms: ManufacturedSolution, t_end: float,
               dt: float | None = None, snapshot_stride: int = 10) -> TimeSolveResult:
    """March the first-order form (v, v_t) of v_tt = D v + forcing with RK4.

    The default step keeps dt * sqrt(rho(D)) well below the stability bound
    2.6 and small enough that the time error stays subdominant.
    """
    rho = spectral_radius_of(disc)
    if dt is None:
        dt = min(0.65 / math.sqrt(rho), t_end / 400.0)
    elif dt * math.sqrt(rho) > 2.6:
        raise UsageError(
            f"dt={dt} violates the stability bound dt*sqrt(rho) <= 2.6 (rho={rho:.3e})"
        )
    result = _march(disc, ms, "wave", t_end, dt, snapshot_stride, second_order=True)
    result.spectral_radius = rho
    return result


# -- parameter sweeps --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    phi: float
    n: int
    h_norm: float
    l2_norm: float
    max_norm: float
    rho: float
    rel_error: float
    rel_rho: float
    pareto: bool


SWEEP_HEADER = ("alpha", "phi", "n", "h_norm", "l2_norm", "max_norm",
                "rho", "rel_error", "rel_rho", "pareto_flag")


def optimum_sweep(n: int, alpha_grid, phi_grid, task: str = "dirichlet",
                  jobs: int = 1) -> list[SweepRow]:
    """Error/stiffness trade-off table for the Dirichlet or mixed problem.

    Solves the steady problem with the fifth-monomial solution on every
    (alpha, phi) cell, normalizes by the grid minima and flags the Pareto
    frontier of (rel_error, rel_rho).
    """
    from .operators import build_d2, make_grid

    if task not in ("dirichlet", "mixed"):
        raise ValueError(f"task must be dirichlet or mixed, got {task!r}")
    bc_right = DIRICHLET if task == "dirichlet" else NEUMANN
    grid = make_grid(n)
    ms = monomial_solution(5)
    cells = [(float(a), float(p)) for a in alpha_grid for p in phi_grid]

    def evaluate(cell):
        alpha, phi = cell
        op = build_d2(grid, 6, alpha)
        disc = build_discretization(op, DIRICHLET, bc_right, phi=phi)
        _, report = poisson_solve(disc, ms)
        rho = spectral_radius_of(disc)
        return report, rho

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, cells))
    else:
        results = [evaluate(cell) for cell in cells]

    min_err = min(r.h_norm for r, _ in results)
    min_rho = min(rho for _, rho in results)
    pairs = [(r.h_norm / min_err, rho / min_rho) for r, rho in results]
    pareto = _pareto_flags(pairs)
    rows = []
    for (alpha, phi), (report, rho), (rel_e, rel_r), flag in zip(cells, results, pairs, pareto):
        rows.append(SweepRow(alpha=alpha, phi=phi, n=n,
                             h_norm=report.h_norm, l2_norm=report.l2_norm,
                             max_norm=report.max_norm, rho=rho,
                             rel_error=rel_e, rel_rho=rel_r, pareto=flag))
    return rows


def _pareto_flags(pairs) -> list[bool]:
    flags = []
    for i, (e_i, r_i) in enumerate(pairs):
        dominated = any(
            (e_j <= e_i and r_j <= r_i) and (e_j < e_i or r_j < r_i)
            for j, (e_j, r_j) in enumerate(pairs) if j != i
        )
        flags.append(not dominated)
    return flags
