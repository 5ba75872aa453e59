"""Command-line front end.

Every analysis and experiment in the package is reachable as a subcommand
emitting JSON or CSV with 17-significant-digit numbers, so identical flags
always produce byte-identical files.  ``--check`` additionally evaluates the
reference values reachable from that command and exits 4 on mismatch.

Exit codes: 0 success, 2 usage error, 3 numerical error, 4 failed check.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, solvers
from .errors import NumericalError, UsageError
from .linalg import sym_eigenvalues
from .operators import (
    build_d1,
    build_d2,
    calibrate_beta,
    make_grid,
    operator_to_dict,
    solve_closure_system,
    verify_sbp,
    BETA_BANDWIDTH,
    BETA_SPECTRUM,
    FREE_DIRECTION_VECTOR,
)
from .render import render_csv, render_json
from .sat import build_discretization, DIRICHLET, NEUMANN
from .reference import (
    ALPHA_STAR_TABLE,
    BORROWING_REFERENCE,
    MIN_ALPHA_REFERENCE,
    TRUNCATION_ARGMIN_H,
    TRUNCATION_ARGMIN_L2,
)

_CHECK_FAILURES: list[str]


def _fail(check: str, detail: str) -> None:
    _CHECK_FAILURES.append(f"{check}: {detail}")


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _bc_pair(bc: str) -> tuple[str, str]:
    return {
        "dirichlet": (DIRICHLET, DIRICHLET),
        "neumann": (NEUMANN, NEUMANN),
        "mixed": (DIRICHLET, NEUMANN),
    }[bc]


def _operator_from_args(args) -> tuple:
    grid = make_grid(args.n)
    alpha = getattr(args, "alpha", None)
    if args.order != 6 and alpha is not None:
        raise UsageError("--alpha applies to order 6 only")
    return grid, build_d2(grid, args.order, alpha)


# -- command handlers ---------------------------------------------------------------


def _cmd_build_operator(args) -> str:
    _, op = _operator_from_args(args)
    if args.check and args.order == 6:
        _check_sixth_order_tables(op)
    if args.check:
        report = verify_sbp(op)
        for name, (res, bound, ok) in report.items():
            if not ok:
                _fail(f"verify:{name}", f"residual {res:.3e} exceeds {bound:.3e}")
    return render_json(operator_to_dict(op))


def _check_sixth_order_tables(op) -> None:
    from .operators import _CORNER6_RATIONAL

    grid, alpha = op.grid, op.alpha
    h = grid.h
    k = FREE_DIRECTION_VECTOR
    expected = np.array([[num / den for num, den in row] for row in _CORNER6_RATIONAL])
    expected = (expected + alpha * np.outer(k, k)) / (180.0 * h)
    scale = np.abs(expected).max()
    if np.abs(op.A[:6, :6] - expected).max() > 1e-13 * scale:
        _fail("corner", "sixth-order boundary block deviates from the closed form")
    h_expected = np.array([13649.0, 60065.0, 27110.0, 53590.0, 39385.0, 43801.0]) * h / 43200.0
    if np.abs(op.h_diag[:6] - h_expected).max() > 0.0:
        _fail("norm", "boundary quadrature values deviate")
    mid = grid.n // 2
    stencil = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / (180.0 * h * h)
    if np.abs(op.D2[mid, mid - 3:mid + 4] - stencil).max() > 1e-9 / h ** 2:
        _fail("interior", "interior second-derivative stencil deviates")
    closure = solve_closure_system(grid)
    if closure.system_rank != 20 or closure.nullspace_dim != 1:
        _fail("closure", f"rank {closure.system_rank}, nullity {closure.nullspace_dim}")


def _cmd_verify(args) -> str:
    grid = make_grid(args.n)
    if args.type == "d2":
        op = build_d2(grid, args.order, getattr(args, "alpha", None))
    else:
        op = build_d1(grid, args.order, t=args.t, beta=args.beta)
    report = verify_sbp(op)
    payload = {}
    for name, (res, bound, ok) in report.items():
        payload[name] = {"residual": res, "bound": bound, "passed": ok}
        if not ok:
            _fail(name, f"residual {res:.3e} exceeds bound {bound:.3e}")
    return render_json(payload)


def _cmd_alpha_star(args) -> str:
    result = analysis.alpha_star(args.n)
    if args.check:
        ref = ALPHA_STAR_TABLE.get(args.n)
        if ref is None and args.n > 24:
            ref = ALPHA_STAR_TABLE[24]
        if ref is not None:
            for got, want in zip(result.roots, ref):
                if abs(got - want) > 1e-9:
                    _fail("alpha-star", f"root {got!r} vs reference {want!r}")
        if args.n >= 21 and abs(result.roots[1] - result.roots[0]) > 1e-12:
            _fail("alpha-star", "roots have not merged")
    return render_json({
        "n": args.n,
        "roots": list(result.roots),
        "eigenvalues_2x2": list(result.eigenvalues_2x2),
    })


def _cmd_borrowing(args) -> str:
    grid, op = _operator_from_args(args)
    result = analysis.borrowing_capacity(op)
    if args.check:
        want = BORROWING_REFERENCE.get(args.alpha) if args.n >= 21 else None
        if want is not None and abs(result.gamma - want) > 1e-9:
            _fail("borrowing", f"gamma {result.gamma!r} vs reference {want!r}")
        witness = op.A - grid.h * result.gamma * (
            np.outer(op.d_left, op.d_left) + np.outer(op.d_right, op.d_right))
        rep = sym_eigenvalues(witness)
        bound = 1e-8 * np.abs(witness).sum(axis=1).max()
        if not (-bound <= rep.min_eigenvalue <= bound):
            _fail("borrowing", f"capacity witness min eig {rep.min_eigenvalue:.3e}")
    return render_json({
        "alpha": getattr(args, "alpha", None),
        "n": args.n,
        "gamma": result.gamma,
        "xi_boundary": result.xi_boundary,
        "xi_cross": result.xi_cross,
    })


def _cmd_compat(args) -> str:
    grid = make_grid(args.n)
    op2 = build_d2(grid, 6, args.alpha)
    op1 = build_d1(grid, 6, beta=args.beta)
    report = analysis.compatibility(op2, op1)
    return render_json({
        "alpha": report.alpha,
        "beta": report.beta,
        "min_eig_R": report.min_eig_R,
        "compatible": report.compatible,
    })


def _cmd_compat_min_alpha(args) -> str:
    value = analysis.compatibility_min_alpha(args.beta, args.n)
    if args.check:
        for beta_ref, alpha_ref in MIN_ALPHA_REFERENCE.items():
            if abs(args.beta - beta_ref) < 1e-12 and abs(value - alpha_ref) > 1e-4:
                _fail("compat-min-alpha", f"{value!r} vs reference {alpha_ref!r}")
    return render_json({"beta": args.beta, "n": args.n, "min_alpha": value})


def _cmd_truncation(args) -> str:
    grid, op = _operator_from_args(args)
    r = analysis.truncation_vector(op)
    argmin_l2 = analysis.truncation_optimum(grid, "l2")
    argmin_h = analysis.truncation_optimum(grid, "h")
    if args.check:
        if abs(argmin_l2 - TRUNCATION_ARGMIN_L2) > 1e-6:
            _fail("truncation", f"l2 argmin {argmin_l2!r}")
        if abs(argmin_h - TRUNCATION_ARGMIN_H) > 1e-6:
            _fail("truncation", f"h argmin {argmin_h!r}")
        if np.abs(r[6:-6]).max() > 1e-9 / grid.h ** 2 * np.abs(r).max():
            _fail("truncation", "interior entries not negligible")
    return render_json({
        "alpha": args.alpha,
        "n": args.n,
        "r": r.tolist(),
        "argmin_l2": argmin_l2,
        "argmin_h": argmin_h,
    })


def _spectrum_matrix(args, grid, alpha: float):
    if args.family == "a":
        return build_d2(grid, 6, alpha).A
    op = build_d2(grid, 6, alpha)
    bc_left, bc_right = _bc_pair(args.family)
    disc = build_discretization(op, bc_left, bc_right, phi=args.phi)
    return disc.similar_symmetric()


def _cmd_spectrum(args) -> str:
    grid = make_grid(args.n)
    alphas = _alpha_grid(args)
    if args.family != "a" and _bc_pair(args.family)[0] == DIRICHLET and args.phi is None:
        raise UsageError("--phi required for Dirichlet/mixed spectra")

    def evaluate(alpha):
        return sym_eigenvalues(_spectrum_matrix(args, grid, alpha))

    if args.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(evaluate, alphas))
    else:
        reports = [evaluate(a) for a in alphas]
    rows = [
        (alpha, args.phi if args.phi is not None else "",
         rep.min_eigenvalue, rep.eigenvalues[-1], rep.spectral_radius, rep.numeric_rank)
        for alpha, rep in zip(alphas, reports)
    ]
    if args.check and args.family == "dirichlet" and args.phi == 1.0:
        radii = [rep.spectral_radius for rep in reports]
        argmin = alphas[int(np.argmin(radii))]
        if alphas[0] <= 487.3 <= alphas[-1] and abs(argmin - 487.3) > 0.2:
            _fail("spectrum", f"stiffness argmin {argmin!r} not at 487.30 +- 0.2")
    if args.check and args.family == "a":
        limit = analysis.alpha_star(args.n).limit
        for alpha, rep in zip(alphas, reports):
            psd = rep.min_eigenvalue >= -1e-9 * rep.spectral_radius
            if psd != (alpha >= limit - 1e-9):
                _fail("spectrum", f"semi-definiteness at alpha={alpha} disagrees with limit")
    return render_csv(
        ("alpha", "phi", "min_eig", "max_eig", "spectral_radius", "numeric_rank"), rows)


def _cmd_poisson(args) -> str:
    grid = make_grid(args.n)
    op = build_d2(grid, args.order, args.alpha if args.order == 6 else None)
    bc_left, bc_right = _bc_pair(args.bc)
    disc = build_discretization(op, bc_left, bc_right, phi=args.phi)
    ms = solvers.manufactured_solution(args.solution)
    v, report = solvers.poisson_solve(disc, ms, method=args.method)
    if args.check and args.solution == "quad":
        if report.max_norm > 1e-9:
            _fail("poisson", f"quadratic solution error {report.max_norm:.3e} > 1e-9")
    return render_json({
        "bc": args.bc, "n": args.n, "alpha": args.alpha, "phi": args.phi,
        "solution": args.solution, "method": args.method,
        "h_norm": report.h_norm, "l2_norm": report.l2_norm, "max_norm": report.max_norm,
        "v": v.tolist() if args.emit_solution else None,
    })


def _cmd_heat(args) -> str:
    grid = make_grid(args.n)
    op = build_d2(grid, args.order, args.alpha if args.order == 6 else None)
    bc_left, bc_right = _bc_pair(args.bc)
    disc = build_discretization(op, bc_left, bc_right, phi=args.phi)
    ms = solvers.manufactured_solution(args.solution, c=args.c)
    result = solvers.heat_solve(disc, ms, t_end=args.t_end, dt=args.dt)
    if args.format == "csv":
        rows = list(zip(result.times, result.h_norm_history))
        return render_csv(("t", "h_norm_error"), rows)
    return _time_summary(args, result)


def _cmd_wave(args) -> str:
    grid = make_grid(args.n)
    op = build_d2(grid, args.order, args.alpha if args.order == 6 else None)
    bc_left, bc_right = _bc_pair(args.bc)
    disc = build_discretization(op, bc_left, bc_right, phi=args.phi)
    ms = solvers.manufactured_solution(args.solution)
    result = solvers.wave_solve(disc, ms, t_end=args.t_end, dt=args.dt)
    if args.format == "csv":
        rows = list(zip(result.times, result.h_norm_history))
        return render_csv(("t", "h_norm_error"), rows)
    return _time_summary(args, result)


def _time_summary(args, result) -> str:
    return render_json({
        "n": args.n, "alpha": args.alpha, "t_end": args.t_end,
        "dt": result.dt, "spectral_radius": result.spectral_radius,
        "mean_h_norm": result.report.mean_over_time,
        "final_h_norm": result.report.h_norm,
        "final_l2_norm": result.report.l2_norm,
        "final_max_norm": result.report.max_norm,
    })


def _cmd_optimum_sweep(args) -> str:
    alphas = _alpha_grid(args)
    phis = [float(p) for p in args.phi_list.split(",")]
    if args.check:
        for special in (482.56, 490.0):
            if not any(abs(a - special) < 1e-9 for a in alphas):
                alphas = sorted(alphas + [special])
        for special in (1.19, 1.7):
            if not any(abs(p - special) < 1e-9 for p in phis):
                phis = sorted(phis + [special])
    rows = solvers.optimum_sweep(args.n, alphas, phis, task=args.task, jobs=args.jobs)
    if args.check:
        _check_sweep_rows(rows)
    table = [
        (r.alpha, r.phi, r.n, r.h_norm, r.l2_norm, r.max_norm, r.rho,
         r.rel_error, r.rel_rho, int(r.pareto))
        for r in rows
    ]
    return render_csv(solvers.SWEEP_HEADER, table)


def _check_sweep_rows(rows) -> None:
    def cell(alpha, phi):
        return next(r for r in rows
                    if abs(r.alpha - alpha) < 1e-9 and abs(r.phi - phi) < 1e-9)

    for (alpha, phi, err_ref, rho_ref) in (
        (482.56, 1.19, 1.25, 2.73),
        (490.0, 1.7, 2.79, 1.43),
    ):
        r = cell(alpha, phi)
        if not (0.85 * err_ref <= r.rel_error <= 1.15 * err_ref):
            _fail("optimum-sweep", f"rel_error at ({alpha},{phi}) = {r.rel_error!r}")
        if not (0.85 * rho_ref <= r.rel_rho <= 1.15 * rho_ref):
            _fail("optimum-sweep", f"rel_rho at ({alpha},{phi}) = {r.rel_rho!r}")
    candidates = [r.rel_rho for r in rows if r.rel_error <= 1.205]
    if not candidates or min(candidates) > 3.9:
        _fail("optimum-sweep", "no frontier point with rel_error <= 1.2 and rel_rho <= 3.9")


def _alpha_grid(args) -> list[float]:
    if getattr(args, "alpha_grid", None):
        return [float(a) for a in args.alpha_grid.split(",")]
    if args.alpha_min is None or args.alpha_max is None or args.alpha_step is None:
        raise UsageError("provide --alpha-grid or --alpha-min/--alpha-max/--alpha-step")
    count = int(round((args.alpha_max - args.alpha_min) / args.alpha_step))
    return [args.alpha_min + i * args.alpha_step for i in range(count + 1)]


# -- argument surface -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbpkit",
        description="Narrow-stencil SBP operators, pseudoinverses and SBP-SAT solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(handler=handler)
        p.add_argument("--out", dest="out_path", default=None,
                       help="output file (default: stdout)")
        p.add_argument("--check", action="store_true",
                       help="also evaluate reference values; exit 4 on mismatch")
        return p

    p = add("build-operator", _cmd_build_operator, help="construct and export a D2 operator")
    p.add_argument("--order", type=int, choices=(2, 4, 6), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)

    p = add("verify", _cmd_verify, help="evaluate the defining identities of an operator")
    p.add_argument("--type", choices=("d2", "d1"), default="d2")
    p.add_argument("--order", type=int, choices=(2, 4, 6), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)

    p = add("alpha-star", _cmd_alpha_star, help="semi-definiteness limit of the free parameter")
    p.add_argument("--n", type=int, required=True)

    p = add("borrowing", _cmd_borrowing, help="borrowing capacity of an operator")
    p.add_argument("--order", type=int, choices=(2, 4, 6), default=6)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)

    p = add("compat", _cmd_compat, help="compatibility verdict for (alpha, beta)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("compat-min-alpha", _cmd_compat_min_alpha,
            help="smallest alpha compatible with D1 at beta")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("truncation", _cmd_truncation, help="boundary truncation error and its optima")
    p.add_argument("--order", type=int, choices=(6,), default=6)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)

    p = add("spectrum", _cmd_spectrum, help="eigenvalue sweep over the free parameter")
    p.add_argument("--family", choices=("a", "neumann", "dirichlet", "mixed"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--alpha-grid", default=None, help="comma-separated alpha values")
    p.add_argument("--alpha-min", type=float, default=None)
    p.add_argument("--alpha-max", type=float, default=None)
    p.add_argument("--alpha-step", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = add("poisson", _cmd_poisson, help="steady manufactured-solution solve")
    p.add_argument("--bc", choices=("dirichlet", "neumann", "mixed"), required=True)
    p.add_argument("--order", type=int, choices=(2, 4, 6), default=6)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--solution", choices=("quad", "poly5"), default="poly5")
    p.add_argument("--method", choices=("moore_penrose", "filtered"), default="moore_penrose")
    p.add_argument("--emit-solution", action="store_true")

    for name, handler, default_solution in (
        ("heat", _cmd_heat, "heat_c"),
        ("wave", _cmd_wave, "wave_trig"),
    ):
        p = add(name, handler, help=f"{name} equation marching with manufactured data")
        p.add_argument("--bc", choices=("dirichlet", "neumann", "mixed"),
                       default="neumann" if name == "heat" else "dirichlet")
        p.add_argument("--order", type=int, choices=(2, 4, 6), default=6)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--phi", type=float, default=None)
        p.add_argument("--solution", default=default_solution,
                       choices=("quad", "poly5", "heat_c", "wave_trig"))
        p.add_argument("--t-end", type=float, required=True)
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--c", type=float, default=3.0)
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("optimum-sweep", _cmd_optimum_sweep,
            help="error/stiffness trade-off table over (alpha, phi)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--task", choices=("dirichlet", "mixed"), default="dirichlet")
    p.add_argument("--alpha-grid", default=None)
    p.add_argument("--alpha-min", type=float, default=None)
    p.add_argument("--alpha-max", type=float, default=None)
    p.add_argument("--alpha-step", type=float, default=None)
    p.add_argument("--phi-list", default="1.01,1.19,1.5,1.7,2,2.82,4,8,16,32")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    global _CHECK_FAILURES
    _CHECK_FAILURES = []
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    _write_output(text, args.out_path)
    if _CHECK_FAILURES:
        for line in _CHECK_FAILURES:
            print(f"check failed: {line}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
