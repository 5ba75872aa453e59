"""Narrow-stencil summation-by-parts operators, their pseudoinverses, and
SBP-SAT discretizations of Poisson, heat and wave problems on [0, 1]."""

from .analysis import (
    AlphaStarResult,
    BorrowingResult,
    CompatibilityReport,
    alpha_star,
    borrowing_capacity,
    check_rank_relation,
    compatibility,
    compatibility_min_alpha,
    similarity_symmetrize,
    spectrum_sweep,
    sylvester_transform,
    truncation_optimum,
    truncation_vector,
)
from .linalg import SpectrumReport, lu_solve, numeric_rank, sym_eigenvalues
from .operators import (
    BetaCalibration,
    ClosureSolution,
    Grid,
    SbpFirstDerivative,
    SbpSecondDerivative,
    build_boundary_derivative,
    build_d1,
    build_d2,
    calibrate_beta,
    make_grid,
    operator_from_json,
    operator_to_json,
    solve_closure_system,
    verify_sbp,
)
from .pseudoinverse import (
    PseudoinverseBundle,
    build_g2,
    extract_interior,
    filtered_pseudoinverse,
    moore_penrose,
    solve_neumann_system,
)
from .sat import SatDiscretization, assemble_forcing, build_discretization
from .solvers import (
    ErrorReport,
    ManufacturedSolution,
    TimeSolveResult,
    error_norms,
    heat_solve,
    manufactured_solution,
    optimum_sweep,
    poisson_solve,
    wave_solve,
)

__version__ = "0.1.0"
