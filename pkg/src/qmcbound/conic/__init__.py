"""Conic programming over zero, nonnegative, second-order, and PSD cones."""

from ..errors import InvalidProgramError
from .admm import solve_admm
from .ipm import (
    DUAL_INFEASIBLE,
    NUMERICAL_LIMIT,
    OPTIMAL,
    PRIMAL_INFEASIBLE,
    ConicSolution,
    solve_ipm,
)
from .program import (
    NONNEG,
    PSD,
    SOC,
    ZERO,
    Cone,
    ConicProgram,
    check_point,
    smat,
    svec,
    svec_dim,
    svec_index,
)

__all__ = [
    "Cone", "ConicProgram", "ConicSolution", "check_point", "solve",
    "solve_ipm", "solve_admm", "smat", "svec", "svec_dim", "svec_index",
    "ZERO", "NONNEG", "SOC", "PSD",
    "OPTIMAL", "PRIMAL_INFEASIBLE", "DUAL_INFEASIBLE", "NUMERICAL_LIMIT",
]


def solve(program: ConicProgram, tol: float = 1e-8, max_iter: int = 200,
          method: str = "ipm", verbose: bool = False,
          log_stream=None) -> ConicSolution:
    """Solve a conic program to the requested tolerance.

    ``method`` is ``"ipm"`` (homogeneous self-dual interior point, default)
    or ``"admm"`` (operator splitting, for loose tolerances on instances
    whose PSD blocks make the interior-point factorization too expensive).
    """
    if method == "ipm":
        return solve_ipm(program, tol=tol, max_iter=max_iter, verbose=verbose,
                         log_stream=log_stream)
    if method == "admm":
        return solve_admm(program, tol=tol, max_iter=max(max_iter, 20000),
                          verbose=verbose, log_stream=log_stream)
    raise InvalidProgramError(f"unknown solve method {method!r}")
