"""Operator-splitting (ADMM) fallback solver for large PSD blocks.

Splits  min c'x + I_K(s)  s.t.  A x + s = b  into a least-squares x-update,
a cone projection s-update, and a scaled dual ascent.  Converges linearly
at best, so it is intended for loose tolerances where one interior-point
factorization would be too expensive.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import InvalidProgramError
from .program import NONNEG, PSD, SOC, ZERO, ConicProgram, smat, svec
from .ipm import NUMERICAL_LIMIT, OPTIMAL, ConicSolution


def _project_cone(program: ConicProgram, v: np.ndarray) -> np.ndarray:
    out = v.copy()
    for cone, sl in program.cone_slices():
        blk = v[sl]
        if cone.kind == ZERO:
            out[sl] = 0.0
        elif cone.kind == NONNEG:
            out[sl] = np.maximum(blk, 0.0)
        elif cone.kind == SOC:
            t, u = blk[0], blk[1:]
            nu = np.linalg.norm(u)
            if nu <= t:
                pass
            elif nu <= -t:
                out[sl] = 0.0
            else:
                coef = (t + nu) / 2.0
                out[sl.start] = coef
                out[sl.start + 1 : sl.stop] = coef * u / max(nu, 1e-300)
        else:  # PSD
            M = smat(blk, cone.size)
            vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
            vals = np.maximum(vals, 0.0)
            out[sl] = svec((vecs * vals) @ vecs.T)
    return out


def solve_admm(program: ConicProgram, tol: float = 1e-6, max_iter: int = 50000,
               rho: float = 1.0, over_relax: float = 1.6,
               verbose: bool = False, log_stream=None) -> ConicSolution:
    A = program.A.tocsc()
    b = program.b
    c = program.c
    m, n = A.shape
    if m == 0:
        raise InvalidProgramError("program has no constraint rows")

    AtA = (A.T @ A).toarray()
    reg = 1e-10 * max(1.0, np.trace(AtA) / max(n, 1))
    chol = np.linalg.cholesky(AtA + reg * np.eye(n))

    def x_update(rhs):
        t = np.linalg.solve(chol, rhs)
        return np.linalg.solve(chol.T, t)

    s = _project_cone(program, b.copy())
    u = np.zeros(m)
    norm_b = max(1.0, float(np.linalg.norm(b)))
    norm_c = max(1.0, float(np.linalg.norm(c)))

    pres = dres = math.inf
    it = 0
    for it in range(max_iter):
        x = x_update(A.T @ (b - s - u) - c / rho)
        Ax = A @ x
        v = over_relax * Ax + (1.0 - over_relax) * (b - s)
        s_new = _project_cone(program, b - v - u)
        u = u + v + s_new - b
        pres = float(np.linalg.norm(Ax + s_new - b)) / norm_b
        dres = rho * float(np.linalg.norm(A.T @ (s_new - s))) / norm_c
        s = s_new
        if verbose and it % 100 == 0:
            print(f"admm {it:6d} pres {pres:9.2e} dres {dres:9.2e}",
                  file=log_stream)
        if pres <= tol and dres <= tol:
            break

    z = rho * u
    objective = float(c @ x) + program.objective_offset
    gap = abs(float(c @ x) + float(b @ z))
    status = OPTIMAL if (pres <= tol and dres <= tol) else NUMERICAL_LIMIT
    return ConicSolution(status, x, z, objective,
                         {"primal": pres, "dual": dres, "gap": gap},
                         it + 1, None, {"rho": rho})
