"""Named invariant checks behind the ``verify`` CLI command.

Each check returns True/False; the runner prints one PASS/FAIL line per
check.  These are the fast cross-module oracles (the full acceptance suite
lives in the test tree and runs under pytest).
"""

from __future__ import annotations

import math

import numpy as np

from . import conic, exact, graphs, model, rounding, symmetry
from .analysis import approx_ratio_lp
from .conic import Cone, ConicProgram, NONNEG, PSD, SOC


def _check_irreps(quick):
    for k in (3, 4):
        perms = symmetry.all_perms(k)
        for lam in symmetry.partitions_of(k):
            mats = {p: symmetry.young_orthogonal_irrep(lam, p) for p in perms}
            for p in perms:
                if np.abs(mats[p].T @ mats[p] - np.eye(mats[p].shape[0])).max() > 1e-12:
                    return False
            pairs = perms if not quick else perms[::3]
            for p in pairs:
                for q in perms:
                    lhs = mats[symmetry.compose(p, q)]
                    if np.abs(lhs - mats[p] @ mats[q]).max() > 1e-11:
                        return False
    return True


def _check_weingarten(quick):
    ok = abs(symmetry.weingarten((1, 1), 2) - 1.0 / 3.0) < 1e-15
    ok &= abs(symmetry.weingarten((2,), 2) + 1.0 / 6.0) < 1e-15
    # reconstruction round trip on a random real-invariant operator
    rng = np.random.default_rng(11)
    for k, d in ((3, 2), (4, 2)):
        perms = symmetry.all_perms(k)
        coeff = {}
        for p in perms:
            q = symmetry.inverse(p)
            if q in coeff:
                coeff[p] = coeff[q]
            else:
                coeff[p] = rng.standard_normal()
        A = sum(c * symmetry.permutation_matrix(p, d) for p, c in coeff.items())
        op = symmetry.operator_from_matrix(A, k, d)
        B = symmetry.reconstruct_operator(op)
        for p in perms[:: 4 if quick else 1]:
            got = float(np.trace(symmetry.permutation_matrix(p, d) @ B))
            if abs(got - op.expect[p]) > 1e-10:
                return False
    return ok


def _check_lm_pt_oracle(quick):
    rng = np.random.default_rng(5)
    count = 300 if quick else 2000
    pts = rng.uniform(-1, 1, size=(count, 3))
    for x, y, z in pts:
        claimed = symmetry.check_lm_pt(x, y, z)
        op = _three_qubit_operator(x, y, z)
        actual = np.linalg.eigvalsh(symmetry.reconstruct_operator(op)).min() >= -1e-9
        if claimed != actual:
            return False
    return True


def _three_qubit_operator(x, y, z):
    expect = {}
    for p in symmetry.all_perms(3):
        ct = symmetry.cycle_type(p)
        if ct == (1, 1, 1):
            expect[p] = 1.0
        elif ct == (2, 1):
            cyc = next(c for c in symmetry.cycles_of(p) if len(c) == 2)
            expect[p] = {(0, 1): x, (0, 2): y, (1, 2): z}[tuple(sorted(cyc))]
        else:
            expect[p] = 0.5 * (x + y + z - 1.0)
    return symmetry.InvariantOperator(3, 2, expect)


def _check_pt_soc_agreement(quick):
    rng = np.random.default_rng(7)
    count = 10**4 if quick else 10**5
    pts = rng.uniform(-1, 1, size=(count, 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    s = x + y + z
    quad = (x * x + y * y + z * z) - 2 * (x * y + x * z + y * z) + 2 * s
    pt_feas = quad <= 3.0
    A_t, c_t, d_t = model.pt_soc_params()
    lhs = np.hypot(A_t[0, 0] * x + A_t[0, 1] * y + A_t[0, 2] * z,
                   A_t[1, 0] * x + A_t[1, 1] * y + A_t[1, 2] * z)
    rhs = c_t[0] * x + c_t[1] * y + c_t[2] * z + d_t
    soc_feas = lhs <= rhs
    margin = np.abs(quad - 3.0) > 1e-9
    return bool(((pt_feas == soc_feas) | ~margin).all())


def _check_fourqubit_blocks(quick):
    rng = np.random.default_rng(13)
    count = 60 if quick else 200
    for _ in range(count):
        pairs = rng.uniform(-1, 1, size=6)
        prods = rng.uniform(-1, 1, size=3)
        blk = symmetry.fourqubit_blocks_feasible(pairs, prods, tol=1e-9)
        op = symmetry.derive_full_s4(pairs, prods)
        eig = np.linalg.eigvalsh(symmetry.reconstruct_operator(op)).min() >= -1e-9
        if blk != eig:
            return False
    return True


def _check_conic(quick):
    # LP: min x s.t. x >= 1
    p1 = ConicProgram(np.array([1.0]), np.array([[-1.0]]), np.array([-1.0]),
                      [Cone(NONNEG, 1)])
    s1 = conic.solve(p1)
    ok = s1.status == conic.OPTIMAL and abs(s1.objective - 1.0) < 1e-6
    # SOC: min t s.t. ||(3,4)|| <= t
    p2 = ConicProgram(np.array([1.0]),
                      np.array([[-1.0], [0.0], [0.0]]),
                      np.array([0.0, 3.0, 4.0]), [Cone(SOC, 3)])
    s2 = conic.solve(p2)
    ok &= s2.status == conic.OPTIMAL and abs(s2.objective - 5.0) < 1e-6
    # PSD: min t s.t. t I - diag(1, 2) >= 0
    A = np.zeros((3, 1))
    A[0, 0] = -1.0
    A[2, 0] = -1.0
    p3 = ConicProgram(np.array([1.0]), A, np.array([-1.0, 0.0, -2.0]),
                      [Cone(PSD, 2)])
    s3 = conic.solve(p3)
    ok &= s3.status == conic.OPTIMAL and abs(s3.objective - 2.0) < 1e-6
    return bool(ok)


def _check_singlet_pipeline(quick):
    g = graphs.Graph(2, [(0, 1, 1.0)])
    soc = model.solve_relaxation(g, level="soc")
    p1 = model.solve_relaxation(g, level="soc-p1")
    ed = exact.ground_energy(g)
    ok = abs(soc.objective_varbench + 3.0) < 1e-6
    ok &= abs(p1.objective_varbench + 3.0) < 1e-6
    ok &= abs(ed + 3.0) < 1e-9
    res = rounding.round_solution(p1, g, samples=2, seed=1)
    ok &= abs(res.guarantee_ratio - 1.0) < 1e-5
    return bool(ok)


def _check_rounding_function(quick):
    ok = abs(rounding.F(0.25) - 1.0) < 1e-12
    ok &= abs(rounding.F(1.0) - 0.5) < 1e-12
    grid = np.linspace(1e-3, 1.0, 250 if quick else 1000)
    vals = np.array([rounding.F(float(v)) for v in grid])
    ok &= 0.496 <= vals.min() <= 0.500
    ok &= abs(rounding.t_prime(0.771) - 0.7284) < 5e-4
    ok &= abs(approx_ratio_lp(0.771) - 0.526) < 1e-3
    return bool(ok)


CHECKS = [
    ("young-orthogonal irreps: homomorphism and orthogonality", _check_irreps),
    ("weingarten values and reconstruction round trip", _check_weingarten),
    ("three-qubit statehood oracle (LM+PT vs 8x8 eigencheck)", _check_lm_pt_oracle),
    ("PT quadratic vs SOC parameterization", _check_pt_soc_agreement),
    ("four-qubit blocks vs 16x16 eigencheck", _check_fourqubit_blocks),
    ("conic solver closed-form instances", _check_conic),
    ("singlet edge end-to-end pipeline", _check_singlet_pipeline),
    ("rounding function and ratio LP", _check_rounding_function),
]


def run_verification(quick: bool = False, stream=None) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok = fn(quick)
        except Exception as exc:  # a crash is a failure, not an abort
            ok = False
            print(f"FAIL {name} (exception: {exc})", file=stream)
            all_ok = False
            continue
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=stream)
        all_ok &= ok
    return all_ok
