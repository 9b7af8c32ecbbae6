"""Relaxation models: SOC over 3-qubit marginals, Pauli level-1, 4-body blocks.

All models share one variable per unordered vertex pair, x_ij = <swap_ij>,
so the SOC and Pauli level-1 programs have exactly C(n,2) variables.  The
internal objective is VarBench minimization, min 2 sum_e w_e x_e - W; other
scalings are affine conversions via :func:`convert_energy`.

Row layout (deterministic, lexicographic within each group):
nonnegative rows first (pair bounds, then triple LM rows, then per-quadruple
linear rows), then all 3-dim SOC blocks (triples, then quadruple Bloch
blocks), then PSD blocks (the level-1 moment matrix, then quadruple 3x3
blocks).  The Pauli level-1 matrix enters as the PSD cone slack of rows
encoding M_ii = 3, M_ij = 2 x_ij - 1, keeping the variable count at C(n,2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import conic
from .conic import Cone, ConicProgram, NONNEG, PSD, SOC
from .errors import NumericalError, ValidationError
from .graphs import Graph, ScalingConvention

ALL = "all"
TWO_EDGE = "two-edge"

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)

# pairing order inside a sorted quadruple (a,b,c,d)
_QUAD_PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


@dataclass
class VariableMap:
    """Bijection between model variables and pair / quadruple-product labels."""

    n: int
    pair_index: dict
    quad_index: dict | None = None

    @property
    def num_pairs(self) -> int:
        return len(self.pair_index)

    @property
    def num_vars(self) -> int:
        return self.num_pairs + (len(self.quad_index) if self.quad_index else 0)

    def pairs(self):
        return sorted(self.pair_index, key=self.pair_index.get)


def _pair_map(n: int) -> dict:
    return {pair: k for k, pair in enumerate(combinations(range(n), 2))}


def select_triples(g: Graph, policy: str):
    """Vertex triples receiving LM + SOC constraints.

    ALL uses every triple; TWO_EDGE keeps triples in which at least two of
    the three pairs are graph edges, the minimum preserving the rounding
    matching guarantee.
    """
    if policy == ALL:
        return list(combinations(range(g.n), 3))
    if policy != TWO_EDGE:
        raise ValidationError(f"unknown triple policy {policy!r}")
    nbr = g.neighbors()
    triples = set()
    for j in range(g.n):
        for i, k in combinations(sorted(nbr[j]), 2):
            triples.add(tuple(sorted((i, j, k))))
    return sorted(triples)


def select_quadruples(g: Graph, policy: str):
    if policy == ALL:
        return list(combinations(range(g.n), 4))
    if policy != TWO_EDGE:
        raise ValidationError(f"unknown quadruple policy {policy!r}")
    edge_pairs = g.edge_pairs()
    quads = []
    for quad in combinations(range(g.n), 4):
        inside = sum(1 for p in combinations(quad, 2) if p in edge_pairs)
        if inside >= 2:
            quads.append(quad)
    return quads


def pt_soc_params():
    """Constant data (A, c, d) of the triple SOC constraint.

    For the ordered triple i < j < k with variables (x_ij, x_ik, x_jk),
    ||A x + b|| <= c.x + d with b = 0 expresses the Parekh-Thompson
    quadratic whenever the LM upper bound holds; d = 1 (the printed d = 0
    makes the fully-symmetric product point infeasible).
    """
    A = np.array([[-1.0, -1.0, 2.0], [_SQRT3, -_SQRT3, 0.0]]) / 3.0
    c = np.array([-1.0, -1.0, -1.0]) / 3.0
    return A, c, 1.0


class _RowBuilder:
    def __init__(self, num_vars):
        self.num_vars = num_vars
        self.rows = []
        self.cols = []
        self.vals = []
        self.b = []
        self.nrows = 0

    def add_row(self, coeffs: dict, rhs: float):
        for col, val in coeffs.items():
            if val != 0.0:
                self.rows.append(self.nrows)
                self.cols.append(col)
                self.vals.append(val)
        self.b.append(rhs)
        self.nrows += 1

    def matrix(self):
        A = sp.coo_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.nrows, self.num_vars)
        ).tocsr()
        return A, np.array(self.b)


def _base_rows(g: Graph, triples, num_vars, pair_index):
    """Nonneg rows (bounds, LM) and SOC blocks shared by every model level."""
    nn = _RowBuilder(num_vars)
    for pair in combinations(range(g.n), 2):
        k = pair_index[pair]
        nn.add_row({k: 1.0}, 1.0)    # x <= 1
        nn.add_row({k: -1.0}, 1.0)   # x >= -1
    for (i, j, k) in triples:
        cols = (pair_index[(i, j)], pair_index[(i, k)], pair_index[(j, k)])
        nn.add_row({c: 1.0 for c in cols}, 3.0)    # x_ij + x_ik + x_jk <= 3
        nn.add_row({c: -1.0 for c in cols}, 0.0)   # ... >= 0
    soc = _RowBuilder(num_vars)
    A_t, c_t, d_t = pt_soc_params()
    for (i, j, k) in triples:
        cols = (pair_index[(i, j)], pair_index[(i, k)], pair_index[(j, k)])
        soc.add_row({col: -c_t[m] for m, col in enumerate(cols)}, d_t)
        for r in range(2):
            soc.add_row({col: -A_t[r, m] for m, col in enumerate(cols)}, 0.0)
    return nn, soc


def _objective(g: Graph, num_vars, pair_index):
    c = np.zeros(num_vars)
    for i, j, w in g.edges:
        c[pair_index[(i, j)]] += 2.0 * w
    return c, -g.total_weight


def build_soc_model(g: Graph, triple_policy: str = ALL):
    """SOC relaxation: box bounds, LM rows, and one SOC block per triple."""
    if g.n < 2:
        raise ValidationError("relaxation needs at least 2 vertices")
    pair_index = _pair_map(g.n)
    num_vars = len(pair_index)
    triples = select_triples(g, triple_policy)
    nn, soc = _base_rows(g, triples, num_vars, pair_index)
    c, offset = _objective(g, num_vars, pair_index)

    A_nn, b_nn = nn.matrix()
    A_soc, b_soc = soc.matrix()
    A = sp.vstack([A_nn, A_soc], format="csr")
    b = np.concatenate([b_nn, b_soc])
    cones = [Cone(NONNEG, nn.nrows)] + [Cone(SOC, 3) for _ in triples]
    program = ConicProgram(c, A, b, cones, offset,
                           meta={"level": "soc", "triples": len(triples)})
    return program, VariableMap(g.n, pair_index)


def _pauli1_rows(g: Graph, num_vars, pair_index):
    """PSD slack rows: svec(M) with M_ii = 3 and M_ij = 2 x_ij - 1."""
    psd = _RowBuilder(num_vars)
    for i in range(g.n):
        psd.add_row({}, 3.0)
        for j in range(i + 1, g.n):
            psd.add_row({pair_index[(i, j)]: -2.0 * _SQRT2}, -_SQRT2)
    return psd


def build_pauli1_model(g: Graph, triple_policy: str = ALL):
    """SOC relaxation strengthened by the n x n Pauli level-1 moment matrix."""
    if g.n < 2:
        raise ValidationError("relaxation needs at least 2 vertices")
    pair_index = _pair_map(g.n)
    num_vars = len(pair_index)
    triples = select_triples(g, triple_policy)
    nn, soc = _base_rows(g, triples, num_vars, pair_index)
    psd = _pauli1_rows(g, num_vars, pair_index)
    c, offset = _objective(g, num_vars, pair_index)

    A_nn, b_nn = nn.matrix()
    A_soc, b_soc = soc.matrix()
    A_psd, b_psd = psd.matrix()
    A = sp.vstack([A_nn, A_soc, A_psd], format="csr")
    b = np.concatenate([b_nn, b_soc, b_psd])
    cones = ([Cone(NONNEG, nn.nrows)] + [Cone(SOC, 3) for _ in triples]
             + [Cone(PSD, g.n)])
    program = ConicProgram(c, A, b, cones, offset,
                           meta={"level": "soc-p1", "triples": len(triples)})
    return program, VariableMap(g.n, pair_index)


def _quad_symbol_columns(quad, pair_index, quad_index):
    """Column ids for the 6 local pairs and 3 pairing products of a quadruple."""
    a, b, c, d = quad
    local_pairs = [(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)]
    pair_cols = [pair_index[p] for p in local_pairs]
    prod_cols = [quad_index[(quad, m)] for m in range(3)]
    return pair_cols, prod_cols


def _fourbody_expressions():
    """Appendix-style block coefficients over (x12..x34, m0, m1, m2, const).

    Each expression is (pair_coeffs[6], prod_coeffs[3], constant).
    """
    s2, s3, s6 = math.sqrt(2.0), _SQRT3, math.sqrt(6.0)
    p4 = ([2.0] * 6, [1.0] * 3, -3.0)
    a00 = ([c * 2 / 3 for c in (2, 2, -2, 2, -2, -2)], [-2 / 3] * 3, 2.0)
    a01 = ([c * s2 / 3 for c in (-2, 1, -1, 1, -1, 2)],
           [4 * s2 / 3, -2 * s2 / 3, -2 * s2 / 3], 0.0)
    a02 = ([c * s6 / 3 for c in (0, -1, -1, 1, 1, 0)],
           [0.0, 2 * s6 / 3, -2 * s6 / 3], 0.0)
    a11 = ([c * 2 / 3 for c in (1, -2, 2, -2, 2, -1)],
           [2 / 3, -4 / 3, -4 / 3], 2.0)
    a12 = ([c * 2 / s3 for c in (0, -1, -1, 1, 1, 0)],
           [0.0, -2 / s3, 2 / s3], 0.0)
    a22 = ([-2.0, 0, 0, 0, 0, 2.0], [-2.0, 0.0, 0.0], 2.0)
    b0 = ([-1.0] * 6, [1.0] * 3, 3.0)
    b1 = ([2.0, -1.0, -1.0, -1.0, -1.0, 2.0], [-2.0, 1.0, 1.0], 0.0)
    b2 = ([0.0, -s3, s3, s3, -s3, 0.0], [0.0, s3, -s3], 0.0)
    return {"p4": p4, "a": [[a00, a01, a02], [a01, a11, a12], [a02, a12, a22]],
            "b": [b0, b1, b2]}


def build_fourbody_model(g: Graph, quad_policy: str = TWO_EDGE,
                         triple_policy: str = ALL):
    """SOC model plus 4-qubit marginal blocks on selected quadruples.

    Adds three product variables per quadruple and the partition blocks:
    a linear row ([4]), a 3x3 PSD block ([3,1]), and a 3-dim SOC Bloch
    block with its two sign rows ([2,2]).  Consistency across quadruples is
    mediated through the shared pair variables only.
    """
    if g.n < 4:
        raise ValidationError("four-body relaxation needs at least 4 vertices")
    pair_index = _pair_map(g.n)
    quads = select_quadruples(g, quad_policy)
    quad_index = {}
    for quad in quads:
        for m in range(3):
            quad_index[(quad, m)] = len(pair_index) + len(quad_index)
    num_vars = len(pair_index) + len(quad_index)
    triples = select_triples(g, triple_policy)
    nn, soc = _base_rows(g, triples, num_vars, pair_index)
    exprs = _fourbody_expressions()

    def add_expr(builder, cols6, cols3, expr, sign=1.0):
        pair_c, prod_c, const = expr
        coeffs = {}
        for col, v in zip(cols6, pair_c):
            coeffs[col] = coeffs.get(col, 0.0) - sign * v
        for col, v in zip(cols3, prod_c):
            coeffs[col] = coeffs.get(col, 0.0) - sign * v
        builder.add_row(coeffs, sign * const)

    psd31 = _RowBuilder(num_vars)
    for quad in quads:
        cols6, cols3 = _quad_symbol_columns(quad, pair_index, quad_index)
        # product variables are expectations of involutions: -1 <= m <= 1
        for col in cols3:
            nn.add_row({col: 1.0}, 1.0)
            nn.add_row({col: -1.0}, 1.0)
        add_expr(nn, cols6, cols3, exprs["p4"])                      # [4] >= 0
        b0, b1, b2 = exprs["b"]
        plus = ([u + v for u, v in zip(b0[0], b1[0])],
                [u + v for u, v in zip(b0[1], b1[1])], b0[2] + b1[2])
        minus = ([u - v for u, v in zip(b0[0], b1[0])],
                 [u - v for u, v in zip(b0[1], b1[1])], b0[2] - b1[2])
        add_expr(nn, cols6, cols3, plus)                             # b0+b1 >= 0
        add_expr(nn, cols6, cols3, minus)                            # b0-b1 >= 0
        for expr in (b0, b1, b2):                                    # [2,2] SOC
            add_expr(soc, cols6, cols3, expr)
        for r in range(3):                                           # [3,1] PSD
            for cidx in range(r, 3):
                scale = 1.0 if r == cidx else _SQRT2
                pair_c, prod_c, const = exprs["a"][r][cidx]
                add_expr(psd31, cols6, cols3,
                         ([scale * v for v in pair_c],
                          [scale * v for v in prod_c], scale * const))

    c, offset = _objective(g, num_vars, pair_index)
    A_nn, b_nn = nn.matrix()
    A_soc, b_soc = soc.matrix()
    A_psd, b_psd = psd31.matrix()
    A = sp.vstack([A_nn, A_soc, A_psd], format="csr")
    b = np.concatenate([b_nn, b_soc, b_psd])
    cones = ([Cone(NONNEG, nn.nrows)]
             + [Cone(SOC, 3) for _ in range(len(triples) + len(quads))]
             + [Cone(PSD, 3) for _ in quads])
    program = ConicProgram(c, A, b, cones, offset,
                           meta={"level": "soc-4", "triples": len(triples),
                                 "quads": len(quads)})
    return program, VariableMap(g.n, pair_index, quad_index)


def convert_energy(value: float, frm: ScalingConvention, to: ScalingConvention,
                   W: float) -> float:
    """Affine conversion between energy scalings; W is the total edge weight."""
    frm, to = ScalingConvention(frm), ScalingConvention(to)
    if frm == to:
        return value
    if frm == ScalingConvention.QMC_MIN and to == ScalingConvention.VARBENCH:
        return W + 4.0 * value
    return (value - W) / 4.0


# ---------------------------------------------------------------------------
# solving and solution container


@dataclass
class RelaxSolution:
    """Pairwise swap expectations of a solved relaxation.

    ``x`` is indexed by ``variable_map.pair_index``; the moment matrix ``M``
    is present for Pauli level-1 solves, ``x4`` for 4-body solves.
    """

    graph: Graph
    variable_map: VariableMap
    x: np.ndarray
    objective_varbench: float
    objective_qmc_min: float
    M: np.ndarray | None = None
    x4: dict | None = None
    solver_stats: dict = field(default_factory=dict)

    def x_of(self, i: int, j: int) -> float:
        return float(self.x[self.variable_map.pair_index[(min(i, j), max(i, j))]])

    def y_of(self, i: int, j: int) -> float:
        return 0.5 * (1.0 - self.x_of(i, j))

    @property
    def objective_qmc_max(self) -> float:
        return -self.objective_qmc_min

    def moment_matrix(self) -> np.ndarray:
        """M with M_ii = 3, M_ij = 2 x_ij - 1 evaluated at the solution."""
        n = self.graph.n
        M = 3.0 * np.eye(n)
        for (i, j), k in self.variable_map.pair_index.items():
            M[i, j] = M[j, i] = 2.0 * self.x[k] - 1.0
        return M

    def to_json_dict(self) -> dict:
        doc = {
            "n": self.graph.n,
            "objective": {
                "varbench": self.objective_varbench,
                "qmc_min": self.objective_qmc_min,
            },
            "x": [[i, j, float(self.x[k])]
                  for (i, j), k in sorted(self.variable_map.pair_index.items(),
                                          key=lambda kv: kv[1])],
            "solver": self.solver_stats,
        }
        if self.M is not None:
            doc["M"] = self.M.tolist()
        if self.x4 is not None:
            doc["x4"] = [[list(quad), m, v] for (quad, m), v in self.x4.items()]
        return doc


LEVELS = ("soc", "soc-p1", "soc-4")


def build_model(g: Graph, level: str, triple_policy: str = ALL,
                quad_policy: str = TWO_EDGE):
    if level == "soc":
        return build_soc_model(g, triple_policy)
    if level == "soc-p1":
        return build_pauli1_model(g, triple_policy)
    if level == "soc-4":
        return build_fourbody_model(g, quad_policy, triple_policy)
    raise ValidationError(f"unknown relaxation level {level!r}")


def solve_relaxation(g: Graph, level: str = "soc", triple_policy: str = ALL,
                     quad_policy: str = TWO_EDGE, tol: float = 1e-8,
                     max_iter: int = 200, method: str = "ipm",
                     verbose: bool = False) -> RelaxSolution:
    """Build and solve a relaxation, returning expectations and objectives."""
    program, vmap = build_model(g, level, triple_policy, quad_policy)
    sol = conic.solve(program, tol=tol, max_iter=max_iter, method=method,
                      verbose=verbose)
    if sol.status != conic.OPTIMAL:
        raise NumericalError(
            f"relaxation solve ended with status {sol.status} "
            f"(residuals {sol.residuals})"
        )
    x_pairs = sol.x[: vmap.num_pairs]
    obj_vb = float(sol.objective)
    result = RelaxSolution(
        graph=g,
        variable_map=vmap,
        x=np.asarray(x_pairs),
        objective_varbench=obj_vb,
        objective_qmc_min=convert_energy(obj_vb, ScalingConvention.VARBENCH,
                                         ScalingConvention.QMC_MIN,
                                         g.total_weight),
        solver_stats={
            "status": sol.status,
            "iterations": sol.iterations,
            "residuals": sol.residuals,
            "tol": tol,
            "method": method,
            "level": level,
        },
    )
    if level == "soc-p1":
        result.M = result.moment_matrix()
    if level == "soc-4" and vmap.quad_index:
        result.x4 = {key: float(sol.x[col]) for key, col in vmap.quad_index.items()}
    return result
