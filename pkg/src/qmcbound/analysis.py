"""Analytical and empirical studies: ratio LP, random-graph and lattice sweeps.

The worst-case approximation ratio of the rounding scheme is the value of a
small LP over adversarial edge-mass fractions (alpha, beta, gamma) on the
high / adjacent / far edge classes.  Sweeps pair relaxation objectives with
exact diagonalization wherever the qubit count allows and emit flat records
suitable for CSV/JSON serialization; figure rendering is out of scope.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import conic
from .conic import Cone, ConicProgram, NONNEG, ZERO
from .errors import NumericalError, ValidationError
from .exact import LANCZOS_CAP, ground_energy
from .graphs import Graph, ScalingConvention, apply_disorder, gen_erdos_renyi, \
    gen_shastry_sutherland
from .model import RelaxSolution, solve_relaxation
from .rounding import F, t_prime


@dataclass
class RatioLP:
    """Data and solution of the worst-case-ratio LP at threshold t."""

    t: float
    F_t: float
    F_tprime: float
    t_coefficient: float
    r: float
    alpha: float
    beta: float
    gamma: float


def _ratio_lp(t: float) -> RatioLP:
    if not 0.75 < t <= 1.0:
        raise ValidationError(f"ratio LP needs t in (3/4, 1], got {t}")
    tp = t_prime(t)
    f_t = F(t)
    f_tp = F(tp)
    # Singlet-state bound per edge class: 1 on S; exactly 1/4 on T where
    # y_e <= t', hence ratio >= 1/(4 t'); F(t) on U.  The product-state
    # bound is 0.498 / F(t') / F(t).  The 1/(4 t') coefficient (rather than
    # the looser 1/4) is what yields the reported ratio at t = 0.771.
    t_coef = 1.0 / (4.0 * tp)
    # variables (alpha, beta, gamma, s): minimize s
    c = np.array([0.0, 0.0, 0.0, 1.0])
    rows = [
        ([1.0, 1.0, 1.0, 0.0], 1.0),          # zero cone: alpha+beta+gamma = 1
        ([0.498, f_tp, f_t, -1.0], 0.0),       # product bound <= s
        ([1.0, t_coef, f_t, -1.0], 0.0),       # singlet bound <= s
        ([-1.0, 0.0, 0.0, 0.0], 0.0),
        ([0.0, -1.0, 0.0, 0.0], 0.0),
        ([0.0, 0.0, -1.0, 0.0], 0.0),
    ]
    A = sp.csr_matrix(np.array([r for r, _ in rows]))
    b = np.array([rhs for _, rhs in rows])
    program = ConicProgram(c, A, b, [Cone(ZERO, 1), Cone(NONNEG, 5)])
    sol = conic.solve(program, tol=1e-10)
    if sol.status != conic.OPTIMAL:
        raise NumericalError(f"ratio LP solve failed with status {sol.status}")
    alpha, beta, gamma, s = sol.x
    return RatioLP(t, f_t, f_tp, t_coef, float(s), float(alpha), float(beta),
                   float(gamma))


def approx_ratio_lp(t: float) -> float:
    """Worst-case ratio r(t) of the rounding scheme at threshold t."""
    return _ratio_lp(t).r


# ---------------------------------------------------------------------------
# Erdos-Renyi ratio study


@dataclass
class ERStudyResult:
    n: int
    p: float
    relaxation: str
    seeds: list
    ratios: list
    redraws: int = 0

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def std_ratio(self) -> float:
        return float(np.std(self.ratios))


def run_er_study(n: int, p: float, instances: int, relaxation: str = "soc",
                 seed: int = 0, tol: float = 1e-8) -> ERStudyResult:
    """Mean relaxation/exact ratio over random G(n, p) instances.

    Both energies are VarBench (negative), so ratios are >= 1 and larger
    means a looser bound.  Instances with empty edge sets are redrawn.
    """
    if n > 20:
        raise ValidationError(f"exact diagonalization study capped at n = 20, got {n}")
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"need 0 < p <= 1, got {p}")
    ratios = []
    seeds = []
    redraws = 0
    next_seed = seed
    while len(ratios) < instances:
        g = gen_erdos_renyi(n, p, next_seed)
        used = next_seed
        next_seed += 1
        if not g.edges:
            redraws += 1
            continue
        relax = solve_relaxation(g, level=relaxation, tol=tol)
        exact = ground_energy(g)
        ratios.append(relax.objective_varbench / exact)
        seeds.append(used)
    return ERStudyResult(n, p, relaxation, seeds, ratios, redraws)


# ---------------------------------------------------------------------------
# Shastry-Sutherland sweeps


@dataclass
class SweepResult:
    """Per-grid-point relaxation and exact objectives (VarBench scaling)."""

    points: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        cols = ["jratio", "seed", "soc", "soc_p1", "ed"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for pt in self.points:
                writer.writerow([pt.get(c) for c in cols])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"points": self.points, "meta": self.meta}, fh, indent=1)
            fh.write("\n")


def run_ss_sweep(L: int, ratios, sigma: float = 0.0, seed: int = 0,
                 instances: int = 1, with_p1: bool = True,
                 with_ed: bool | None = None, tol: float = 1e-8,
                 keep_edge_values: bool = False) -> SweepResult:
    """Sweep J/J_D at fixed J_D = 1 on the L x L Shastry-Sutherland lattice.

    For sigma > 0 every grid point is averaged over ``instances`` disorder
    draws with per-point seeds derived from ``seed``.  Exact energies are
    attached when L^2 fits the Lanczos cap (or per ``with_ed``).
    """
    if with_ed is None:
        with_ed = L * L <= 20
    if with_ed and L * L > LANCZOS_CAP:
        raise ValidationError(f"exact energies need L^2 <= {LANCZOS_CAP}")
    result = SweepResult(meta={
        "L": L, "sigma": sigma, "seed": seed, "instances": instances,
        "tol": tol, "scaling": "varbench",
    })
    instance_seed = seed
    for jr in ratios:
        base = gen_shastry_sutherland(L, float(jr), 1.0)
        for _ in range(instances):
            g = base
            used = None
            if sigma > 0:
                used = instance_seed
                g = apply_disorder(base, sigma, instance_seed)
                instance_seed += 1
            point = {"jratio": float(jr), "seed": used}
            soc = solve_relaxation(g, level="soc", tol=tol)
            point["soc"] = soc.objective_varbench
            if with_p1:
                point["soc_p1"] = solve_relaxation(
                    g, level="soc-p1", tol=tol).objective_varbench
            if with_ed:
                point["ed"] = ground_energy(g)
            if keep_edge_values:
                point["edge_x"] = [[i, j, w, soc.x_of(i, j)] for i, j, w in g.edges]
            result.points.append(point)
    return result


def emit_heatmap(sol_or_values, g: Graph, path) -> None:
    """CSV rows ``i, j, w, x_ij, xi, yi, xj, yj`` plus a color-scale sidecar.

    Accepts a RelaxSolution or a {(i, j): x} mapping; requires coordinates.
    The sidecar JSON documents the convention x = -1 -> blue (singlet-like),
    x = +1 -> red.
    """
    if g.coords is None:
        raise ValidationError("heatmap output needs vertex coordinates")
    if isinstance(sol_or_values, RelaxSolution):
        values = {(i, j): sol_or_values.x_of(i, j) for i, j, _ in g.edges}
    else:
        values = {(min(i, j), max(i, j)): v for (i, j), v in sol_or_values.items()}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "w", "x_ij", "xi", "yi", "xj", "yj"])
        for i, j, w in g.edges:
            xi, yi = g.coords[i]
            xj, yj = g.coords[j]
            writer.writerow([i, j, w, values[(i, j)], xi, yi, xj, yj])
    meta_path = str(path) + ".meta.json"
    with open(meta_path, "w") as fh:
        json.dump({
            "color_scale": {"x=-1": "blue (singlet-like)", "x=+1": "red"},
            "columns": ["i", "j", "w", "x_ij", "xi", "yi", "xj", "yj"],
        }, fh, indent=1)
        fh.write("\n")
