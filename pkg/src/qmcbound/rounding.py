"""Rounding of relaxation solutions into product/singlet states.

Thresholding the relaxed edge values y_e = (1 - x_e)/2 above t > 3/4 gives
a matching of singlet edges; the remaining vertices receive Bloch vectors
from a Gaussian projection of the Gram vectors of the level-1 moment
matrix.  Deterministic expectations of both candidate states are computed
in closed form; sampling only exhibits explicit states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (InconsistentSolutionError, NumericalError,
                     ValidationError)
from .exact import BlochAssignment, state_energy
from .graphs import Graph, ScalingConvention
from .model import RelaxSolution

_8_9PI = 8.0 / (9.0 * math.pi)
_8_3PI = 8.0 / (3.0 * math.pi)


def hyp2f1_half(z: float) -> float:
    """Gauss hypergeometric 2F1(1/2, 1/2; 5/2; z) on [0, 1] to ~1e-13.

    Direct power series for z <= 1/2; the z -> 1-z connection formula
    otherwise (the direct series decays only like m^-5/2 near z = 1):
    2F1(1/2,1/2;5/2;z) = (3 pi/8) 2F1(1/2,1/2;-1/2;1-z)
                          + (1-z)^{3/2} 2F1(2,2;5/2;1-z).
    """
    if not -1e-12 <= z <= 1.0 + 1e-12:
        raise ValidationError(f"hyp2f1_half needs z in [0, 1], got {z}")
    z = min(max(z, 0.0), 1.0)
    if z <= 0.5:
        return _series(0.5, 0.5, 2.5, z)
    w = 1.0 - z
    return (3.0 * math.pi / 8.0) * _series(0.5, 0.5, -0.5, w) \
        + w**1.5 * _series(2.0, 2.0, 2.5, w)


def _series(a: float, b: float, c: float, z: float, tol: float = 1e-16) -> float:
    term = 1.0
    total = 1.0
    for m in range(0, 400):
        term *= (a + m) * (b + m) / ((c + m) * (m + 1.0)) * z
        total += term
        if abs(term) < tol * max(1.0, abs(total)):
            return total
    raise NumericalError("hypergeometric series did not converge")


def F(x: float, formula: str = "corrected") -> float:
    """Rounding ratio function on (0, 1].

    ``corrected`` (default) multiplies the hypergeometric term by (1 - 4x),
    which reproduces F(1/4) = 1, F(1) = 1/2, and min ~ 0.498; ``printed``
    keeps the factor out and is retained only for comparison (it violates
    the F >= 0.498 bound).
    """
    if not 0.0 < x <= 1.0:
        raise ValidationError(f"F needs x in (0, 1], got {x}")
    q = 1.0 - 4.0 * x
    h = hyp2f1_half(q * q / 9.0)
    if formula == "corrected":
        return (1.0 - _8_9PI * q * h) / (4.0 * x)
    if formula == "printed":
        return (1.0 - _8_9PI * h) / (4.0 * x)
    raise ValidationError(f"unknown F formula {formula!r}")


def expected_edge_value(m_ij: float) -> float:
    """E over the Gaussian projection of the unit-weight QMC-max edge value.

    Equals y F(y) with y = (1 - m_ij)/4 for y > 0, but stays defined on the
    whole moment-entry range |m_ij| <= 3 through the correlation rho = m/3:
    value = (1 - (8/3pi) rho 2F1(1/2,1/2;5/2;rho^2)) / 4.
    """
    if abs(m_ij) > 3.0 + 1e-9:
        raise ValidationError(f"moment entry must satisfy |M_ij| <= 3, got {m_ij}")
    rho = min(max(m_ij / 3.0, -1.0), 1.0)
    return 0.25 * (1.0 - _8_3PI * rho * hyp2f1_half(rho * rho))


def t_prime(t: float) -> float:
    """Cap on the relaxed value of an edge adjacent to one with y >= t >= 3/4."""
    if not 0.75 <= t <= 1.0:
        raise ValidationError(f"t_prime needs t in [3/4, 1], got {t}")
    return 0.25 * (3.0 - 2.0 * t + 2.0 * math.sqrt(3.0) * math.sqrt(t - t * t))


def extract_matching(sol: RelaxSolution, g: Graph, t: float):
    """Edge classes S (y > t, a matching), T (adjacent to S), U (the rest).

    Feasible solutions of a model containing every two-edge triple cannot
    place two adjacent edges above t > 3/4; if the input does, it is
    rejected rather than repaired.
    """
    if not t > 0.75:
        raise ValidationError(f"threshold must exceed 3/4, got {t}")
    S = [(i, j) for i, j, _ in g.edges if sol.y_of(i, j) > t]
    touched = set()
    for i, j in S:
        if i in touched or j in touched:
            raise InconsistentSolutionError(
                f"edges above t={t} do not form a matching; "
                "the input solution is infeasible or over-tolerant"
            )
        touched.update((i, j))
    classes = {}
    for i, j, _ in g.edges:
        if (i, j) in set(S):
            classes[(i, j)] = "S"
        elif i in touched or j in touched:
            classes[(i, j)] = "T"
        else:
            classes[(i, j)] = "U"
    return S, classes


def gram_vectors(M: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Rows v_i with <v_i, v_j> = M_ij, via eigendecomposition with clamping.

    Solver output is PSD only to tolerance, so eigenvalues in [-tol, 0) are
    clamped to zero; anything below -tol raises.  Row norms are sqrt(3)
    when M_ii = 3.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("moment matrix must be square")
    if np.abs(M - M.T).max() > 1e-8:
        raise ValidationError("moment matrix must be symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    if vals.min() < -tol:
        raise NumericalError(
            f"moment matrix is not PSD: min eigenvalue {vals.min():.3e}"
        )
    vals = np.maximum(vals, 0.0)
    return vecs * np.sqrt(vals)


@dataclass
class RoundingResult:
    """Deterministic expectations and sampled energies, QMC-max scaling."""

    expected_energy_S: float
    expected_energy_prod: float
    relaxation_objective: float
    guarantee_ratio: float
    matching: list
    edge_classes: dict
    samples: int = 0
    best_sampled_energy: float | None = None
    best_assignment: BlochAssignment | None = None
    seed: int | None = None

    @property
    def expected_best(self) -> float:
        return max(self.expected_energy_S, self.expected_energy_prod)

    def to_json_dict(self) -> dict:
        doc = {
            "scaling": "qmc_max",
            "expected_energy_S": self.expected_energy_S,
            "expected_energy_prod": self.expected_energy_prod,
            "relaxation_objective": self.relaxation_objective,
            "guarantee_ratio": self.guarantee_ratio,
            "matching": [list(p) for p in self.matching],
            "edge_classes": [[i, j, cls] for (i, j), cls in
                             sorted(self.edge_classes.items())],
            "samples": self.samples,
            "seed": self.seed,
        }
        if self.best_sampled_energy is not None:
            doc["best_sampled_energy"] = self.best_sampled_energy
        if self.best_assignment is not None:
            doc["best_state"] = {
                "matching": [list(p) for p in self.best_assignment.matching],
                "bloch_vectors": {
                    str(v): vec.tolist()
                    for v, vec in sorted(self.best_assignment.vectors.items())
                },
            }
        return doc


def round_solution(sol: RelaxSolution, g: Graph, t: float = 0.771,
                   samples: int = 0, seed: int = 0) -> RoundingResult:
    """Round a level-1 solution into singlet + Bloch-vector product states.

    Requires the moment matrix (the guarantee applies to the SOC + Pauli
    level-1 relaxation only).  Expectations over the Gaussian projection
    are computed exactly; ``samples`` independent draws exhibit explicit
    states whose energies are evaluated in closed form.
    """
    if sol.M is None:
        raise ValidationError("rounding needs a solution carrying the moment matrix")
    M = sol.M
    matching, classes = extract_matching(sol, g, t)

    expected_prod = 0.0
    expected_S = 0.0
    relax_obj = 0.0
    for i, j, w in g.edges:
        ev = expected_edge_value(M[i, j])
        expected_prod += w * ev
        cls = classes[(i, j)]
        if cls == "S":
            expected_S += w
        elif cls == "T":
            expected_S += 0.25 * w
        else:
            expected_S += w * ev
        relax_obj += w * sol.y_of(i, j)

    expected_best = max(expected_S, expected_prod)
    ratio = expected_best / relax_obj if relax_obj > 1e-12 else 1.0

    result = RoundingResult(
        expected_energy_S=expected_S,
        expected_energy_prod=expected_prod,
        relaxation_objective=relax_obj,
        guarantee_ratio=ratio,
        matching=matching,
        edge_classes=classes,
        samples=samples,
        seed=seed if samples else None,
    )
    if samples <= 0:
        return result

    V = gram_vectors(M)
    matched = {v for pair in matching for v in pair}
    unmatched = [v for v in range(g.n) if v not in matched]
    best_energy = -math.inf
    best_assignment = None
    for child_seed in np.random.SeedSequence(seed).spawn(samples):
        rng = np.random.default_rng(child_seed)
        R = rng.standard_normal((3, V.shape[1]))
        thetas = {}
        for v in range(g.n):
            proj = R @ V[v]
            norm = np.linalg.norm(proj)
            thetas[v] = proj / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        with_singlets = BlochAssignment(
            g.n, {v: thetas[v] for v in unmatched}, list(matching))
        product_only = BlochAssignment(g.n, thetas, [])
        e_S = -state_energy(g, with_singlets, ScalingConvention.QMC_MIN)
        e_prod = -state_energy(g, product_only, ScalingConvention.QMC_MIN)
        if max(e_S, e_prod) > best_energy:
            best_energy = max(e_S, e_prod)
            best_assignment = with_singlets if e_S >= e_prod else product_only
    result.best_sampled_energy = best_energy
    result.best_assignment = best_assignment
    return result
