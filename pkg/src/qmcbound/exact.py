"""Exact-diagonalization oracle for QMC/Heisenberg ground-state energies.

Works in the VarBench scaling H = sum_e w_e (XX + YY + ZZ)_e internally and
converts on output.  H commutes with total Z, so the spectrum splits into
magnetization sectors indexed by the up-spin count; the global spin-flip
maps sector k to n - k, so only k <= n/2 is diagonalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError, ValidationError
from .graphs import Graph, ScalingConvention
from .model import convert_energy

DENSE_CAP = 12
LANCZOS_CAP = 24
_DENSE_SECTOR_CUTOFF = 600  # below this dimension ARPACK gains nothing


def _sector_states(n: int, nup: int) -> np.ndarray:
    """All n-bit integers with popcount nup, ascending (so searchsorted works)."""
    states = []
    for positions in combinations(range(n), nup):
        v = 0
        for p in positions:
            v |= 1 << p
        states.append(v)
    return np.array(sorted(states), dtype=np.int64)


def _sector_matrix(g: Graph, states: np.ndarray) -> sp.csr_matrix:
    """VarBench Hamiltonian restricted to one magnetization sector."""
    dim = states.size
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    idx = np.arange(dim)
    for i, j, w in g.edges:
        if w == 0.0:
            continue
        bi = (states >> i) & 1
        bj = (states >> j) & 1
        zz = 1.0 - 2.0 * np.bitwise_xor(bi, bj)
        diag += w * zz
        mask = bi != bj
        if mask.any():
            flipped = states[mask] ^ ((1 << i) | (1 << j))
            partner = np.searchsorted(states, flipped)
            rows.extend(idx[mask].tolist())
            cols.extend(partner.tolist())
            vals.extend([2.0 * w] * int(mask.sum()))
    H = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    H = H + sp.diags(diag)
    return H


def _sector_min_eig(H: sp.csr_matrix, method: str, tol: float) -> float:
    dim = H.shape[0]
    if dim == 1:
        return float(H[0, 0])
    if method == "dense" or dim <= _DENSE_SECTOR_CUTOFF:
        return float(np.linalg.eigvalsh(H.toarray()).min())
    try:
        vals = spla.eigsh(H, k=1, which="SA", tol=tol, maxiter=max(5000, 40 * dim))[0]
    except spla.ArpackNoConvergence as exc:
        raise NumericalError(f"Lanczos did not converge on a {dim}-dim sector") from exc
    return float(vals[0])


def ground_energy(g: Graph, scaling: ScalingConvention = ScalingConvention.VARBENCH,
                  method: str = "auto", sectors: bool = True,
                  tol: float = 1e-9) -> float:
    """Minimum eigenvalue of the interaction Hamiltonian on ``g``.

    ``method`` is ``dense`` (n <= 12), ``lanczos`` (n <= 24), or ``auto``.
    With ``sectors`` the minimum is taken over magnetization sectors; the
    full-space diagonalization is kept for cross-checks at small n.
    """
    if method == "auto":
        method = "dense" if g.n <= DENSE_CAP else "lanczos"
    if method not in ("dense", "lanczos"):
        raise ValidationError(f"unknown ED method {method!r}")
    cap = DENSE_CAP if method == "dense" else LANCZOS_CAP
    if g.n > cap:
        raise ValidationError(f"method {method} supports n <= {cap}, got {g.n}")

    if not sectors:
        states = np.arange(2**g.n, dtype=np.int64)
        H = _sector_matrix(g, states)
        e0 = _sector_min_eig(H, method, tol)
    else:
        e0 = np.inf
        for nup in range(g.n // 2 + 1):
            states = _sector_states(g.n, nup)
            H = _sector_matrix(g, states)
            e0 = min(e0, _sector_min_eig(H, method, tol))
    return convert_energy(e0, ScalingConvention.VARBENCH, scaling, g.total_weight)


# ---------------------------------------------------------------------------
# closed-form energies of product/singlet ansatz states


@dataclass
class BlochAssignment:
    """Per-vertex state: either a unit Bloch vector or membership in a singlet.

    ``matching`` lists disjoint vertex pairs placed in singlet states;
    every vertex outside the matching must carry a unit 3-vector.
    """

    n: int
    vectors: dict = field(default_factory=dict)
    matching: list = field(default_factory=list)

    def __post_init__(self):
        matched = set()
        pairs = []
        for i, j in self.matching:
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if i in matched or j in matched or i == j:
                raise ValidationError("matching pairs must be disjoint")
            if not (0 <= i < j < self.n):
                raise ValidationError(f"matched pair ({i},{j}) out of range")
            matched.update((i, j))
            pairs.append((i, j))
        self.matching = pairs
        self._matched = matched
        for v in range(self.n):
            if v in matched:
                continue
            if v not in self.vectors:
                raise ValidationError(f"vertex {v} has neither vector nor partner")
            vec = np.asarray(self.vectors[v], dtype=float).ravel()
            if vec.size != 3:
                raise ValidationError(f"Bloch vector of vertex {v} is not 3-dim")
            if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
                raise ValidationError(f"Bloch vector of vertex {v} is not unit norm")
            self.vectors[v] = vec

    def is_matched(self, v: int) -> bool:
        return v in self._matched


def state_energy(g: Graph, assignment: BlochAssignment,
                 scaling: ScalingConvention = ScalingConvention.VARBENCH) -> float:
    """Exact energy of a product-of-Bloch-vectors-and-singlets state.

    Per edge (QMC maximization value, weight 1): 1 on a matched singlet
    edge, 1/4 if an endpoint sits inside some singlet the edge does not
    match, and (1 - theta_i . theta_j)/4 between two unmatched vertices.
    No 2^n vectors are built.
    """
    if assignment.n != g.n:
        raise ValidationError("assignment size differs from graph size")
    matching = set(assignment.matching)
    qmc_max = 0.0
    for i, j, w in g.edges:
        if (i, j) in matching:
            qmc_max += w
        elif assignment.is_matched(i) or assignment.is_matched(j):
            qmc_max += 0.25 * w
        else:
            qmc_max += 0.25 * w * (1.0 - assignment.vectors[i] @ assignment.vectors[j])
    return convert_energy(-qmc_max, ScalingConvention.QMC_MIN, scaling,
                          g.total_weight)
