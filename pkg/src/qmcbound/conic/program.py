"""Standard-form conic programs over zero, nonnegative, second-order, and PSD cones.

Canonical form:  minimize c'x  subject to  A x + s = b,  s in K,
where K is the product of the listed cones in row order.  PSD blocks are
stored in scaled symmetric vectorization (svec): row-major upper triangle
with off-diagonal entries multiplied by sqrt(2), so every cone shares the
standard inner product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidProgramError

_SQRT2 = math.sqrt(2.0)

ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
PSD = "psd"


@dataclass(frozen=True)
class Cone:
    """One cone block.  ``size`` is the row count, except PSD where it is the
    matrix order (the block then occupies size*(size+1)/2 rows in svec form)."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in (ZERO, NONNEG, SOC, PSD):
            raise InvalidProgramError(f"unknown cone kind {self.kind!r}")
        if self.size < 1:
            raise InvalidProgramError(f"cone size must be >= 1, got {self.size}")
        if self.kind == SOC and self.size < 2:
            raise InvalidProgramError("SOC blocks need dimension >= 2")

    @property
    def dim(self) -> int:
        return self.size * (self.size + 1) // 2 if self.kind == PSD else self.size


def svec_dim(order: int) -> int:
    return order * (order + 1) // 2


def svec(M: np.ndarray) -> np.ndarray:
    """Scaled upper-triangle vectorization (off-diagonals times sqrt(2))."""
    s = M.shape[0]
    out = np.empty(svec_dim(s))
    k = 0
    for i in range(s):
        out[k] = M[i, i]
        k += 1
        for j in range(i + 1, s):
            out[k] = _SQRT2 * M[i, j]
            k += 1
    return out


def smat(v: np.ndarray, order: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    M = np.empty((order, order))
    k = 0
    for i in range(order):
        M[i, i] = v[k]
        k += 1
        for j in range(i + 1, order):
            M[i, j] = M[j, i] = v[k] / _SQRT2
            k += 1
    return M


def svec_index(order: int, i: int, j: int) -> int:
    """Position of entry (i, j), i <= j, inside the svec of an order x order block."""
    if i > j:
        i, j = j, i
    return i * order - i * (i - 1) // 2 + (j - i)


@dataclass
class ConicProgram:
    """min c'x  s.t.  A x + s = b,  s in the product of ``cones`` (row order)."""

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: list[Cone]
    objective_offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        if not sp.issparse(self.A):
            self.A = sp.csr_matrix(np.atleast_2d(np.asarray(self.A, dtype=float)))
        else:
            self.A = self.A.tocsr()
        m = sum(cone.dim for cone in self.cones)
        if self.A.shape != (m, self.c.size):
            raise InvalidProgramError(
                f"A has shape {self.A.shape}, expected ({m}, {self.c.size})"
            )
        if self.b.size != m:
            raise InvalidProgramError(f"b has {self.b.size} rows, expected {m}")

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    def cone_slices(self) -> list[tuple[Cone, slice]]:
        out = []
        offset = 0
        for cone in self.cones:
            out.append((cone, slice(offset, offset + cone.dim)))
            offset += cone.dim
        return out

    def to_json(self, path=None):
        doc = {
            "c": self.c.tolist(),
            "b": self.b.tolist(),
            "A": {
                "shape": list(self.A.shape),
                "rows": self.A.tocoo().row.tolist(),
                "cols": self.A.tocoo().col.tolist(),
                "vals": self.A.tocoo().data.tolist(),
            },
            "cones": [[cone.kind, cone.size] for cone in self.cones],
            "objective_offset": self.objective_offset,
        }
        if path is None:
            return json.dumps(doc)
        with open(path, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")
        return None

    @classmethod
    def from_json(cls, source):
        doc = json.loads(source) if isinstance(source, str) else json.load(source)
        A = sp.coo_matrix(
            (doc["A"]["vals"], (doc["A"]["rows"], doc["A"]["cols"])),
            shape=tuple(doc["A"]["shape"]),
        ).tocsr()
        return cls(
            c=np.array(doc["c"], dtype=float),
            A=A,
            b=np.array(doc["b"], dtype=float),
            cones=[Cone(kind, size) for kind, size in doc["cones"]],
            objective_offset=float(doc.get("objective_offset", 0.0)),
        )


def _block_violation(cone: Cone, s: np.ndarray, tol: float) -> float:
    if cone.kind == ZERO:
        return float(np.abs(s).max(initial=0.0))
    if cone.kind == NONNEG:
        return float(max(0.0, -(s.min(initial=0.0))))
    if cone.kind == SOC:
        return float(max(0.0, np.linalg.norm(s[1:]) - s[0]))
    # PSD: attempt a Cholesky factorization with a diagonal tolerance shift;
    # fall back to the minimum eigenvalue only to quantify the violation.
    M = smat(s, cone.size)
    M = 0.5 * (M + M.T)
    try:
        np.linalg.cholesky(M + tol * np.eye(cone.size))
        return 0.0
    except np.linalg.LinAlgError:
        return float(max(0.0, -np.linalg.eigvalsh(M).min()))


def check_point(program: ConicProgram, x: np.ndarray, tol: float = 1e-8) -> dict:
    """Report per-cone violations of ``A x + s = b`` with ``s in K`` at ``x``.

    Returns ``{"max_violation", "blocks": [{kind, index, violation}, ...]}``.
    SOC checks are constant-time per block; PSD blocks use an attempted
    Cholesky factorization.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != program.num_vars:
        raise InvalidProgramError(
            f"point has {x.size} entries, program has {program.num_vars} variables"
        )
    s = program.b - program.A @ x
    blocks = []
    for index, (cone, sl) in enumerate(program.cone_slices()):
        violation = _block_violation(cone, s[sl], tol)
        blocks.append({"kind": cone.kind, "index": index, "violation": violation})
    max_violation = max((blk["violation"] for blk in blocks), default=0.0)
    return {"max_violation": max_violation, "blocks": blocks}
