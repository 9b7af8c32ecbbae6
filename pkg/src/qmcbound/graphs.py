"""Weighted interaction graphs: lattice generators, random instances, disorder, I/O.

Vertices are 0-based integers.  Edges are stored canonically as ``(i, j, w)``
with ``i < j`` and ``w >= 0``; duplicates and self-loops are rejected.
Generators attach 2-D coordinates whenever a natural embedding exists so that
edge-value heatmaps can be produced downstream.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EdgeListParseError, ValidationError

Edge = tuple[int, int, float]

_SQRT3 = math.sqrt(3.0)


class ScalingConvention(str, enum.Enum):
    """Energy scaling conventions for the same interaction graph.

    QMC_MIN:  minimize -1/2 sum_e w_e (1 - x_e), the quantum Max Cut
              Hamiltonian written as a minimization.
    VARBENCH: traceless convention, H = sum_e w_e (XX + YY + ZZ)_e.

    The two are related affinely through the total weight W = sum_e w_e:
    E_VARBENCH = W + 4 * E_QMC_MIN.
    """

    QMC_MIN = "qmc_min"
    VARBENCH = "varbench"


@dataclass
class Graph:
    """Weighted interaction graph with optional vertex coordinates.

    ``edges`` is canonicalized on construction: endpoints are ordered
    ``i < j``, the list is sorted lexicographically, and self-loops,
    duplicate pairs, negative weights, or out-of-range vertices raise
    :class:`ValidationError`.
    """

    n: int
    edges: list[Edge]
    coords: list[tuple[float, float]] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        canonical = []
        for i, j, w in self.edges:
            i, j = int(i), int(j)
            w = float(w)
            if i > j:
                i, j = j, i
            if i == j:
                raise ValidationError(f"self-loop on vertex {i}")
            if not (0 <= i < j < self.n):
                raise ValidationError(f"edge ({i},{j}) out of range for n={self.n}")
            if not w >= 0.0:
                raise ValidationError(f"negative weight {w} on edge ({i},{j})")
            canonical.append((i, j, w))
        canonical.sort()
        for (i1, j1, _), (i2, j2, _) in zip(canonical, canonical[1:]):
            if (i1, j1) == (i2, j2):
                raise ValidationError(f"duplicate edge ({i1},{j1})")
        self.edges = canonical
        if self.coords is not None:
            self.coords = [(float(x), float(y)) for x, y in self.coords]
            if len(self.coords) != self.n:
                raise ValidationError(
                    f"coords has {len(self.coords)} entries for n={self.n}"
                )

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self) -> list[set[int]]:
        nbr = [set() for _ in range(self.n)]
        for i, j, _ in self.edges:
            nbr[i].add(j)
            nbr[j].add(i)
        return nbr

    def edge_pairs(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.edges}


# ---------------------------------------------------------------------------
# generators


def gen_square(L: int, periodic: bool = True) -> Graph:
    """L x L square lattice with unit weights and grid coordinates.

    Periodic boundaries wrap both directions; wrap edges that coincide with
    existing ones (L = 2) collapse to a single canonical edge.
    """
    if L < 2:
        raise ValidationError(f"square lattice needs L >= 2, got {L}")
    pairs = set()
    for r in range(L):
        for c in range(L):
            v = r * L + c
            if periodic or c + 1 < L:
                u = r * L + (c + 1) % L
                if u != v:
                    pairs.add((min(v, u), max(v, u)))
            if periodic or r + 1 < L:
                u = ((r + 1) % L) * L + c
                if u != v:
                    pairs.add((min(v, u), max(v, u)))
    edges = [(i, j, 1.0) for i, j in sorted(pairs)]
    coords = [(float(c), float(r)) for r in range(L) for c in range(L)]
    meta = {"family": "square", "L": L, "periodic": periodic}
    return Graph(L * L, edges, coords, meta)


def gen_kagome(cx: int, cy: int, periodic: bool = True) -> Graph:
    """Kagome lattice: 3-site basis on a cx x cy triangular Bravais lattice.

    Under periodic boundaries every site has coordination 4, so |E| = 2n.
    Cells too small for distinct wrap edges (e.g. 1 x 1) raise.
    """
    if cx < 1 or cy < 1:
        raise ValidationError(f"kagome needs cx, cy >= 1, got {cx}, {cy}")
    a1 = (1.0, 0.0)
    a2 = (0.5, _SQRT3 / 2.0)
    basis = [(0.0, 0.0), (0.5, 0.0), (0.25, _SQRT3 / 4.0)]  # A, B, C

    def vid(r, s, t):
        return 3 * ((r % cx) * cy + (s % cy)) + t

    def in_range(r, s):
        return 0 <= r < cx and 0 <= s < cy

    pairs = set()

    def add(r1, s1, t1, r2, s2, t2):
        if not periodic and not (in_range(r1, s1) and in_range(r2, s2)):
            return
        u, v = vid(r1, s1, t1), vid(r2, s2, t2)
        if u == v:
            raise ValidationError(
                f"kagome cell {cx}x{cy} too small: wrap edge degenerates"
            )
        key = (min(u, v), max(u, v))
        if key in pairs:
            raise ValidationError(
                f"kagome cell {cx}x{cy} too small: duplicate edge {key}"
            )
        pairs.add(key)

    for r in range(cx):
        for s in range(cy):
            # up triangle within the cell
            add(r, s, 0, r, s, 1)
            add(r, s, 0, r, s, 2)
            add(r, s, 1, r, s, 2)
            # down triangle shared with neighboring cells
            add(r, s, 1, r + 1, s, 0)
            add(r, s, 1, r + 1, s - 1, 2)
            add(r + 1, s, 0, r + 1, s - 1, 2)

    n = 3 * cx * cy
    coords = [None] * n
    for r in range(cx):
        for s in range(cy):
            ox = r * a1[0] + s * a2[0]
            oy = r * a1[1] + s * a2[1]
            for t, (bx, by) in enumerate(basis):
                coords[vid(r, s, t)] = (ox + bx, oy + by)
    edges = [(i, j, 1.0) for i, j in sorted(pairs)]
    meta = {"family": "kagome", "cx": cx, "cy": cy, "periodic": periodic}
    return Graph(n, edges, coords, meta)


def gen_shastry_sutherland(L: int, J: float, J_D: float) -> Graph:
    """Periodic L x L grid with weight J plus alternating diagonals of weight J_D.

    Diagonals sit on the checkerboard faces with orientation alternating by
    row, so every vertex touches exactly one diagonal; L must be even.
    """
    if L < 2 or L % 2 != 0:
        raise ValidationError(f"Shastry-Sutherland pattern needs even L >= 2, got {L}")
    if J < 0 or J_D < 0:
        raise ValidationError("couplings J and J_D must be nonnegative")

    def vid(r, c):
        return (r % L) * L + (c % L)

    edges = []
    for r in range(L):
        for c in range(L):
            v = vid(r, c)
            edges.append((v, vid(r, c + 1), float(J)))
            edges.append((v, vid(r + 1, c), float(J)))
    for r in range(L):
        for c in range(L):
            if (r + c) % 2 != 0:
                continue
            if r % 2 == 0:
                edges.append((vid(r, c), vid(r + 1, c + 1), float(J_D)))
            else:
                edges.append((vid(r + 1, c), vid(r, c + 1), float(J_D)))
    coords = [(float(c), float(r)) for r in range(L) for c in range(L)]
    meta = {"family": "shastry_sutherland", "L": L, "J": float(J), "J_D": float(J_D)}
    return Graph(L * L, edges, coords, meta)


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each unordered pair is an edge with probability p, unit weight."""
    if n < 2:
        raise ValidationError(f"Erdos-Renyi needs n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"edge probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    draws = rng.random(len(pairs))
    edges = [(i, j, 1.0) for (i, j), u in zip(pairs, draws) if u < p]
    meta = {"family": "erdos_renyi", "n": n, "p": float(p), "seed": int(seed)}
    return Graph(n, edges, None, meta)


def apply_disorder(g: Graph, sigma: float, seed: int) -> Graph:
    """Multiply every nonzero weight by (1 + sigma*X) with X standard normal.

    Draws that would make a weight negative are rejected and resampled, so
    the output distribution is the conditioned normal; the resample count is
    recorded in ``meta['disorder_resamples']``.
    """
    if sigma < 0:
        raise ValidationError(f"disorder strength must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    resamples = 0
    edges = []
    for i, j, w in g.edges:
        if sigma == 0.0 or w == 0.0:
            edges.append((i, j, w))
            continue
        while True:
            scaled = w * (1.0 + sigma * rng.standard_normal())
            if scaled >= 0.0:
                break
            resamples += 1
        edges.append((i, j, scaled))
    meta = dict(g.meta)
    meta.update(
        {"disorder_sigma": float(sigma), "disorder_seed": int(seed),
         "disorder_resamples": resamples}
    )
    return Graph(g.n, edges, g.coords, meta)


# ---------------------------------------------------------------------------
# persistence


def save_edgelist(g: Graph, path) -> None:
    """Write lines ``i j w``; comments and coordinates are not preserved."""
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j, w in g.edges:
            fh.write(f"{i} {j} {w:.17g}\n")


def load_edgelist(path) -> Graph:
    """Read the text edge-list format: ``i j w`` per line, ``#`` comments.

    Rows are canonicalized (``1 0 2.0`` becomes edge (0, 1, 2.0)); the vertex
    count is the maximum index + 1 unless a ``# n=...`` header is present.
    """
    edges = []
    n_header = None
    max_v = -1
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    try:
                        n_header = int(body[2:])
                    except ValueError:
                        pass
                continue
            parts = line.split()
            if len(parts) != 3:
                raise EdgeListParseError(path, line_no, f"expected 'i j w', got {line!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError as exc:
                raise EdgeListParseError(path, line_no, str(exc)) from exc
            if w < 0:
                raise EdgeListParseError(path, line_no, f"negative weight {w}")
            if i == j:
                raise EdgeListParseError(path, line_no, f"self-loop on vertex {i}")
            edges.append((min(i, j), max(i, j), w))
            max_v = max(max_v, i, j)
    n = n_header if n_header is not None else max_v + 1
    if n < 1:
        raise ValidationError(f"edge list {path} defines no vertices")
    return Graph(n, edges, None, {"source": str(path)})


def save_instance(g: Graph, path) -> None:
    """Write the instance JSON: name, n, edges, optional coords, meta."""
    doc = {
        "name": g.meta.get("name") or g.meta.get("family", "instance"),
        "n": g.n,
        "edges": [[i, j, w] for i, j, w in g.edges],
        "meta": g.meta,
    }
    if g.coords is not None:
        doc["coords"] = [[x, y] for x, y in g.coords]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_instance(path) -> Graph:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        n = int(doc["n"])
        edges = [(int(i), int(j), float(w)) for i, j, w in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed instance JSON {path}: {exc}") from exc
    coords = doc.get("coords")
    if coords is not None:
        coords = [(float(x), float(y)) for x, y in coords]
    meta = doc.get("meta", {})
    if "name" in doc and "name" not in meta:
        meta = {**meta, "name": doc["name"]}
    return Graph(n, edges, coords, meta)
