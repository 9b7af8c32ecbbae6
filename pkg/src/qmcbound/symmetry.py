"""Symmetric-group machinery for unitary-invariant k-body operators.

Provides Young orthogonal irreps, exact characters and Schur dimensions,
the Weingarten function, reconstruction of an invariant operator from its
permutation expectations, and the block-positivity oracle: a unitary
invariant operator A is PSD iff sum_sigma <sigma> R_lambda(sigma) is PSD
for every partition lambda of k with height <= d.

Permutations are tuples ``p`` with ``p[i]`` the image of ``i`` (0-based);
cycles in docstrings and helpers use 0-based labels as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations as _itperms

import numpy as np

from .errors import ValidationError

Perm = tuple[int, ...]
Partition = tuple[int, ...]

_SQRT3 = math.sqrt(3.0)

# ---------------------------------------------------------------------------
# permutations


def identity_perm(k: int) -> Perm:
    return tuple(range(k))


def compose(p: Perm, q: Perm) -> Perm:
    """p after q: (p*q)(i) = p(q(i))."""
    return tuple(p[q[i]] for i in range(len(p)))


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def perm_from_cycles(k: int, *cycles) -> Perm:
    """Build a permutation of {0..k-1} from disjoint cycles, e.g. (0,1,2)."""
    img = list(range(k))
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + type(cyc)((cyc[0],))):
            img[a] = b
    return tuple(img)


def cycles_of(p: Perm) -> list[tuple[int, ...]]:
    """Disjoint cycles (including fixed points), each starting at its minimum."""
    seen = [False] * len(p)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        nxt = p[start]
        while nxt != start:
            cyc.append(nxt)
            seen[nxt] = True
            nxt = p[nxt]
        out.append(tuple(cyc))
    return out


def cycle_type(p: Perm) -> Partition:
    return tuple(sorted((len(c) for c in cycles_of(p)), reverse=True))


def perm_sign(p: Perm) -> int:
    return (-1) ** (len(p) - len(cycles_of(p)))


@lru_cache(maxsize=None)
def all_perms(k: int) -> tuple[Perm, ...]:
    return tuple(sorted(_itperms(range(k))))


def permutation_matrix(p: Perm, d: int) -> np.ndarray:
    """Dense matrix of T(p) on (C^d)^{tensor k}: |v_1..v_k> -> |v_{p^{-1}(1)}..>."""
    k = len(p)
    dim = d**k
    idx = np.arange(dim)
    digits = np.empty((k, dim), dtype=np.int64)
    rem = idx
    for axis in range(k - 1, -1, -1):
        digits[axis] = rem % d
        rem = rem // d
    pinv = inverse(p)
    new_digits = digits[list(pinv), :]
    new_idx = np.zeros(dim, dtype=np.int64)
    for axis in range(k):
        new_idx = new_idx * d + new_digits[axis]
    T = np.zeros((dim, dim))
    T[new_idx, idx] = 1.0
    return T


# ---------------------------------------------------------------------------
# partitions, tableaux, characters


def partitions_of(k: int) -> list[Partition]:
    """All partitions of k in descending lexicographic order."""
    out = []

    def rec(remaining, maxpart, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(remaining, maxpart), 0, -1):
            rec(remaining - part, part, prefix + [part])

    rec(k, k, [])
    return out


def check_partition(lam: Partition) -> Partition:
    lam = tuple(int(x) for x in lam)
    if not lam or any(x <= 0 for x in lam):
        raise ValidationError(f"invalid partition {lam}")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValidationError(f"partition parts must be weakly decreasing: {lam}")
    return lam


def partition_height(lam: Partition) -> int:
    return len(lam)


def conjugate_partition(lam: Partition) -> Partition:
    return tuple(sum(1 for part in lam if part > i) for i in range(lam[0]))


@lru_cache(maxsize=None)
def standard_tableaux(lam: Partition) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Standard Young tableaux of shape lam, entries 0..k-1, last-letter order.

    The order sorts by the row of k-1, then k-2, ... with lower rows first;
    this matches the basis used in printed orthogonal-representation tables.
    """
    lam = check_partition(lam)
    k = sum(lam)
    results = []

    def rec(filled_rows, value):
        if value == k:
            results.append(tuple(tuple(row) for row in filled_rows))
            return
        for r in range(len(lam)):
            row_len = len(filled_rows[r])
            if row_len >= lam[r]:
                continue
            if r > 0 and len(filled_rows[r - 1]) <= row_len:
                continue
            filled_rows[r].append(value)
            rec(filled_rows, value + 1)
            filled_rows[r].pop()

    rec([[] for _ in lam], 0)

    def row_of(tab, value):
        for r, row in enumerate(tab):
            if value in row:
                return r
        raise AssertionError

    def key(tab):
        return tuple(-row_of(tab, m) for m in range(k - 1, -1, -1))

    results.sort(key=key)
    return tuple(results)


@lru_cache(maxsize=None)
def _content_of(lam: Partition) -> dict:
    # content (col - row) of every cell, keyed by tableau entry position
    return {
        (r, c): c - r for r, part in enumerate(lam) for c in range(part)
    }


def _positions(tab):
    pos = {}
    for r, row in enumerate(tab):
        for c, v in enumerate(row):
            pos[v] = (r, c)
    return pos


@lru_cache(maxsize=None)
def _yor_adjacent(lam: Partition, m: int) -> np.ndarray:
    """Young orthogonal matrix of the adjacent transposition (m, m+1)."""
    tabs = standard_tableaux(lam)
    index = {tab: i for i, tab in enumerate(tabs)}
    dim = len(tabs)
    R = np.zeros((dim, dim))
    for i, tab in enumerate(tabs):
        pos = _positions(tab)
        (r1, c1) = pos[m]
        (r2, c2) = pos[m + 1]
        rho = (c2 - r2) - (c1 - r1)  # axial distance
        R[i, i] = 1.0 / rho
        if abs(rho) > 1:
            swapped = tuple(
                tuple(m + 1 if v == m else m if v == m + 1 else v for v in row)
                for row in tab
            )
            j = index[swapped]
            if j > i:
                off = math.sqrt(1.0 - 1.0 / (rho * rho))
                R[i, j] = off
                R[j, i] = off
    return R


def _adjacent_word(p: Perm) -> list[int]:
    """Positions m with p = s_{m_r} ... s_{m_1} (rightmost applied first)."""
    word = []
    q = list(p)
    changed = True
    while changed:
        changed = False
        for i in range(len(q) - 1):
            if q[i] > q[i + 1]:
                q[i], q[i + 1] = q[i + 1], q[i]
                word.append(i)
                changed = True
    return word


@lru_cache(maxsize=None)
def young_orthogonal_irrep(lam: Partition, sigma: Perm) -> np.ndarray:
    """Orthogonal irrep matrix R_lam(sigma) in Young's orthogonal form."""
    lam = check_partition(lam)
    k = sum(lam)
    if len(sigma) != k:
        raise ValidationError(f"permutation length {len(sigma)} != |{lam}| = {k}")
    if k > 8:
        raise ValidationError("young_orthogonal_irrep supports k <= 8")
    dim = len(standard_tableaux(lam))
    R = np.eye(dim)
    # sorting word: sigma * s_{w_1} * ... * s_{w_r} = id, so
    # sigma = s_{w_r} * ... * s_{w_1} and R(sigma) = R(s_{w_r}) ... R(s_{w_1})
    for m in reversed(_adjacent_word(sigma)):
        R = R @ _yor_adjacent(lam, m)
    return R


def irrep_dimension(lam: Partition) -> int:
    return len(standard_tableaux(lam))


@lru_cache(maxsize=None)
def character(lam: Partition, mu: Partition) -> int:
    """Exact character chi_lam on the class of cycle type mu (Murnaghan-Nakayama)."""
    lam = check_partition(lam)
    mu = tuple(sorted((int(x) for x in mu), reverse=True))
    if sum(lam) != sum(mu):
        raise ValidationError(f"|{lam}| != |{mu}|")
    return _mn(lam, mu)


def _mn(lam: Partition, mu: Partition) -> int:
    if not mu:
        return 1
    ell = mu[0]
    rest = mu[1:]
    # beta-set formulation: removing a border strip of length ell moves one
    # first-column hook length down by ell
    r = len(lam)
    beta = [lam[i] + (r - 1 - i) for i in range(r)]
    beta_set = set(beta)
    total = 0
    for idx, b in enumerate(beta):
        nb = b - ell
        if nb < 0 or nb in beta_set:
            continue
        new_beta = sorted((x for x in beta if x != b), reverse=True)
        # height of the strip = number of beta entries strictly between nb and b
        height = sum(1 for x in beta if nb < x < b)
        new_beta.append(nb)
        new_beta.sort(reverse=True)
        # convert beta-set back to a partition
        m = len(new_beta)
        new_lam = tuple(
            new_beta[i] - (m - 1 - i) for i in range(m) if new_beta[i] - (m - 1 - i) > 0
        )
        total += (-1) ** height * _mn(new_lam, rest)
    return total


def schur_dimension(lam: Partition, d: int) -> int:
    """Dimension of the GL(d) irrep lam via the hook-content formula."""
    lam = check_partition(lam)
    if partition_height(lam) > d:
        return 0
    conj = conjugate_partition(lam)
    value = Fraction(1)
    for r, part in enumerate(lam):
        for c in range(part):
            hook = (part - c) + (conj[c] - r) - 1
            value *= Fraction(d + c - r, hook)
    assert value.denominator == 1
    return int(value)


@lru_cache(maxsize=None)
def _weingarten_exact(mu: Partition, d: int) -> Fraction:
    k = sum(mu)
    kfact = math.factorial(k)
    total = Fraction(0)
    for lam in partitions_of(k):
        if partition_height(lam) > d:
            continue
        f_lam = character(lam, (1,) * k)
        total += Fraction(f_lam * f_lam, schur_dimension(lam, d)) * character(lam, mu)
    return total / (kfact * kfact)


def weingarten(cycle_type_mu: Partition, d: int) -> float:
    """Weingarten function Wg(pi, d) as a function of the cycle type of pi."""
    mu = tuple(sorted((int(x) for x in cycle_type_mu), reverse=True))
    return float(_weingarten_exact(mu, d))


# ---------------------------------------------------------------------------
# invariant operators


@dataclass
class InvariantOperator:
    """Expectations <sigma> = tr(sigma A) of a unitary-invariant k-body operator.

    ``expect`` maps every permutation of S_k to a real number.  For operators
    with real matrix entries (the QMC case) <sigma> = <sigma^{-1}>.  The
    trace of A equals ``expect[identity]``; ``normalized`` marks the
    trace-one convention used by state-hood checks.
    """

    k: int
    d: int
    expect: dict[Perm, float]
    normalized: bool = True

    def __post_init__(self):
        perms = all_perms(self.k)
        missing = [p for p in perms if p not in self.expect]
        if missing:
            raise ValidationError(
                f"expectations missing for {len(missing)} permutations of S_{self.k}"
            )

    @property
    def trace(self) -> float:
        return self.expect[identity_perm(self.k)]

    def realness_defect(self) -> float:
        return max(
            abs(self.expect[p] - self.expect[inverse(p)]) for p in all_perms(self.k)
        )


def operator_from_matrix(A: np.ndarray, k: int, d: int) -> InvariantOperator:
    """Expectations tr(T(sigma) A) of an explicit d^k x d^k matrix."""
    expect = {}
    for p in all_perms(k):
        expect[p] = float(np.trace(permutation_matrix(p, d) @ A).real)
    return InvariantOperator(k, d, expect)


def reconstruct_operator(op: InvariantOperator) -> np.ndarray:
    """The unique invariant matrix with the given expectations.

    Uses A = sum_pi a_pi T(pi) with
    a_pi = sum_sigma tr(sigma^{-1} A) Wg(pi^{-1} sigma, d).
    """
    dim = op.d**op.k
    if dim > 4096:
        raise ValidationError(f"d^k = {dim} exceeds the 4096 materialization cap")
    perms = all_perms(op.k)
    A = np.zeros((dim, dim))
    for pi in perms:
        pi_inv = inverse(pi)
        a_pi = sum(
            op.expect[inverse(sig)] * weingarten(cycle_type(compose(pi_inv, sig)), op.d)
            for sig in perms
        )
        A += a_pi * permutation_matrix(pi, op.d)
    return A


def positivity_blocks(op: InvariantOperator) -> list[tuple[Partition, np.ndarray]]:
    """Blocks sum_sigma <sigma> R_lam(sigma) for lam of k with height <= d.

    The operator is PSD iff every block is PSD; blocks are real symmetric
    whenever <sigma> = <sigma^{-1}>.
    """
    blocks = []
    for lam in partitions_of(op.k):
        if partition_height(lam) > op.d:
            continue
        dim = irrep_dimension(lam)
        B = np.zeros((dim, dim))
        for sig in all_perms(op.k):
            B += op.expect[sig] * young_orthogonal_irrep(lam, sig)
        blocks.append((lam, B))
    return blocks


def is_state(op: InvariantOperator, tol: float = 1e-9) -> bool:
    """True iff the expectations come from a trace-one PSD operator.

    The trace is checked, never assumed: there are non-normalized operators
    whose pair expectations pass all block inequalities.
    """
    if abs(op.trace - 1.0) > tol:
        return False
    for _, B in positivity_blocks(op):
        if B.shape == (1, 1):
            if B[0, 0] < -tol:
                return False
        elif np.linalg.eigvalsh(0.5 * (B + B.T)).min() < -tol:
            return False
    return True


# ---------------------------------------------------------------------------
# three qubits: Eggeling-Werner coordinates, Lieb-Mattis / Parekh-Thompson


@dataclass
class EWParams:
    """Expectations of the invariant-basis operators of a tripartite state.

    For a real trace-one qubit operator r_minus = r3 = 0 and
    r_plus + r0 = 1.  Convention: x = <(01)>, y = <(02)>, z = <(12)>.
    """

    r_plus: float
    r_minus: float
    r0: float
    r1: float
    r2: float
    r3: float


def ew_params(x12: float, x13: float, x23: float) -> EWParams:
    r_plus = (x12 + x13 + x23) / 3.0
    return EWParams(
        r_plus=r_plus,
        r_minus=0.0,
        r0=1.0 - r_plus,
        r1=(2.0 * x23 - x12 - x13) / 3.0,
        r2=(x12 - x13) / _SQRT3,
        r3=0.0,
    )


def check_lm_pt(x: float, y: float, z: float, tol: float = 1e-12) -> bool:
    """Exact three-qubit statehood test for a real invariant trace-one operator.

    LM: 0 <= x + y + z <= 3;
    PT: (x^2+y^2+z^2) - 2(xy+xz+yz) + 2(x+y+z) <= 3.
    """
    s = x + y + z
    if s < -tol or s > 3.0 + tol:
        return False
    quad = (x * x + y * y + z * z) - 2.0 * (x * y + x * z + y * z) + 2.0 * s
    return quad <= 3.0 + tol


# ---------------------------------------------------------------------------
# four qubits: expectation completion and block formulas

_PAIRS4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_PAIRINGS4 = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def _pair_idx(a, b):
    return _PAIRS4.index((min(a, b), max(a, b)))


def _pairing_idx(p1, p2):
    key = tuple(sorted((tuple(sorted(p1)), tuple(sorted(p2)))))
    for m, (q1, q2) in enumerate(_PAIRINGS4):
        if key == (q1, q2):
            return m
    raise AssertionError(key)


def derive_full_s4(x_pairs, x_products) -> InvariantOperator:
    """Populate all 24 expectations of S_4 on qubits from pairs and products.

    ``x_pairs`` is ordered by the lexicographic pairs (01),(02),(03),(12),
    (13),(23); ``x_products`` by the pairings (01)(23),(02)(13),(03)(12).
    Three-cycles follow from the qubit identity
    <(abc)> = (x_ab + x_ac + x_bc - 1)/2 and four-cycles from
    2<(abcd)> = -1 + x_ac + x_bd + x_{ab,cd} + x_{ad,bc} - x_{ac,bd}.
    """
    x_pairs = [float(v) for v in x_pairs]
    x_products = [float(v) for v in x_products]
    if len(x_pairs) != 6 or len(x_products) != 3:
        raise ValidationError("need 6 pair and 3 product expectations")
    expect = {}
    for p in all_perms(4):
        cyc = sorted(cycles_of(p), key=len, reverse=True)
        lengths = tuple(len(c) for c in cyc)
        if lengths == (1, 1, 1, 1):
            expect[p] = 1.0
        elif lengths == (2, 1, 1):
            a, b = cyc[0]
            expect[p] = x_pairs[_pair_idx(a, b)]
        elif lengths == (2, 2):
            expect[p] = x_products[_pairing_idx(cyc[0], cyc[1])]
        elif lengths == (3, 1):
            a, b, c = cyc[0]
            expect[p] = 0.5 * (
                x_pairs[_pair_idx(a, b)]
                + x_pairs[_pair_idx(a, c)]
                + x_pairs[_pair_idx(b, c)]
                - 1.0
            )
        else:  # 4-cycle (a b c d)
            a, b, c, d = cyc[0]
            expect[p] = 0.5 * (
                -1.0
                + x_pairs[_pair_idx(a, c)]
                + x_pairs[_pair_idx(b, d)]
                + x_products[_pairing_idx((a, b), (c, d))]
                + x_products[_pairing_idx((a, d), (b, c))]
                - x_products[_pairing_idx((a, c), (b, d))]
            )
    return InvariantOperator(4, 2, expect)


def fourqubit_blocks(x_pairs, x_products):
    """Evaluate the printed four-qubit block conditions.

    Returns ``(p4, A, (b0, b1, b2))``: the scalar partition-[4] form, the
    3x3 partition-[3,1] matrix, and the partition-[2,2] Bloch triple with
    statehood requiring p4 >= 0, A PSD, and b1^2 + b2^2 <= b0^2 with
    b0 +- b1 >= 0.
    """
    x12, x13, x14, x23, x24, x34 = (float(v) for v in x_pairs)
    m0, m1, m2 = (float(v) for v in x_products)

    p4 = -3.0 + 2.0 * (x12 + x13 + x14 + x23 + x24 + x34) + m0 + m1 + m2

    a00 = (2.0 / 3.0) * (
        3.0 + 2.0 * (x12 + x13 - x14 + x23 - x24 - x34) - m0 - m1 - m2
    )
    a01 = (math.sqrt(2.0) / 3.0) * (
        -2.0 * x12 + x13 - x14 + x23 - x24 + 2.0 * x34 + 4.0 * m0 - 2.0 * m1 - 2.0 * m2
    )
    a02 = (math.sqrt(6.0) / 3.0) * (-x13 - x14 + x23 + x24 + 2.0 * m1 - 2.0 * m2)
    a11 = (2.0 / 3.0) * (
        3.0 + x12 - x34 + 2.0 * x24 - 2.0 * x13 + 2.0 * x14 - 2.0 * x23
        + m0 - 2.0 * m1 - 2.0 * m2
    )
    a12 = (2.0 / _SQRT3) * (-x13 - x14 + x23 + x24 - m1 + m2)
    a22 = 2.0 * (1.0 - x12 - m0 + x34)
    A = np.array([[a00, a01, a02], [a01, a11, a12], [a02, a12, a22]])

    b00 = 3.0 + x12 - 2.0 * x13 - 2.0 * x14 - 2.0 * x23 - 2.0 * x24 + x34 \
        - m0 + 2.0 * m1 + 2.0 * m2
    b01 = _SQRT3 * (-x13 + x14 + x23 - x24 + m1 - m2)
    b11 = 3.0 * (1.0 - x12 - x34 + m0)
    b0 = 0.5 * (b00 + b11)
    b1 = 0.5 * (b00 - b11)
    b2 = b01
    return p4, A, (b0, b1, b2)


def fourqubit_blocks_feasible(x_pairs, x_products, tol: float = 1e-9) -> bool:
    p4, A, (b0, b1, b2) = fourqubit_blocks(x_pairs, x_products)
    if p4 < -tol:
        return False
    if np.linalg.eigvalsh(A).min() < -tol:
        return False
    if b0 + b1 < -tol or b0 - b1 < -tol:
        return False
    return b1 * b1 + b2 * b2 <= b0 * b0 + tol * max(1.0, abs(b0))
