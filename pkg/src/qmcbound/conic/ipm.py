"""Homogeneous self-dual interior-point method with Nesterov-Todd scalings.

Solves  min c'x  s.t.  A x + s = b,  s in K  for K a product of zero,
nonnegative, second-order, and PSD cones.  Zero-cone rows are handled as
equality constraints with free multipliers; the remaining rows form
G x + s = h with s in the strictly-feasible part of the cone product.

The embedding tracks (x, y, z, s, tau, kappa); optimality corresponds to
tau > 0, primal/dual infeasibility to kappa > 0, and the tau/kappa ratio
drives the status decision (thresholds below).  Search directions come
from a Mehrotra predictor-corrector step; each step solves one KKT system
through the normal equations H = G' (W'W)^{-1} G with a single iterative
refinement pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import InvalidProgramError, NumericalError
from .program import NONNEG, PSD, SOC, ZERO, ConicProgram, smat, svec

OPTIMAL = "OPTIMAL"
PRIMAL_INFEASIBLE = "PRIMAL_INFEASIBLE"
DUAL_INFEASIBLE = "DUAL_INFEASIBLE"
NUMERICAL_LIMIT = "NUMERICAL_LIMIT"

_STEP = 0.99
_MIN_STEP = 1e-10
# declare infeasibility only when the certificate residual is this small
_INFEAS_TOL_FACTOR = 1.0
# and only once the embedding clearly favors kappa over tau
_TAU_KAPPA_RATIO = 1e3


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray
    z: np.ndarray
    objective: float
    residuals: dict
    iterations: int
    certificate: np.ndarray | None = None
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# cone layout and Nesterov-Todd scaling


class _Layout:
    """Index structure of the inequality cone vector (nonneg, SOC, PSD)."""

    def __init__(self, cones):
        nonneg_idx = []
        soc = []
        psd = []
        offset = 0
        for cone in cones:
            if cone.kind == NONNEG:
                nonneg_idx.extend(range(offset, offset + cone.size))
                offset += cone.size
            elif cone.kind == SOC:
                soc.append(slice(offset, offset + cone.size))
                offset += cone.size
            elif cone.kind == PSD:
                dim = cone.dim
                psd.append((slice(offset, offset + dim), cone.size))
                offset += dim
            else:  # pragma: no cover - zero cones are split off before this
                raise InvalidProgramError("zero cone inside inequality layout")
        self.dim = offset
        self.nonneg = np.array(nonneg_idx, dtype=np.intp)
        self.soc = soc
        self.psd = psd
        # barrier degree: one per nonneg row / SOC block, order per PSD block
        self.degree = len(nonneg_idx) + len(soc) + sum(order for _, order in psd)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[self.nonneg] = 1.0
        for sl in self.soc:
            e[sl.start] = 1.0
        for sl, order in self.psd:
            e[sl] = svec(np.eye(order))
        return e

    def min_spectral(self, u: np.ndarray) -> float:
        vals = [np.inf]
        if self.nonneg.size:
            vals.append(u[self.nonneg].min())
        for sl in self.soc:
            vals.append(u[sl.start] - np.linalg.norm(u[sl][1:]))
        for sl, order in self.psd:
            vals.append(np.linalg.eigvalsh(smat(u[sl], order)).min())
        return float(min(vals))

    def strictly_feasible(self, u: np.ndarray, margin: float = 0.0) -> bool:
        return self.min_spectral(u) > margin

    def max_step(self, u: np.ndarray, du: np.ndarray) -> float:
        """Largest t >= 0 with u + t du in the cone (u strictly feasible)."""
        t = np.inf
        if self.nonneg.size:
            un, dn = u[self.nonneg], du[self.nonneg]
            neg = dn < 0
            if neg.any():
                t = min(t, float((-un[neg] / dn[neg]).min()))
        for sl in self.soc:
            t = min(t, _soc_max_step(u[sl], du[sl]))
        for sl, order in self.psd:
            t = min(t, _psd_max_step(smat(u[sl], order), smat(du[sl], order)))
        return t


def _soc_max_step(u, du):
    u0, u1 = u[0], u[1:]
    d0, d1 = du[0], du[1:]
    # spectral map: g_-(t) = (u0 + t d0) - ||u1 + t d1|| is concave with
    # g_-(0) > 0; the exit time is its smallest positive root, which is a
    # root of the quadratic f = g_- g_+ with nonnegative first component.
    a = d0 * d0 - d1 @ d1
    bq = 2.0 * (u0 * d0 - u1 @ d1)
    cq = u0 * u0 - u1 @ u1
    roots = []
    if abs(a) < 1e-300:
        if bq < 0:
            roots.append(-cq / bq)
    else:
        disc = bq * bq - 4.0 * a * cq
        if disc >= 0:
            sq = math.sqrt(disc)
            roots.extend([(-bq - sq) / (2 * a), (-bq + sq) / (2 * a)])
    best = np.inf
    for t in roots:
        if t > 0 and u0 + t * d0 >= -1e-13 * (abs(u0) + 1.0):
            best = min(best, t)
    return best


def _psd_max_step(S, dS):
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return 0.0
    M = sla.solve_triangular(L, dS, lower=True)
    M = sla.solve_triangular(L, M.T, lower=True)
    m = np.linalg.eigvalsh(0.5 * (M + M.T)).min()
    return np.inf if m >= 0 else -1.0 / m


class _Scaling:
    """NT scaling W with lambda = W z = W^{-T} s per cone block."""

    def __init__(self, layout: _Layout, s: np.ndarray, z: np.ndarray):
        self.layout = layout
        self.lam = np.zeros(layout.dim)
        # nonneg: W = diag(sqrt(s/z))
        if layout.nonneg.size:
            sn, zn = s[layout.nonneg], z[layout.nonneg]
            self.d_nn = sn / zn
            self.lam[layout.nonneg] = np.sqrt(sn * zn)
        else:
            self.d_nn = np.zeros(0)
        # SOC: hyperbolic Householder representation
        self.soc_W = []
        self.soc_Winv = []
        for sl in layout.soc:
            sb, zb = s[sl], z[sl]
            zeta_s = sb[0] ** 2 - sb[1:] @ sb[1:]
            zeta_z = zb[0] ** 2 - zb[1:] @ zb[1:]
            if zeta_s <= 0 or zeta_z <= 0:
                raise NumericalError("SOC iterate left the cone interior")
            rs, rz = math.sqrt(zeta_s), math.sqrt(zeta_z)
            sbar, zbar = sb / rs, zb / rz
            gamma = math.sqrt((1.0 + sbar @ zbar) / 2.0)
            w = (sbar + _J(zbar)) / (2.0 * gamma)
            What = _hyperbolic_householder(w)
            eta = rs / rz
            W = math.sqrt(eta) * What
            Winv = _hyperbolic_householder(_J(w)) / math.sqrt(eta)
            self.soc_W.append(W)
            self.soc_Winv.append(Winv)
            self.lam[sl] = W @ zb
        # PSD: R from Cholesky factors of S and Z
        self.psd_R = []
        self.psd_Rinv = []
        self.psd_sigma = []
        self.psd_lamdiv = []
        for sl, order in layout.psd:
            S = smat(s[sl], order)
            Z = smat(z[sl], order)
            try:
                Ls = np.linalg.cholesky(0.5 * (S + S.T))
                Lz = np.linalg.cholesky(0.5 * (Z + Z.T))
            except np.linalg.LinAlgError as exc:
                raise NumericalError("PSD iterate left the cone interior") from exc
            U, sig, Vt = np.linalg.svd(Lz.T @ Ls)
            sqrt_sig = np.sqrt(sig)
            R = Ls @ Vt.T / sqrt_sig
            Rinv = (Lz @ U / sqrt_sig).T  # equals R^{-1}
            self.psd_R.append(R)
            self.psd_Rinv.append(Rinv)
            self.psd_sigma.append(sig)
            self.psd_lamdiv.append(_pairwise_means(sig))
            self.lam[sl] = svec(np.diag(sig))

    # -- block-wise linear maps -------------------------------------------

    def apply_W(self, v):
        """z-space to scaled space."""
        out = np.zeros_like(v)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = np.sqrt(self.d_nn) * v[lay.nonneg]
        for W, sl in zip(self.soc_W, lay.soc):
            out[sl] = W @ v[sl]
        for R, (sl, order) in zip(self.psd_R, lay.psd):
            out[sl] = svec(R.T @ smat(v[sl], order) @ R)
        return out

    def apply_WinvT(self, v):
        """s-space to scaled space (W^{-T} v)."""
        out = np.zeros_like(v)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = v[lay.nonneg] / np.sqrt(self.d_nn)
        for Winv, sl in zip(self.soc_Winv, lay.soc):
            out[sl] = Winv @ v[sl]
        for Rinv, (sl, order) in zip(self.psd_Rinv, lay.psd):
            out[sl] = svec(Rinv @ smat(v[sl], order) @ Rinv.T)
        return out

    def apply_Wt(self, v):
        out = np.zeros_like(v)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = np.sqrt(self.d_nn) * v[lay.nonneg]
        for W, sl in zip(self.soc_W, lay.soc):
            out[sl] = W @ v[sl]  # W symmetric
        for R, (sl, order) in zip(self.psd_R, lay.psd):
            out[sl] = svec(R @ smat(v[sl], order) @ R.T)
        return out

    def apply_W2(self, v):
        """W'W v (the scaling applied to dz inside the KKT system)."""
        out = np.zeros_like(v)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = self.d_nn * v[lay.nonneg]
        for W, sl in zip(self.soc_W, lay.soc):
            out[sl] = W @ (W @ v[sl])
        for R, (sl, order) in zip(self.psd_R, lay.psd):
            Lw = R @ R.T
            out[sl] = svec(Lw @ smat(v[sl], order) @ Lw)
        return out

    def w2inv_matrix(self) -> sp.csr_matrix:
        """(W'W)^{-1} as a sparse block-diagonal matrix for H assembly."""
        lay = self.layout
        rows, cols, vals = [], [], []
        if lay.nonneg.size:
            rows.extend(lay.nonneg.tolist())
            cols.extend(lay.nonneg.tolist())
            vals.extend((1.0 / self.d_nn).tolist())
        for Winv, sl in zip(self.soc_Winv, lay.soc):
            B = Winv @ Winv
            idx = np.arange(sl.start, sl.stop)
            rr, cc = np.meshgrid(idx, idx, indexing="ij")
            rows.extend(rr.ravel().tolist())
            cols.extend(cc.ravel().tolist())
            vals.extend(B.ravel().tolist())
        for Rinv, (sl, order) in zip(self.psd_Rinv, lay.psd):
            Lw_inv = Rinv.T @ Rinv
            dim = sl.stop - sl.start
            B = np.empty((dim, dim))
            basis = np.zeros(dim)
            for j in range(dim):
                basis[j] = 1.0
                B[:, j] = svec(Lw_inv @ smat(basis, order) @ Lw_inv)
                basis[j] = 0.0
            idx = np.arange(sl.start, sl.stop)
            rr, cc = np.meshgrid(idx, idx, indexing="ij")
            rows.extend(rr.ravel().tolist())
            cols.extend(cc.ravel().tolist())
            vals.extend(B.ravel().tolist())
        return sp.csr_matrix((vals, (rows, cols)), shape=(lay.dim, lay.dim))

    # -- Jordan algebra in scaled space ------------------------------------

    def jordan(self, u, v):
        out = np.zeros_like(u)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = u[lay.nonneg] * v[lay.nonneg]
        for sl in lay.soc:
            ub, vb = u[sl], v[sl]
            out[sl.start] = ub @ vb
            out[sl.start + 1 : sl.stop] = ub[0] * vb[1:] + vb[0] * ub[1:]
        for sl, order in lay.psd:
            U, V = smat(u[sl], order), smat(v[sl], order)
            out[sl] = svec(0.5 * (U @ V + V @ U))
        return out

    def lam_jordan_sq(self):
        return self.jordan(self.lam, self.lam)

    def lam_solve(self, dvec):
        """Solve lambda o u = d for u, block-wise."""
        out = np.zeros_like(dvec)
        lay = self.layout
        if lay.nonneg.size:
            out[lay.nonneg] = dvec[lay.nonneg] / self.lam[lay.nonneg]
        for sl in lay.soc:
            lb, db = self.lam[sl], dvec[sl]
            a, b1 = lb[0], lb[1:]
            denom = a * a - b1 @ b1
            v0 = (a * db[0] - b1 @ db[1:]) / denom
            out[sl.start] = v0
            out[sl.start + 1 : sl.stop] = (db[1:] - v0 * b1) / a
        for div, (sl, order) in zip(self.psd_lamdiv, lay.psd):
            out[sl] = dvec[sl] / div
        return out


def _J(v):
    out = -v.copy()
    out[0] = v[0]
    return out


def _hyperbolic_householder(w):
    k = w.size
    M = np.empty((k, k))
    M[0, 0] = w[0]
    M[0, 1:] = w[1:]
    M[1:, 0] = w[1:]
    M[1:, 1:] = np.eye(k - 1) + np.outer(w[1:], w[1:]) / (1.0 + w[0])
    return M


def _pairwise_means(sig):
    """svec-ordered array of (sigma_i + sigma_j)/2 for lambda-solve division."""
    order = sig.size
    out = np.empty(order * (order + 1) // 2)
    k = 0
    for i in range(order):
        for j in range(i, order):
            out[k] = 0.5 * (sig[i] + sig[j])
            k += 1
    return out


# ---------------------------------------------------------------------------
# KKT solver (normal equations with one refinement pass)


def _factor_spd(H, what):
    """Cholesky with escalating diagonal regularization relative to diag(H)."""
    n = H.shape[0]
    base = max(float(np.abs(np.diag(H)).max()), 1e-300)
    for reg in (0.0, 1e-14, 1e-11, 1e-8, 1e-5):
        try:
            return sla.cho_factor(H + (reg * base) * np.eye(n), lower=True)
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(f"{what} is not factorizable")


class _KKT:
    def __init__(self, Aeq, G, scaling_matrix, layout):
        self.Aeq = Aeq
        self.G = G
        self.Kinv = scaling_matrix
        self.layout = layout
        n = G.shape[1]
        H = (G.T @ self.Kinv @ G).toarray()
        H = 0.5 * (H + H.T)
        self.H_factor = _factor_spd(H, "KKT normal-equation matrix")
        self.p = Aeq.shape[0]
        if self.p:
            AHiAt = Aeq @ sla.cho_solve(self.H_factor, Aeq.toarray().T)
            AHiAt = 0.5 * (AHiAt + AHiAt.T)
            self.S_factor = _factor_spd(AHiAt, "KKT Schur complement")

    def _solve_once(self, bx, by, bz):
        rhs1 = bx + self.G.T @ (self.Kinv @ bz)
        if self.p:
            t = sla.cho_solve(self.H_factor, rhs1)
            uy = sla.cho_solve(self.S_factor, self.Aeq @ t - by)
            ux = sla.cho_solve(self.H_factor, rhs1 - self.Aeq.T @ uy)
        else:
            uy = np.zeros(0)
            ux = sla.cho_solve(self.H_factor, rhs1)
        uz = self.Kinv @ (self.G @ ux - bz)
        return ux, uy, uz

    def solve(self, scaling, bx, by, bz, refine=3):
        ux, uy, uz = self._solve_once(bx, by, bz)
        rhs_scale = max(
            1.0,
            float(np.linalg.norm(bx)),
            float(np.linalg.norm(by)) if by.size else 0.0,
            float(np.linalg.norm(bz)),
        )
        for _ in range(refine):
            r1 = bx - (self.Aeq.T @ uy + self.G.T @ uz)
            r2 = by - self.Aeq @ ux
            r3 = bz - (self.G @ ux - scaling.apply_W2(uz))
            res = math.sqrt(float(r1 @ r1) + float(r2 @ r2) + float(r3 @ r3))
            if res <= 1e-14 * rhs_scale:
                break
            dx, dy, dz = self._solve_once(r1, r2, r3)
            ux = ux + dx
            uy = uy + dy
            uz = uz + dz
        return ux, uy, uz


class _IdentityScaling:
    """Stand-in scaling (W = I) used for the initialization solves."""

    def apply_W2(self, v):
        return v


# ---------------------------------------------------------------------------
# main solver


def solve_ipm(program: ConicProgram, tol: float = 1e-8, max_iter: int = 200,
              verbose: bool = False, log_stream=None) -> ConicSolution:
    c = program.c
    n = program.num_vars
    full_rows = program.num_rows

    eq_rows, ineq_rows, ineq_cones = [], [], []
    offset = 0
    for cone in program.cones:
        idx = list(range(offset, offset + cone.dim))
        if cone.kind == ZERO:
            eq_rows.extend(idx)
        else:
            ineq_rows.extend(idx)
            ineq_cones.append(cone)
        offset += cone.dim
    eq_rows = np.array(eq_rows, dtype=np.intp)
    ineq_rows = np.array(ineq_rows, dtype=np.intp)
    if ineq_rows.size == 0:
        raise InvalidProgramError("program needs at least one non-zero cone row")

    A_csr = program.A
    Aeq = A_csr[eq_rows] if eq_rows.size else sp.csr_matrix((0, n))
    G = A_csr[ineq_rows]
    beq = program.b[eq_rows] if eq_rows.size else np.zeros(0)
    h = program.b[ineq_rows]
    layout = _Layout(ineq_cones)
    m = layout.dim
    e = layout.identity()
    nu = layout.degree + 1

    norm_b = max(1.0, math.sqrt(float(beq @ beq + h @ h)))
    norm_c = max(1.0, float(np.linalg.norm(c)))

    def log(msg):
        if verbose:
            print(msg, file=log_stream)

    # -- initialization: least-squares points shifted into the cone interior
    kkt0 = _KKT(Aeq, G, sp.identity(m, format="csr"), layout)
    ident = _IdentityScaling()
    x, _, z0 = kkt0.solve(ident, np.zeros(n), beq.copy(), h.copy(), refine=0)
    s = -z0
    shift = layout.min_spectral(s)
    if shift <= 1e-8 * (1.0 + float(np.linalg.norm(s))):
        s = s + (1.0 - shift) * e
    _, y, z = kkt0.solve(ident, -c, np.zeros(eq_rows.size), np.zeros(m), refine=0)
    shift = layout.min_spectral(z)
    if shift <= 1e-8 * (1.0 + float(np.linalg.norm(z))):
        z = z + (1.0 - shift) * e
    tau, kappa = 1.0, 1.0

    best = None
    history = []
    status = NUMERICAL_LIMIT
    certificate = None
    iterations = 0

    log(f"{'it':>3} {'pcost':>13} {'dcost':>13} {'gap':>9} {'pres':>9} "
        f"{'dres':>9} {'step':>7}")

    alpha = 0.0
    for iteration in range(max_iter):
        iterations = iteration
        # residuals of the self-dual system
        Aty = Aeq.T @ y if eq_rows.size else np.zeros(n)
        rx = Aty + G.T @ z + c * tau
        ry = -(Aeq @ x) + beq * tau if eq_rows.size else np.zeros(0)
        rz = -(G @ x) + h * tau - s
        ctx = float(c @ x)
        bty = float(beq @ y) if eq_rows.size else 0.0
        htz = float(h @ z)
        rtau = -ctx - bty - htz - kappa

        # convergence measures at the scaled point x/tau
        pcost = ctx / tau
        dcost = -(bty + htz) / tau
        gap = float(s @ z) / (tau * tau)
        pres = math.sqrt(float(ry @ ry + rz @ rz)) / tau / norm_b
        dres = float(np.linalg.norm(rx)) / tau / norm_c
        relgap = gap / max(1.0, abs(pcost))
        history.append((pcost, dcost, gap, pres, dres))
        log(f"{iteration:3d} {pcost:13.6e} {dcost:13.6e} {gap:9.2e} "
            f"{pres:9.2e} {dres:9.2e} {alpha:7.4f}")

        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, x / tau, _merge_dual(full_rows, eq_rows, ineq_rows,
                                                y / tau, z / tau),
                    pcost, {"primal": pres, "dual": dres, "gap": gap})
        if pres <= tol and dres <= tol and relgap <= tol:
            status = OPTIMAL
            break

        # infeasibility certificates: the homogeneous embedding drives
        # kappa/tau to infinity on infeasible problems, so gate on that
        # ratio and accept once the certificate residual is below tol
        if kappa / tau > _TAU_KAPPA_RATIO:
            if bty + htz < 0:
                pinf = float(np.linalg.norm(Aty + G.T @ z)) / (-(bty + htz)) / norm_c
                if pinf <= tol * _INFEAS_TOL_FACTOR:
                    scalef = -1.0 / (bty + htz)
                    certificate = _merge_dual(full_rows, eq_rows, ineq_rows,
                                              y * scalef, z * scalef)
                    status = PRIMAL_INFEASIBLE
                    break
            if ctx < 0:
                dres_cert = math.sqrt(
                    float((Aeq @ x) @ (Aeq @ x))
                    + float(np.linalg.norm(G @ x + s) ** 2)
                ) / (-ctx) / norm_b
                if dres_cert <= tol * _INFEAS_TOL_FACTOR:
                    certificate = x * (-1.0 / ctx)
                    status = DUAL_INFEASIBLE
                    break

        mu = (float(s @ z) + tau * kappa) / nu

        try:
            scaling = _Scaling(layout, s, z)
            kkt = _KKT(Aeq, G, scaling.w2inv_matrix(), layout)
        except NumericalError:
            break
        x1, y1, z1 = kkt.solve(scaling, -c, beq.copy(), h.copy())
        denom = kappa / tau - (float(c @ x1) + float(beq @ y1 if eq_rows.size else 0.0)
                               + float(h @ z1))

        lam_sq = scaling.lam_jordan_sq()

        def direction(eta, sigma, ds_vec, dtk):
            bx = -(1.0 - eta) * rx
            by = (1.0 - eta) * ry
            bz = (1.0 - eta) * rz - scaling.apply_Wt(scaling.lam_solve(ds_vec))
            x2, y2, z2 = kkt.solve(scaling, bx, by, bz)
            num = (-(1.0 - eta) * rtau + float(c @ x2)
                   + float(beq @ y2 if eq_rows.size else 0.0) + float(h @ z2)
                   + dtk / tau)
            dtau = num / denom
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dz = z2 + dtau * z1
            ds = -(G @ dx) + h * dtau + (1.0 - eta) * rz
            dkappa = (dtk - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        # affine (predictor) direction
        ds_aff = -lam_sq
        dx_a, dy_a, dz_a, dsl_a, dtau_a, dkap_a = direction(0.0, 0.0, ds_aff,
                                                            -tau * kappa)
        alpha_aff = min(
            1.0,
            layout.max_step(s, dsl_a),
            layout.max_step(z, dz_a),
            -tau / dtau_a if dtau_a < 0 else np.inf,
            -kappa / dkap_a if dkap_a < 0 else np.inf,
        )
        sigma = max(0.0, min(1.0, (1.0 - alpha_aff))) ** 3

        # combined (corrector) direction
        cor = scaling.jordan(scaling.apply_WinvT(dsl_a), scaling.apply_W(dz_a))
        ds_comb = sigma * mu * e - lam_sq - cor
        dtk_comb = sigma * mu - tau * kappa - dtau_a * dkap_a
        dx, dy, dz, dsl, dtau, dkap = direction(sigma, sigma, ds_comb, dtk_comb)

        alpha_max = min(
            layout.max_step(s, dsl),
            layout.max_step(z, dz),
            -tau / dtau if dtau < 0 else np.inf,
            -kappa / dkap if dkap < 0 else np.inf,
        )
        alpha = min(1.0, _STEP * alpha_max)
        # guard against roundoff pushing an iterate out of the interior
        for _ in range(60):
            if (layout.strictly_feasible(s + alpha * dsl)
                    and layout.strictly_feasible(z + alpha * dz)
                    and tau + alpha * dtau > 0 and kappa + alpha * dkap > 0):
                break
            alpha *= 0.9
        else:
            break
        if alpha < _MIN_STEP:
            break

        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * dsl
        tau += alpha * dtau
        kappa += alpha * dkap

    if status == OPTIMAL:
        x_opt = x / tau
        z_full = _merge_dual(full_rows, eq_rows, ineq_rows, y / tau, z / tau)
        residuals = {"primal": pres, "dual": dres, "gap": gap}
        objective = pcost + program.objective_offset
        return ConicSolution(OPTIMAL, x_opt, z_full, objective, residuals,
                             iterations, None, {"history": history})
    if status in (PRIMAL_INFEASIBLE, DUAL_INFEASIBLE):
        return ConicSolution(status, x / tau,
                             _merge_dual(full_rows, eq_rows, ineq_rows,
                                         y / tau, z / tau),
                             math.nan, {"primal": pres, "dual": dres, "gap": gap},
                             iterations, certificate, {"history": history})
    # numerical limit: report the best scaled iterate, never a silent answer
    _, bx_, bz_, bobj, bres = best
    return ConicSolution(NUMERICAL_LIMIT, bx_, bz_,
                         bobj + program.objective_offset, bres, iterations,
                         None, {"history": history})


def _merge_dual(full_rows, eq_rows, ineq_rows, y, z):
    full = np.zeros(full_rows)
    if eq_rows.size:
        full[eq_rows] = y
    full[ineq_rows] = z
    return full
