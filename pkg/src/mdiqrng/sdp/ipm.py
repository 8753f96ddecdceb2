"""Primal-dual interior-point solver for Hermitian block SDPs.

The problem is embedded in the simplified homogeneous self-dual model:
find (x, y, s, tau, kappa) with x, s in the PSD cone product and
tau, kappa >= 0 such that

    A x - b tau            = 0
    A'y + s - c tau        = 0
    -<c, x> + b'y - kappa  = 0,

whose feasible points automatically satisfy <x, s> + tau kappa = 0, i.e.
complementarity.  A Nesterov-Todd scaled Mehrotra predictor-corrector
path-following scheme drives an interior starting point toward such a
solution.  tau > 0 in the limit recovers a primal-dual optimal pair
(x, y, s)/tau; tau -> 0 with kappa > 0 certifies infeasibility, read off
through a Farkas certificate.

The search direction solves, per Newton step with centering gamma,

    A dx - b dtau = (gamma-1) r_P
    A'dy + ds - c dtau = (gamma-1) r_D
    -<c,dx> + b'dy - dkappa = (gamma-1) r_G
    dx + W ds W = R(gamma mu L^-1 - L - corr)R'    (NT scaling W = RR')
    kappa dtau + tau dkappa = gamma mu - tau kappa - corr_tau

reduced to one positive-definite Schur system in dy of size m.  All
block algebra runs in the orthonormal Hermitian basis of problem.py, so
the Schur matrix is real symmetric and assembled blockwise from the
congruence maps S(W) = svec(W . W).

This maximization-oriented wrapper reports the primal value (achieved by
the returned strategy, a lower bound on the optimum) and the dual value
(a certified upper bound); the safe side for certification is the dual.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .problem import (
    HermitianBlock,
    SdpProblem,
    hermitian_basis_indices,
    smat,
    svec,
    symkron,
)

__all__ = ["SolverConfig", "SdpSolution", "solve", "register_backend", "available_backends"]


@dataclass(frozen=True)
class SolverConfig:
    """Solver selection and stopping tolerances."""

    gap_tol: float = 1e-8
    # a solve also counts as converged when the absolute primal-dual gap
    # is this small, whatever the relative gap; certification quotes the
    # absolute gap, so this is the tolerance that actually matters
    abs_gap_tol: float = 8e-8
    feas_tol: float = 1e-7
    max_iter: int = 120
    step_fraction: float = 0.98
    infeas_cert_tol: float = 1e-9
    backend: str = "ipm"
    verbose: bool = False


@dataclass
class SdpSolution:
    """Outcome of one solve, in the maximization sense of the input problem.

    `primal_value` is attained by the returned feasible-to-tolerance
    strategy; `dual_value` upper-bounds every feasible strategy and is
    the value certification must quote.  `status` is one of "optimal",
    "infeasible", "numerical-failure".
    """

    status: str
    primal_value: float | None = None
    dual_value: float | None = None
    duality_gap: float | None = None
    psd_values: dict = field(default_factory=dict)
    scalar_values: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    iterations: int = 0
    certificate: dict | None = None
    message: str = ""
    solve_seconds: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# ---------------------------------------------------------------------------
# compilation to internal conic form: min <c,x>  s.t. A x = b, x in PSD product


@dataclass
class _Block:
    kind: str  # "psd" | "scalar" | "slack"
    label: str
    sector: int
    dim: int
    rows: np.ndarray
    B: np.ndarray  # (len(rows), dim^2) real coefficients in svec coordinates
    c: np.ndarray  # (dim^2,) objective in svec coordinates


class _Compiled:
    def __init__(self, problem: SdpProblem):
        problem.validate()
        n_eq = len(problem.eq_constraints)
        n_ineq = len(problem.ineq_constraints)
        m = n_eq + n_ineq
        if m == 0:
            raise ValueError("problem has no constraints")
        b = np.zeros(m)
        rows_by_block: dict[tuple, list] = {}
        c_by_block: dict[tuple, np.ndarray] = {}
        dims: dict[tuple, tuple[str, int]] = {}

        def block_key(label, sector):
            return ("P", label, sector)

        for v in problem.psd_vars:
            for sidx, d in enumerate(v.dims):
                if d > 0:
                    dims[block_key(v.label, sidx)] = ("psd", d)
        for sv in problem.scalar_vars:
            dims[("S", sv.label, 0)] = ("scalar", 1)

        svec_cache: dict[int, np.ndarray] = {}

        def svec_of(arr):
            key = id(arr)
            if key not in svec_cache:
                svec_cache[key] = svec(np.asarray(arr, dtype=complex))
            return svec_cache[key]

        def add_row(ridx, matrix_terms, scalar_terms):
            for label, coeff in matrix_terms:
                for sidx, blk in enumerate(coeff):
                    if blk is None or np.asarray(blk).size == 0:
                        continue
                    v = svec_of(blk)
                    if not np.any(v):
                        continue
                    rows_by_block.setdefault(block_key(label, sidx), []).append((ridx, v))
            for slabel, cval in scalar_terms:
                if cval != 0.0:
                    rows_by_block.setdefault(("S", slabel, 0), []).append(
                        (ridx, np.array([float(cval)])))

        for i, con in enumerate(problem.eq_constraints):
            add_row(i, con.matrix_terms, con.scalar_terms)
            b[i] = con.rhs
        for j, con in enumerate(problem.ineq_constraints):
            ridx = n_eq + j
            add_row(ridx, con.matrix_terms, con.scalar_terms)
            b[ridx] = con.rhs
            dims[("K", f"slack[{j}]", 0)] = ("slack", 1)
            rows_by_block[("K", f"slack[{j}]", 0)] = [(ridx, np.array([1.0]))]

        # maximization becomes min of the negated objective
        for label, coeff in problem.objective_matrix:
            v = problem.var(label)
            for sidx, blk in enumerate(coeff):
                if blk is None or v.dims[sidx] == 0:
                    continue
                key = block_key(label, sidx)
                c_by_block[key] = c_by_block.get(key, 0.0) - svec_of(blk)
        for slabel, cval in problem.objective_scalar:
            key = ("S", slabel, 0)
            c_by_block[key] = c_by_block.get(key, 0.0) - np.array([float(cval)])

        self.blocks: list[_Block] = []
        for key, (kind, d) in dims.items():
            entries = rows_by_block.get(key, [])
            rows = np.array([r for r, _ in entries], dtype=np.intp)
            B = (np.vstack([v for _, v in entries]) if entries
                 else np.zeros((0, d * d)))
            c = np.zeros(d * d)
            if key in c_by_block:
                c = c + c_by_block[key]
            self.blocks.append(_Block(kind=kind, label=key[1], sector=key[2],
                                      dim=d, rows=rows, B=B, c=c))

        # row equilibration: unit Euclidean norm rows keep the Schur system tame
        norms_sq = np.zeros(m)
        for blk in self.blocks:
            if blk.rows.size:
                np.add.at(norms_sq, blk.rows, np.einsum("ij,ij->i", blk.B, blk.B))
        norms = np.sqrt(norms_sq)
        self.row_scale = 1.0 / np.clip(norms, 1e-10, None)
        for blk in self.blocks:
            if blk.rows.size:
                blk.B = blk.B * self.row_scale[blk.rows][:, None]
        self.b = b * self.row_scale
        self.m = m
        self.n_eq = n_eq
        self.nu = sum(blk.dim for blk in self.blocks)
        self.c_norm = max((np.max(np.abs(blk.c), initial=0.0) for blk in self.blocks),
                          default=0.0)
        self.b_norm = np.max(np.abs(self.b), initial=0.0)


# ---------------------------------------------------------------------------


def _chol_or_none(mat: np.ndarray):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


class _IpmState:
    def __init__(self, comp: _Compiled):
        self.comp = comp
        self.x = [np.eye(b.dim, dtype=complex) for b in comp.blocks]
        self.s = [np.eye(b.dim, dtype=complex) for b in comp.blocks]
        self.y = np.zeros(comp.m)
        self.tau = 1.0
        self.kappa = 1.0

    def mu(self) -> float:
        dot = sum(float(np.real(np.vdot(xb, sb))) for xb, sb in zip(self.x, self.s))
        return (dot + self.tau * self.kappa) / (self.comp.nu + 1)

    def apply_A(self, mats) -> np.ndarray:
        out = np.zeros(self.comp.m)
        for blk, mb in zip(self.comp.blocks, mats):
            if blk.rows.size:
                out[blk.rows] += blk.B @ svec(mb)
        return out

    def apply_At(self, y) -> list:
        out = []
        for blk in self.comp.blocks:
            if blk.rows.size:
                out.append(smat(blk.B.T @ y[blk.rows], blk.dim))
            else:
                out.append(np.zeros((blk.dim, blk.dim), dtype=complex))
        return out

    def dot_c(self, mats) -> float:
        return sum(float(blk.c @ svec(mb)) if blk.c.any() else 0.0
                   for blk, mb in zip(self.comp.blocks, mats))


def _max_step(L: np.ndarray, delta: np.ndarray) -> float:
    """Largest t with  X + t delta  still PSD, given X = L L^dag."""
    G = solve_triangular(L, delta, lower=True)
    G = solve_triangular(L, G.conj().T, lower=True).conj().T
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    lo = float(w[0])
    if lo >= -1e-16:
        return np.inf
    return -1.0 / lo


def _solve_ipm(problem: SdpProblem, config: SolverConfig) -> SdpSolution:
    t0 = time.perf_counter()
    comp = _Compiled(problem)
    st = _IpmState(comp)
    blocks = comp.blocks
    nblk = len(blocks)
    c_mats = [smat(b.c, b.dim) if b.c.any() else np.zeros((b.dim, b.dim), dtype=complex)
              for b in blocks]

    best = None
    stall = 0
    prev_mu = st.mu()
    status, message = "numerical-failure", "iteration limit reached"
    it = 0

    for it in range(1, config.max_iter + 1):
        mu = st.mu()
        Ax = st.apply_A(st.x)
        rP = Ax - comp.b * st.tau
        Aty = st.apply_At(st.y)
        rD = [aty + sb - cm * st.tau for aty, sb, cm in zip(Aty, st.s, c_mats)]
        cx = st.dot_c(st.x)
        by = float(comp.b @ st.y)
        rG = -cx + by - st.kappa

        # scaled convergence measures
        tau = st.tau
        prim_obj = cx / tau
        dual_obj = by / tau
        prim_res = np.max(np.abs(rP), initial=0.0) / (tau * (1.0 + comp.b_norm))
        dual_res = max((np.max(np.abs(rb), initial=0.0) for rb in rD), default=0.0) \
            / (tau * (1.0 + comp.c_norm))
        abs_gap = abs(prim_obj - dual_obj)
        gap = abs_gap / (1.0 + abs(prim_obj) + abs(dual_obj))
        score = max(prim_res, dual_res, gap)
        if best is None or score < best[0]:
            best = (score, [xb.copy() for xb in st.x], st.y.copy(), tau,
                    prim_obj, dual_obj, prim_res, dual_res, it)
        if config.verbose:
            print(f"  it {it:3d}  mu {mu:9.2e}  pres {prim_res:8.1e} "
                  f"dres {dual_res:8.1e} gap {gap:8.1e} tau {tau:8.1e}")
        if prim_res <= config.feas_tol and dual_res <= config.feas_tol \
                and (gap <= config.gap_tol or abs_gap <= config.abs_gap_tol):
            status, message = "optimal", ""
            break

        # Farkas certificate for inconsistent statistics: A'y <= 0, b'y > 0
        if by > 0:
            cert_res = max((np.max(np.abs(aty + sb), initial=0.0)
                            for aty, sb in zip(Aty, st.s)), default=0.0)
            if cert_res <= config.infeas_cert_tol * by:
                status = "infeasible"
                message = "Farkas certificate: statistics admit no strategy"
                break
        if st.tau < 1e-13 and st.kappa > 1e4 * st.tau:
            status = "infeasible" if by > 0 else "numerical-failure"
            message = "homogeneous model drove tau to zero"
            break

        # Nesterov-Todd scaling per block
        Ls_list, Lx_list, R_list, Rinv_list, W_list, lam_list = [], [], [], [], [], []
        failed = False
        for xb, sb in zip(st.x, st.s):
            Lx = _chol_or_none(xb)
            Ls = _chol_or_none(sb)
            if Lx is None or Ls is None:
                failed = True
                break
            Msd = Ls.conj().T @ Lx
            U, sig, Vh = np.linalg.svd(Msd)
            sig = np.clip(sig, 1e-150, None)
            R = Lx @ Vh.conj().T * (sig ** -0.5)
            Rinv = (U * (sig ** -0.5)).conj().T @ Ls.conj().T
            R_list.append(R)
            Rinv_list.append(Rinv)
            W_list.append(R @ R.conj().T)
            lam_list.append(sig)
            Lx_list.append(Lx)
            Ls_list.append(Ls)
        if failed:
            status, message = "numerical-failure", "iterate left the cone interior"
            break

        # Schur system M = A (W . W) A', plus the tau-column pieces
        M = np.zeros((comp.m, comp.m))
        u2 = np.zeros(comp.m)
        cWc = 0.0
        WcW = []
        SW = []
        for blk, W, cm in zip(blocks, W_list, c_mats):
            S = symkron(W)
            SW.append(S)
            wcw = W @ cm @ W if blk.c.any() else None
            WcW.append(wcw)
            if blk.rows.size:
                T = blk.B @ S
                M[np.ix_(blk.rows, blk.rows)] += T @ blk.B.T
                if wcw is not None:
                    u2[blk.rows] += blk.B @ svec(wcw)
            if wcw is not None:
                cWc += float(blk.c @ svec(wcw))

        jitter = 0.0
        diag_scale = max(float(np.max(np.abs(np.diag(M)))), 1e-30)
        factor = None
        while jitter <= 1e-6:
            try:
                factor = cho_factor(M + (jitter * diag_scale) * np.eye(comp.m),
                                    lower=True, check_finite=False)
                break
            except np.linalg.LinAlgError:
                jitter = 1e-12 if jitter == 0.0 else jitter * 100
        if factor is None:
            status, message = "numerical-failure", "Schur complement not factorizable"
            break

        def schur_solve(rhs):
            sol = cho_solve(factor, rhs, check_finite=False)
            # one refinement pass keeps late-phase directions accurate
            resid = rhs - M @ sol
            return sol + cho_solve(factor, resid, check_finite=False)

        u_vec = u2 + comp.b
        hu = schur_solve(u_vec)
        denom_const = float((comp.b - u2) @ hu) + cWc + st.kappa / st.tau

        def directions(gamma, corr_mats, corr_tau):
            Dc = []
            for W, R, lam, xb, cr in zip(W_list, R_list, lam_list, st.x, corr_mats):
                inner = gamma * mu / lam - lam
                if cr is not None:
                    inner_mat = np.diag(inner) - cr
                else:
                    inner_mat = np.diag(inner)
                Dc.append(R @ inner_mat @ R.conj().T)
            WrDW = [W @ rb @ W for W, rb in zip(W_list, rD)]
            ADc = st.apply_A(Dc)
            AWrDW = st.apply_A(WrDW)
            r1 = (gamma - 1.0) * rP - ADc + (gamma - 1.0) * AWrDW
            r2 = (gamma - 1.0) * rG + st.dot_c(Dc) - (gamma - 1.0) * st.dot_c(WrDW) \
                + (gamma * mu - st.tau * st.kappa - corr_tau) / st.tau
            h1 = schur_solve(r1)
            dtau = (r2 - float((comp.b - u2) @ h1)) / denom_const
            dy = h1 + hu * dtau
            Atdy = st.apply_At(dy)
            ds = [(gamma - 1.0) * rb - atd + cm * dtau
                  for rb, atd, cm in zip(rD, Atdy, c_mats)]
            dx = [dcb - W @ dsb @ W for dcb, W, dsb in zip(Dc, W_list, ds)]
            dkappa = (gamma * mu - st.tau * st.kappa - corr_tau) / st.tau \
                - (st.kappa / st.tau) * dtau
            return dx, dy, ds, dtau, dkappa

        def boundary_step(dx, ds, dtau, dkappa):
            alpha = np.inf
            for Lx, Ls, dxb, dsb in zip(Lx_list, Ls_list, dx, ds):
                alpha = min(alpha, _max_step(Lx, dxb), _max_step(Ls, dsb))
            if dtau < 0:
                alpha = min(alpha, -st.tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -st.kappa / dkappa)
            return alpha

        # predictor
        dxa, dya, dsa, dtaua, dkappaa = directions(0.0, [None] * nblk, 0.0)
        alpha_aff = min(boundary_step(dxa, dsa, dtaua, dkappaa), 1.0)
        dot_aff = 0.0
        for xb, sb, dxb, dsb in zip(st.x, st.s, dxa, dsa):
            dot_aff += float(np.real(np.vdot(xb + alpha_aff * dxb, sb + alpha_aff * dsb)))
        dot_aff += (st.tau + alpha_aff * dtaua) * (st.kappa + alpha_aff * dkappaa)
        mu_aff = dot_aff / (comp.nu + 1)
        sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 1e-8, 1.0 - 1e-8))

        # corrector
        corr = []
        for R, Rinv, lam, dxb, dsb in zip(R_list, Rinv_list, lam_list, dxa, dsa):
            dxt = Rinv @ dxb @ Rinv.conj().T
            dst = R.conj().T @ dsb @ R
            H = (dxt @ dst + dst @ dxt) / 2
            corr.append(H / ((lam[:, None] + lam[None, :]) / 2))
        corr_tau = dtaua * dkappaa
        dx, dy, ds, dtau, dkappa = directions(sigma, corr, corr_tau)
        alpha = min(config.step_fraction * boundary_step(dx, ds, dtau, dkappa), 1.0)

        # take the step, backing off if roundoff leaves the cone
        for attempt in range(6):
            ok = True
            new_x, new_s = [], []
            for xb, sb, dxb, dsb in zip(st.x, st.s, dx, ds):
                nx = xb + alpha * dxb
                ns = sb + alpha * dsb
                nx = (nx + nx.conj().T) / 2
                ns = (ns + ns.conj().T) / 2
                if _chol_or_none(nx) is None or _chol_or_none(ns) is None:
                    ok = False
                    break
                new_x.append(nx)
                new_s.append(ns)
            if ok and st.tau + alpha * dtau > 0 and st.kappa + alpha * dkappa > 0:
                break
            alpha *= 0.7
        else:
            status, message = "numerical-failure", "no admissible step length"
            break
        if not ok:
            status, message = "numerical-failure", "no admissible step length"
            break
        st.x = new_x
        st.s = new_s
        st.y = st.y + alpha * dy
        st.tau += alpha * dtau
        st.kappa += alpha * dkappa

        new_mu = st.mu()
        if new_mu > 0.95 * prev_mu:
            stall += 1
        else:
            stall = 0
        prev_mu = new_mu
        if stall >= 12:
            status, message = "numerical-failure", "progress stalled"
            break
        # endgame only: once near tolerance, stop polishing when ten
        # iterations fail to improve the best iterate
        if best[0] < 100 * config.feas_tol and it - best[8] >= 10:
            status, message = "numerical-failure", "no further progress"
            break

    elapsed = time.perf_counter() - t0
    if status == "infeasible":
        scale = max(float(comp.b @ st.y), 1e-300)
        return SdpSolution(status="infeasible", iterations=it, message=message,
                           certificate={"y": st.y / scale,
                                        "b_dot_y": float(comp.b @ st.y)},
                           residuals={"tau": st.tau, "kappa": st.kappa},
                           solve_seconds=elapsed)

    if best is None:
        return SdpSolution(status="numerical-failure", iterations=it,
                           message=message, solve_seconds=elapsed)

    _, bx, by_vec, btau, prim_obj, dual_obj, prim_res, dual_res, best_it = best
    # a late-phase wobble can end the loop after the iterates already met
    # tolerance; judge the best iterate, not the last one
    best_abs_gap = abs(prim_obj - dual_obj)
    best_gap = best_abs_gap / (1.0 + abs(prim_obj) + abs(dual_obj))
    if status != "optimal" and prim_res <= config.feas_tol \
            and dual_res <= config.feas_tol \
            and (best_gap <= config.gap_tol
                 or best_abs_gap <= config.abs_gap_tol):
        status, message = "optimal", ""
    # back to the maximization sense of the input problem
    primal_value = -prim_obj
    dual_value = -dual_obj
    gap = abs(dual_value - primal_value)

    psd_values: dict[str, list] = {}
    scalar_values: dict[str, float] = {}
    min_eig = np.inf
    sector_count = {v.label: len(v.dims) for v in problem.psd_vars}
    dims_by_label = {v.label: v.dims for v in problem.psd_vars}
    collected: dict[str, dict[int, np.ndarray]] = {}
    for blk, xb in zip(blocks, bx):
        val = xb / btau
        if blk.kind == "psd":
            collected.setdefault(blk.label, {})[blk.sector] = val
            if blk.dim:
                min_eig = min(min_eig, float(np.linalg.eigvalsh(val)[0]))
        elif blk.kind == "scalar":
            scalar_values[blk.label] = float(val[0, 0].real)
    for label, n_sec in sector_count.items():
        secs = collected.get(label, {})
        out = []
        for sidx in range(n_sec):
            d = dims_by_label[label][sidx]
            mat = secs.get(sidx)
            if mat is None:
                mat = np.zeros((d, d), dtype=complex)
            out.append(HermitianBlock((mat + mat.conj().T) / 2))
        psd_values[label] = tuple(out)

    ok = (status == "optimal")
    return SdpSolution(
        status=status,
        primal_value=primal_value,
        dual_value=dual_value,
        duality_gap=gap,
        psd_values=psd_values,
        scalar_values=scalar_values,
        residuals={"primal": prim_res, "dual": dual_res,
                   "min_eigenvalue": (None if min_eig is np.inf else min_eig),
                   "best_iteration": best_it},
        iterations=it,
        message=message if not ok else "",
        solve_seconds=elapsed,
    )


# ---------------------------------------------------------------------------
# backend registry


_BACKENDS: dict[str, Callable[[SdpProblem, SolverConfig], SdpSolution]] = {
    "ipm": _solve_ipm,
}


def register_backend(name: str,
                     fn: Callable[[SdpProblem, SolverConfig], SdpSolution]) -> None:
    _BACKENDS[name] = fn


def available_backends() -> tuple[str, ...]:
    names = set(_BACKENDS)
    try:
        import cvxpy  # noqa: F401
        names.add("cvxpy")
    except ImportError:
        pass
    return tuple(sorted(names))


def _solve_cvxpy(problem: SdpProblem, config: SolverConfig) -> SdpSolution:
    """Cross-validation backend through cvxpy, when it is installed."""
    import cvxpy as cp

    mats: dict[str, list] = {}
    for v in problem.psd_vars:
        mats[v.label] = []
        for d in v.dims:
            if d == 0:
                mats[v.label].append(None)
            elif d == 1:
                mats[v.label].append(cp.Variable((1, 1), symmetric=True))
            else:
                mats[v.label].append(cp.Variable((d, d), hermitian=True))
    scalars = {s.label: cp.Variable(nonneg=True) for s in problem.scalar_vars}

    cons = []
    for label, lst in mats.items():
        for mv in lst:
            if mv is not None:
                cons.append(mv >> 0)

    def expr_of(matrix_terms, scalar_terms):
        parts = []
        for label, coeff in matrix_terms:
            for blk, mv in zip(coeff, mats[label]):
                if blk is None or mv is None:
                    continue
                parts.append(cp.real(cp.trace(np.asarray(blk).conj().T @ mv)))
        for slabel, cval in scalar_terms:
            parts.append(cval * scalars[slabel])
        return cp.sum(parts) if parts else cp.Constant(0.0)

    for con in problem.eq_constraints:
        cons.append(expr_of(con.matrix_terms, con.scalar_terms) == con.rhs)
    for con in problem.ineq_constraints:
        cons.append(expr_of(con.matrix_terms, con.scalar_terms) <= con.rhs)

    objective = cp.Maximize(expr_of(problem.objective_matrix, problem.objective_scalar))
    prob = cp.Problem(objective, cons)
    t0 = time.perf_counter()
    value = None
    for solver_name in ("CVXOPT", "SCS"):
        try:
            value = prob.solve(solver=solver_name, verbose=config.verbose)
            break
        except (cp.SolverError, Exception):  # noqa: BLE001
            continue
    elapsed = time.perf_counter() - t0
    if prob.status in ("infeasible", "infeasible_inaccurate"):
        return SdpSolution(status="infeasible", message=f"cvxpy: {prob.status}",
                           solve_seconds=elapsed)
    if value is None or prob.status not in ("optimal", "optimal_inaccurate"):
        return SdpSolution(status="numerical-failure",
                           message=f"cvxpy: {prob.status}", solve_seconds=elapsed)
    psd_values = {}
    for v in problem.psd_vars:
        out = []
        for d, mv in zip(v.dims, mats[v.label]):
            if mv is None or mv.value is None:
                out.append(HermitianBlock(np.zeros((d, d), dtype=complex)))
            else:
                val = np.asarray(mv.value, dtype=complex)
                out.append(HermitianBlock((val + val.conj().T) / 2))
        psd_values[v.label] = tuple(out)
    scalar_values = {k: float(s.value) if s.value is not None else 0.0
                     for k, s in scalars.items()}
    return SdpSolution(status="optimal", primal_value=float(value),
                       dual_value=float(value), duality_gap=None,
                       psd_values=psd_values, scalar_values=scalar_values,
                       iterations=-1, message=f"cvxpy status {prob.status}",
                       solve_seconds=elapsed)


def solve(problem: SdpProblem, config: SolverConfig | None = None) -> SdpSolution:
    """Solve the maximization problem with the configured backend."""
    config = config or SolverConfig()
    if config.backend == "cvxpy" and "cvxpy" not in _BACKENDS:
        try:
            import cvxpy  # noqa: F401
        except ImportError as exc:
            raise ValueError("cvxpy backend requested but cvxpy is not installed") from exc
        return _solve_cvxpy(problem, config)
    if config.backend in _BACKENDS:
        return _BACKENDS[config.backend](problem, config)
    if config.backend == "cvxpy":
        return _solve_cvxpy(problem, config)
    raise ValueError(f"unknown backend {config.backend!r}; "
                     f"available: {available_backends()}")
