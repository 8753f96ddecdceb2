"""Assembly of the guessing-probability SDP and its structural reductions.

The adversarial measurement is a joint POVM {M_{a,e}} over device outcome
a and adversary guess e, constrained by no-signaling,

    sum_a M_{a,e} = q(e) I,   q(e) >= 0,  sum_e q(e) = 1,

and by reproducing the observed statistics of every trusted preparation,

    sum_e Tr[rho_x M_{a,e}] = p(a|x)     (or bounded by an interval).

The guessing probability is max sum_a Tr[rho_G M_{a,a}] over all such
strategies, with rho_G the generation-setting preparation.  Its optimum
upper-bounds the probability that any adversary holding the measurement
device predicts the announced outcome, so -log2 of it lower-bounds the
per-round min-entropy.

Two exact reductions keep the programs small: `block_reduce` rewrites
every variable as a direct sum over photon-number sectors (valid because
all data matrices are block diagonal after phase randomization), and
`facial_reduce` restricts variables away from subspaces that equality
rows with zero right-hand side and sign-definite coefficients force to
be unreachable.  Both leave the optimal value unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..detector import ClickPattern, ConditionalStats, IntervalStats, pattern_to_str
from ..fock import BlockDensity, BlockDiagonalState
from .problem import (
    LinearConstraint,
    PsdVariable,
    ScalarVariable,
    SdpProblem,
    hermitian_basis_matrices,
)

__all__ = [
    "build_guessing_sdp",
    "block_reduce",
    "facial_reduce",
    "FacialReduction",
    "mvar",
    "qvar",
]


def mvar(outcome: ClickPattern, guess: ClickPattern) -> str:
    """Label of the joint POVM block for (device outcome, adversary guess)."""
    return f"M[{pattern_to_str(outcome)},{pattern_to_str(guess)}]"


def qvar(guess: ClickPattern) -> str:
    return f"q[{pattern_to_str(guess)}]"


def _as_density(state) -> BlockDensity:
    if isinstance(state, BlockDiagonalState):
        return state.to_blocks()
    if isinstance(state, BlockDensity):
        return state
    raise TypeError(f"expected a block state, got {type(state).__name__}")


def build_guessing_sdp(
    states: Mapping[str, BlockDiagonalState | BlockDensity],
    generation_setting: str,
    stats: ConditionalStats | None = None,
    intervals: IntervalStats | None = None,
    drop_redundant_row: bool = True,
) -> SdpProblem:
    """Build the adversarial guessing program from preparations and statistics.

    Exactly one of `stats` (probability table, equality constraints) or
    `intervals` (elementwise confidence bounds, inequality constraints)
    supplies the statistics.  All preparations must live on one truncated
    space; variables are created as single full-space blocks, ready for
    `block_reduce`.

    In equality mode one statistics row per setting is redundant (it is
    implied by normalization and no-signaling) and is dropped by default
    to keep the constraint set full rank; `drop_redundant_row=False`
    keeps every row.
    """
    if (stats is None) == (intervals is None):
        raise ValueError("provide exactly one of stats or intervals")
    data = stats if stats is not None else intervals
    if isinstance(data, ConditionalStats) and data.kind != "probability":
        raise ValueError("equality mode needs a probability table; "
                         "convert counts to intervals or frequencies first")
    settings = data.settings
    patterns = data.patterns
    if set(settings) != set(states.keys()):
        raise ValueError(f"statistics settings {settings} do not match "
                         f"prepared settings {tuple(states.keys())}")
    if generation_setting not in settings:
        raise ValueError(f"generation setting {generation_setting!r} not in {settings}")

    dens = {x: _as_density(states[x]) for x in settings}
    space = dens[settings[0]].space
    for x, rho in dens.items():
        if rho.space != space:
            raise ValueError(f"state {x!r} lives on a different space")
        if abs(rho.trace() - 1.0) > 1e-9:
            raise ValueError(f"state {x!r} has trace {rho.trace()!r}, expected 1 "
                             "(renormalize on the truncated space first)")

    dim = space.dim
    rho_dense = {x: dens[x].dense() for x in settings}
    neg_rho = {x: -rho_dense[x] for x in settings}

    psd_vars = tuple(PsdVariable(label=mvar(a, e), dims=(dim,))
                     for a in patterns for e in patterns)
    scalar_vars = tuple(ScalarVariable(label=qvar(e)) for e in patterns)

    objective = tuple((mvar(a, a), (rho_dense[generation_setting],)) for a in patterns)

    basis = hermitian_basis_matrices(dim)
    traces = np.array([float(np.trace(E).real) for E in basis])

    eqs: list[LinearConstraint] = []
    for e in patterns:
        e_str = pattern_to_str(e)
        for k in range(dim * dim):
            Ek = basis[k]
            terms = tuple((mvar(a, e), (Ek,)) for a in patterns)
            scal = ((qvar(e), -traces[k]),) if traces[k] != 0.0 else ()
            eqs.append(LinearConstraint(matrix_terms=terms, scalar_terms=scal,
                                        rhs=0.0, name=f"nosig[{e_str}][{k}]"))
    eqs.append(LinearConstraint(matrix_terms=(),
                                scalar_terms=tuple((qvar(e), 1.0) for e in patterns),
                                rhs=1.0, name="norm"))

    ineqs: list[LinearConstraint] = []
    meta: dict = {
        "modes": space.modes,
        "cutoff": space.cutoff,
        "sector_dims": list(space.sector_dims),
        "settings": list(settings),
        "patterns": [pattern_to_str(a) for a in patterns],
        "generation_setting": generation_setting,
    }

    if stats is not None:
        meta["mode"] = "equality"
        meta["probabilities"] = [[float(v) for v in row] for row in stats.table]
        dropped = []
        for xi, x in enumerate(settings):
            for ai, a in enumerate(patterns):
                if drop_redundant_row and ai == len(patterns) - 1 and len(patterns) > 1:
                    dropped.append([x, pattern_to_str(a)])
                    continue
                terms = tuple((mvar(a, e), (rho_dense[x],)) for e in patterns)
                eqs.append(LinearConstraint(
                    matrix_terms=terms, rhs=float(stats.table[xi, ai]),
                    name=f"stats[{x}][{pattern_to_str(a)}]"))
        meta["dropped_stat_rows"] = dropped
    else:
        meta["mode"] = "interval"
        meta["lower"] = [[float(v) for v in row] for row in intervals.lower]
        meta["upper"] = [[float(v) for v in row] for row in intervals.upper]
        for xi, x in enumerate(settings):
            for ai, a in enumerate(patterns):
                lo = float(intervals.lower[xi, ai])
                hi = float(intervals.upper[xi, ai])
                a_str = pattern_to_str(a)
                if hi < 1.0:
                    terms = tuple((mvar(a, e), (rho_dense[x],)) for e in patterns)
                    ineqs.append(LinearConstraint(matrix_terms=terms, rhs=hi,
                                                  name=f"stats[{x}][{a_str}]:ub"))
                if lo > 0.0:
                    terms = tuple((mvar(a, e), (neg_rho[x],)) for e in patterns)
                    ineqs.append(LinearConstraint(matrix_terms=terms, rhs=-lo,
                                                  name=f"stats[{x}][{a_str}]:lb"))

    problem = SdpProblem(psd_vars=psd_vars, scalar_vars=scalar_vars,
                         objective_matrix=objective, objective_scalar=(),
                         eq_constraints=_dedup_eq_rows(eqs),
                         ineq_constraints=tuple(ineqs),
                         meta=meta)
    return problem


def _dedup_eq_rows(rows) -> tuple:
    """Drop equality rows that repeat an earlier row's coefficients and rhs.

    Identical preparations (all-vacuum states at mu = 0, say) produce
    byte-identical statistics rows per setting; keeping one copy leaves
    the feasible set unchanged and the constraint system full rank.
    """
    seen = set()
    kept = []
    for row in rows:
        key = (
            tuple((label, tuple(np.asarray(b).tobytes() for b in coeff))
                  for label, coeff in row.matrix_terms),
            tuple(row.scalar_terms),
            float(row.rhs),
        )
        if key in seen:
            continue
        seen.add(key)
        kept.append(row)
    return tuple(kept)


def _sector_slices(problem: SdpProblem, sectors) -> list[slice]:
    if sectors is None:
        dims = problem.meta.get("sector_dims")
        if dims is None:
            raise ValueError("no sector structure given and none recorded in meta")
        sectors = dims
    if all(isinstance(s, slice) for s in sectors):
        return list(sectors)
    out, start = [], 0
    for d in sectors:
        out.append(slice(start, start + int(d)))
        start += int(d)
    return out


def block_reduce(problem: SdpProblem, sectors: Sequence | None = None) -> SdpProblem:
    """Rewrite full-space variables as direct sums over contiguous sectors.

    Valid, with the optimal value unchanged, exactly when every data
    matrix in the problem carries no coherence between different sectors;
    a coefficient with cross-sector support raises ValueError.  Rows whose
    coefficients vanish entirely under the restriction (no-signaling rows
    for cross-sector basis elements) are dropped.
    """
    slices = _sector_slices(problem, sectors)
    total = sum(s.stop - s.start for s in slices)
    for v in problem.psd_vars:
        if v.dims != (total,):
            raise ValueError(f"variable {v.label!r} has dims {v.dims}; block_reduce "
                             f"expects single blocks of dim {total}")
    new_dims = tuple(s.stop - s.start for s in slices)

    cache: dict[int, tuple] = {}

    def reduce_coeff(coeff):
        """Slice a full-space coefficient into (diagonal blocks | None, has_cross)."""
        arr = coeff[0]
        key = id(arr)
        if key not in cache:
            a = np.asarray(arr)
            off = a.copy()
            for s in slices:
                off[s, s] = 0.0
            has_cross = bool(np.max(np.abs(off), initial=0.0) > 1e-12)
            blocks = tuple(np.ascontiguousarray(a[s, s]) for s in slices)
            nonzero = any(np.max(np.abs(b), initial=0.0) > 0.0 for b in blocks)
            cache[key] = (blocks if nonzero else None, has_cross, arr)
        return cache[key][0], cache[key][1]

    def reduce_terms(matrix_terms, where, allow_cross_only):
        """Diagonal-block terms of a row; None if the row is purely cross-sector.

        A coefficient with both diagonal and cross-sector support, or a
        cross-sector coefficient sharing a row with surviving terms, would
        make the restriction to block-diagonal variables change the
        feasible set, so those raise.
        """
        out = []
        cross_only = False
        for label, coeff in matrix_terms:
            blocks, has_cross = reduce_coeff(coeff)
            if blocks is not None:
                if has_cross:
                    raise ValueError(f"{where}: coefficient on {label!r} mixes "
                                     "sector-diagonal and cross-sector support; "
                                     "block reduction would change the problem")
                out.append((label, blocks))
            elif has_cross:
                cross_only = True
        if cross_only:
            if out or not allow_cross_only:
                raise ValueError(f"{where}: cross-sector coefficient cannot be "
                                 "reduced away")
            return None
        return tuple(out)

    def reduce_rows(rows, is_eq):
        kept = []
        for con in rows:
            name = con.name or "constraint"
            terms = reduce_terms(con.matrix_terms, name,
                                 allow_cross_only=not con.scalar_terms)
            if terms is None:
                # row constrained only coherences the reduced variables no
                # longer carry; it holds automatically iff the bound allows 0
                sat = (con.rhs == 0.0) if is_eq else (con.rhs >= 0.0)
                if not sat:
                    raise ValueError(f"{name}: cross-sector row with rhs {con.rhs} "
                                     "cannot be dropped")
                continue
            if not terms and not con.scalar_terms:
                if abs(con.rhs) > 1e-12:
                    raise ValueError(f"{name}: reduces to 0 = {con.rhs}")
                continue
            kept.append(LinearConstraint(matrix_terms=terms,
                                         scalar_terms=con.scalar_terms,
                                         rhs=con.rhs, name=con.name))
        return tuple(kept)

    meta = dict(problem.meta)
    meta["block_reduced"] = True
    return SdpProblem(
        psd_vars=tuple(PsdVariable(label=v.label, dims=new_dims) for v in problem.psd_vars),
        scalar_vars=problem.scalar_vars,
        objective_matrix=reduce_terms(problem.objective_matrix, "objective",
                                      allow_cross_only=False) or (),
        objective_scalar=problem.objective_scalar,
        eq_constraints=reduce_rows(problem.eq_constraints, is_eq=True),
        ineq_constraints=reduce_rows(problem.ineq_constraints, is_eq=False),
        meta=meta,
    )


@dataclass
class FacialReduction:
    """Result of restricting variables away from forced-zero subspaces.

    `transforms[(label, sector)]` holds the isometry V with the reduced
    block X' satisfying X = V X' V^dag on the original block; labels or
    sectors not present are unchanged.  When the scan proves the zero
    rows contradict a nonzero right-hand side, `infeasible` is set and
    `problem` is None.
    """

    problem: SdpProblem | None
    transforms: dict = field(default_factory=dict)
    forced_scalars: tuple[str, ...] = ()
    infeasible: bool = False
    message: str = ""

    def lift_psd_values(self, values: Mapping[str, tuple]) -> dict:
        """Map reduced-coordinate solution blocks back to original blocks."""
        from .problem import HermitianBlock

        out = {}
        for label, blocks in values.items():
            lifted = []
            for s, blk in enumerate(blocks):
                mat = blk.matrix if isinstance(blk, HermitianBlock) else np.asarray(blk)
                V = self.transforms.get((label, s))
                if V is not None:
                    mat = V @ mat @ V.conj().T
                    mat = (mat + mat.conj().T) / 2
                lifted.append(HermitianBlock(mat))
            out[label] = tuple(lifted)
        return out


def facial_reduce(problem: SdpProblem, psd_tol: float = 1e-10,
                  max_passes: int = 3) -> FacialReduction:
    """Shrink variable blocks using zero-right-hand-side sign-definite rows.

    An equality row  sum_v <C_v, X_v> + sum_s c_s q_s = 0  with every C_v
    positive semidefinite and every c_s >= 0 forces each X_v to vanish on
    the range of its C_v and each q_s with c_s > 0 to zero (termwise, all
    terms being nonnegative).  Variables are restricted to the orthogonal
    complements, which preserves the optimal value exactly and typically
    restores strict feasibility for statistics with deterministic rows.
    """
    transforms: dict = {}
    forced: set[str] = set()
    current = problem

    for _ in range(max_passes):
        eig_cache: dict[int, tuple] = {}

        def signed_eig(arr):
            key = id(arr)
            if key not in eig_cache:
                a = np.asarray(arr)
                if a.size == 0:
                    eig_cache[key] = ("zero", None, None, arr)
                else:
                    w, U = np.linalg.eigh(a)
                    scale = max(np.max(np.abs(w)), 1.0)
                    if np.max(np.abs(w)) <= psd_tol:
                        kind = "zero"
                    elif w[0] >= -psd_tol * scale:
                        kind = "psd"
                    elif w[-1] <= psd_tol * scale:
                        kind = "nsd"
                    else:
                        kind = "mixed"
                    eig_cache[key] = (kind, w, U, arr)
            return eig_cache[key]

        kill: dict[tuple[str, int], list[np.ndarray]] = {}
        newly_forced: set[str] = set()
        for con in current.eq_constraints:
            if con.rhs != 0.0:
                continue
            kinds = set()
            infos = []
            for label, coeff in con.matrix_terms:
                for s, blk in enumerate(coeff):
                    if blk is None:
                        continue
                    kind, w, U, _ = signed_eig(blk)
                    if kind != "zero":
                        kinds.add(kind)
                    infos.append((label, s, kind, w, U))
            for _, c in con.scalar_terms:
                if c > psd_tol:
                    kinds.add("psd")
                elif c < -psd_tol:
                    kinds.add("nsd")
            if kinds not in ({"psd"}, {"nsd"}):
                continue
            sign = 1.0 if kinds == {"psd"} else -1.0
            for label, s, kind, w, U in infos:
                if kind == "zero":
                    continue
                scale = np.max(np.abs(w))
                mask = sign * w > psd_tol * max(scale, 1.0)
                if np.any(mask):
                    kill.setdefault((label, s), []).append(U[:, mask])
            for slabel, c in con.scalar_terms:
                if sign * c > psd_tol:
                    newly_forced.add(slabel)

        if not kill and not newly_forced:
            break

        local_V: dict[tuple[str, int], np.ndarray] = {}
        for (label, s), mats in kill.items():
            K = np.concatenate(mats, axis=1)
            U, sv, _ = np.linalg.svd(K, full_matrices=True)
            r = int(np.sum(sv > 1e-9 * max(sv[0], 1.0)))
            local_V[(label, s)] = np.ascontiguousarray(U[:, r:])

        coeff_cache: dict[tuple[int, str, int], np.ndarray] = {}

        def project(label, coeff):
            out = []
            changed = False
            for s, blk in enumerate(coeff):
                V = local_V.get((label, s))
                if blk is None or V is None:
                    out.append(blk)
                    continue
                key = (id(blk), label, s)
                if key not in coeff_cache:
                    coeff_cache[key] = V.conj().T @ np.asarray(blk) @ V
                out.append(coeff_cache[key])
                changed = True
            return tuple(out), changed

        def project_terms(terms):
            out = []
            for label, coeff in terms:
                newc, _ = project(label, coeff)
                alive = any(b is not None and np.max(np.abs(b), initial=0.0) > 1e-12
                            for b in newc)
                if alive:
                    out.append((label, newc))
            return tuple(out)

        def project_scalars(terms):
            return tuple((l, c) for l, c in terms if l not in forced and l not in newly_forced)

        def rebuild_rows(rows, is_eq):
            kept = []
            for con in rows:
                terms = project_terms(con.matrix_terms)
                scal = project_scalars(con.scalar_terms)
                if not terms and not scal:
                    violated = (abs(con.rhs) > 1e-9) if is_eq else (con.rhs < -1e-9)
                    if violated:
                        return None, con
                    continue
                kept.append(LinearConstraint(matrix_terms=terms, scalar_terms=scal,
                                             rhs=con.rhs, name=con.name))
            return tuple(kept), None

        new_dims: dict[str, tuple[int, ...]] = {}
        for v in current.psd_vars:
            dims = list(v.dims)
            for s in range(len(dims)):
                V = local_V.get((v.label, s))
                if V is not None:
                    dims[s] = V.shape[1]
            new_dims[v.label] = tuple(dims)

        eqs, bad = rebuild_rows(current.eq_constraints, True)
        if bad is not None:
            return FacialReduction(problem=None, infeasible=True,
                                   message=f"constraint {bad.name!r} requires "
                                           f"{bad.rhs} from a forced-zero expression")
        ineqs, bad = rebuild_rows(current.ineq_constraints, False)
        if bad is not None:
            return FacialReduction(problem=None, infeasible=True,
                                   message=f"constraint {bad.name!r} requires "
                                           f"<= {bad.rhs} from a forced-zero expression")

        forced |= newly_forced
        meta = dict(current.meta)
        meta["facially_reduced"] = True
        current = SdpProblem(
            psd_vars=tuple(PsdVariable(label=v.label, dims=new_dims[v.label])
                           for v in current.psd_vars),
            scalar_vars=tuple(s for s in current.scalar_vars if s.label not in forced),
            objective_matrix=project_terms(current.objective_matrix),
            objective_scalar=project_scalars(current.objective_scalar),
            eq_constraints=eqs,
            ineq_constraints=ineqs,
            meta=meta,
        )
        # compose transforms with any from earlier passes
        for (label, s), V in local_V.items():
            prev = transforms.get((label, s))
            transforms[(label, s)] = V if prev is None else prev @ V

    return FacialReduction(problem=current, transforms=transforms,
                           forced_scalars=tuple(sorted(forced)))
