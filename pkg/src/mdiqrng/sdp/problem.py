"""Semidefinite-program data structures over complex Hermitian block variables.

A problem holds positive-semidefinite matrix variables (each a direct sum
of Hermitian blocks), nonnegative scalar variables, linear equality and
inequality constraints, and a linear objective that is always maximized.

Internally everything linear is expressed through an orthonormal real
basis {E_k} of the Hermitian matrices of each block dimension, so that a
Hermitian matrix X becomes the real vector svec(X)_k = <E_k, X> of length
d^2 and linear maps become ordinary real matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt

import numpy as np

__all__ = [
    "HermitianBlock",
    "PsdVariable",
    "ScalarVariable",
    "LinearConstraint",
    "SdpProblem",
    "hermitian_basis_indices",
    "hermitian_basis_matrices",
    "svec",
    "smat",
    "symkron",
    "problem_to_json",
]

_HERM_TOL = 1e-12

BlockCoeff = tuple  # of np.ndarray or None, aligned with a variable's block dims


@lru_cache(maxsize=None)
def hermitian_basis_indices(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index representation (P, Q, alpha) of an orthonormal Hermitian basis.

    Basis element k is  E_k = alpha_k e_{P_k} e_{Q_k}^dag + conj(alpha_k) e_{Q_k} e_{P_k}^dag:
    diagonal elements (alpha = 1/2, P = Q), then real and imaginary pair
    elements (alpha = 1/sqrt2 and i/sqrt2, P < Q).  Orthonormal under the
    Frobenius inner product, d^2 elements in total.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    ps, qs, alphas = [], [], []
    for p in range(dim):
        ps.append(p)
        qs.append(p)
        alphas.append(0.5)
    inv_sqrt2 = 1.0 / sqrt(2.0)
    for p in range(dim):
        for q in range(p + 1, dim):
            ps.append(p)
            qs.append(q)
            alphas.append(inv_sqrt2)
            ps.append(p)
            qs.append(q)
            alphas.append(1j * inv_sqrt2)
    P = np.array(ps, dtype=np.intp)
    Q = np.array(qs, dtype=np.intp)
    A = np.array(alphas, dtype=complex)
    P.flags.writeable = False
    Q.flags.writeable = False
    A.flags.writeable = False
    return P, Q, A


def hermitian_basis_matrices(dim: int) -> np.ndarray:
    """Dense (d^2, d, d) stack of the orthonormal Hermitian basis."""
    P, Q, A = hermitian_basis_indices(dim)
    out = np.zeros((dim * dim, dim, dim), dtype=complex)
    k = np.arange(dim * dim)
    np.add.at(out, (k, P, Q), A)
    np.add.at(out, (k, Q, P), A.conj())
    return out


def svec(X: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the orthonormal basis."""
    X = np.asarray(X)
    d = X.shape[0]
    P, Q, A = hermitian_basis_indices(d)
    return 2.0 * np.real(A * X[Q, P])


def smat(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of svec: rebuild the Hermitian matrix from its coordinates."""
    v = np.asarray(v, dtype=float)
    if v.size != dim * dim:
        raise ValueError(f"expected {dim * dim} coordinates, got {v.size}")
    P, Q, A = hermitian_basis_indices(dim)
    X = np.zeros((dim, dim), dtype=complex)
    np.add.at(X, (P, Q), v * A)
    np.add.at(X, (Q, P), v * A.conj())
    return X


def symkron(W: np.ndarray) -> np.ndarray:
    """Matrix of the congruence map Y -> W Y W in svec coordinates.

    S[k, l] = <E_k, W E_l W>; symmetric, and positive definite when W is.
    """
    W = np.asarray(W)
    d = W.shape[0]
    P, Q, A = hermitian_basis_indices(d)
    WQP = W[np.ix_(Q, P)]
    WQQ = W[np.ix_(Q, Q)]
    WPP = W[np.ix_(P, P)]
    aa = A[:, None] * A[None, :]
    ac = A[:, None] * A.conj()[None, :]
    term1 = aa * WQP * WQP.T
    term2 = ac * WQQ * WPP.T
    return 2.0 * np.real(term1 + term2)


@dataclass(frozen=True)
class HermitianBlock:
    """Dense complex Hermitian matrix with validated symmetry."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.size and np.max(np.abs(m - m.conj().T)) > _HERM_TOL:
            raise ValueError("matrix is not Hermitian within 1e-12")
        m = np.array(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class PsdVariable:
    """PSD matrix variable, a direct sum of Hermitian blocks of the given dims."""

    label: str
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("variable label must be nonempty")
        if len(self.dims) == 0 or any(d < 0 for d in self.dims):
            raise ValueError(f"invalid block dims {self.dims}")

    @property
    def total_dim(self) -> int:
        return sum(self.dims)


@dataclass(frozen=True)
class ScalarVariable:
    """Nonnegative scalar variable."""

    label: str

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("variable label must be nonempty")


@dataclass(frozen=True)
class LinearConstraint:
    """sum_v <C_v, X_v> + sum_s c_s q_s  (== or <=)  rhs.

    `matrix_terms` maps variable labels to per-block coefficient tuples
    (None for blocks the row does not touch); `scalar_terms` maps scalar
    labels to real coefficients.  The sense is determined by which list of
    the problem the constraint sits in: eq_constraints hold with equality,
    ineq_constraints are upper bounds.
    """

    matrix_terms: tuple[tuple[str, BlockCoeff], ...]
    scalar_terms: tuple[tuple[str, float], ...] = ()
    rhs: float = 0.0
    name: str = ""


@dataclass
class SdpProblem:
    """Maximization problem over PSD block variables and nonnegative scalars."""

    psd_vars: tuple[PsdVariable, ...]
    scalar_vars: tuple[ScalarVariable, ...]
    objective_matrix: tuple[tuple[str, BlockCoeff], ...]
    objective_scalar: tuple[tuple[str, float], ...]
    eq_constraints: tuple[LinearConstraint, ...]
    ineq_constraints: tuple[LinearConstraint, ...] = ()
    meta: dict = field(default_factory=dict)

    def var(self, label: str) -> PsdVariable:
        for v in self.psd_vars:
            if v.label == label:
                return v
        raise KeyError(label)

    @property
    def n_constraints(self) -> int:
        return len(self.eq_constraints) + len(self.ineq_constraints)

    def validate(self) -> None:
        """Check label references, coefficient shapes, and Hermitian symmetry."""
        labels = [v.label for v in self.psd_vars]
        slabels = [s.label for s in self.scalar_vars]
        if len(set(labels)) != len(labels) or len(set(slabels)) != len(slabels):
            raise ValueError("duplicate variable labels")
        dims = {v.label: v.dims for v in self.psd_vars}

        def check_terms(matrix_terms, scalar_terms, where):
            seen = set()
            for label, coeff in matrix_terms:
                if label not in dims:
                    raise ValueError(f"{where}: unknown matrix variable {label!r}")
                if label in seen:
                    raise ValueError(f"{where}: variable {label!r} appears twice")
                seen.add(label)
                if len(coeff) != len(dims[label]):
                    raise ValueError(f"{where}: {label!r} expects {len(dims[label])} blocks")
                for blk, d in zip(coeff, dims[label]):
                    if blk is None:
                        continue
                    b = np.asarray(blk)
                    if b.shape != (d, d):
                        raise ValueError(f"{where}: {label!r} block shape {b.shape} != ({d},{d})")
                    if d and np.max(np.abs(b - b.conj().T)) > _HERM_TOL:
                        raise ValueError(f"{where}: {label!r} coefficient not Hermitian")
            for label, c in scalar_terms:
                if label not in slabels:
                    raise ValueError(f"{where}: unknown scalar variable {label!r}")
                if not np.isfinite(c):
                    raise ValueError(f"{where}: non-finite scalar coefficient")

        check_terms(self.objective_matrix, self.objective_scalar, "objective")
        for i, con in enumerate(self.eq_constraints):
            check_terms(con.matrix_terms, con.scalar_terms, con.name or f"eq[{i}]")
        for i, con in enumerate(self.ineq_constraints):
            check_terms(con.matrix_terms, con.scalar_terms, con.name or f"ineq[{i}]")


def _coeff_entries(coeff: BlockCoeff) -> list:
    """Upper-triangular nonzero entries of each block as [sector, i, j, re, im]."""
    rows = []
    for s, blk in enumerate(coeff):
        if blk is None:
            continue
        b = np.asarray(blk, dtype=complex)
        for i in range(b.shape[0]):
            for j in range(i, b.shape[1]):
                z = b[i, j]
                if z != 0:
                    rows.append([s, i, j, float(z.real), float(z.imag)])
    return rows


def _terms_json(matrix_terms, scalar_terms) -> dict:
    return {
        "matrix": [{"var": label, "entries": _coeff_entries(coeff)}
                   for label, coeff in matrix_terms],
        "scalar": [{"var": label, "coeff": float(c)} for label, c in scalar_terms],
    }


def problem_to_json(problem: SdpProblem) -> str:
    """Self-describing JSON text of the full problem for external re-solving.

    Coefficients are stored as upper-triangular (sector, row, col, re, im)
    triplets per variable; the lower triangle follows from Hermitian
    symmetry.  The objective is to be maximized.
    """
    doc = {
        "sense": "maximize",
        "psd_variables": [{"label": v.label, "block_dims": list(v.dims)}
                          for v in problem.psd_vars],
        "scalar_variables": [{"label": s.label, "nonnegative": True}
                             for s in problem.scalar_vars],
        "objective": _terms_json(problem.objective_matrix, problem.objective_scalar),
        "equalities": [dict(name=c.name, rhs=float(c.rhs),
                            **_terms_json(c.matrix_terms, c.scalar_terms))
                       for c in problem.eq_constraints],
        "inequalities": [dict(name=c.name, rhs=float(c.rhs), sense="<=",
                              **_terms_json(c.matrix_terms, c.scalar_terms))
                         for c in problem.ineq_constraints],
        "meta": {k: v for k, v in sorted(problem.meta.items())
                 if isinstance(v, (str, int, float, bool, list, tuple))},
    }
    return json.dumps(doc, indent=2, sort_keys=True)
