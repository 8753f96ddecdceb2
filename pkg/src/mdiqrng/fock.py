"""Truncated multimode Fock space and weak-coherent-state preparations.

A source that emits phase-randomized weak coherent pulses over D optical
modes produces, after phase averaging, a state that is block diagonal in
total photon number:

    rho = sum_n p(n|mu) |psi_n><psi_n|,   p(n|mu) = e^{-mu} mu^n / n!

where |psi_n> is the n-photon sector image of the mode amplitude vector
beta (|beta| = 1),

    |psi_n> = sum_{n1+..+nD=n} sqrt(n!/(n1!..nD!)) prod_i beta_i^{n_i} |n1..nD>.

This module enumerates the truncated space with at most `cutoff` photons,
builds those sector states, and tracks the truncation weight

    kappa(mu, cutoff) = e^{-mu} sum_{n<=cutoff} mu^n / n!

which downstream certification uses to correct bounds obtained on the
truncated model back to the full, untruncated source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModeOccupation",
    "TruncatedFockSpace",
    "ModeVector",
    "PureSectorState",
    "BlockDiagonalState",
    "BlockDensity",
    "enumerate_basis",
    "coherent_sector_state",
    "build_wcs_state",
    "kappa",
]

_NORM_TOL = 1e-12


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ModeOccupation:
    """Photon counts per mode, e.g. (1, 0, 2) for modes (a, b, c)."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) == 0:
            raise ValueError("occupation needs at least one mode")
        if any((not isinstance(c, int)) or c < 0 for c in self.counts):
            raise ValueError(f"occupation counts must be nonnegative ints: {self.counts}")

    def total(self) -> int:
        return sum(self.counts)

    def __str__(self) -> str:
        return "|" + ",".join(str(c) for c in self.counts) + ">"


def _occupations(modes: int, total: int):
    """Yield occupation tuples with the given total, ascending lexicographic."""
    if modes == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _occupations(modes - 1, total - first):
            yield (first,) + rest


class TruncatedFockSpace:
    """Fock space of `modes` modes truncated at `cutoff` total photons.

    Basis ordering is fixed: ascending total photon number, and ascending
    lexicographic occupation tuples within each number sector.  All dense
    operators in this package index against that ordering, which also makes
    every photon-number sector a contiguous index range.
    """

    def __init__(self, modes: int, cutoff: int):
        if modes < 1:
            raise ValueError(f"modes must be >= 1, got {modes}")
        if cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {cutoff}")
        self.modes = modes
        self.cutoff = cutoff
        basis: list[ModeOccupation] = []
        slices: list[slice] = []
        for n in range(cutoff + 1):
            start = len(basis)
            basis.extend(ModeOccupation(t) for t in _occupations(modes, n))
            slices.append(slice(start, len(basis)))
        self.basis: tuple[ModeOccupation, ...] = tuple(basis)
        self.sector_slices: tuple[slice, ...] = tuple(slices)
        self.index: dict[tuple[int, ...], int] = {
            occ.counts: i for i, occ in enumerate(self.basis)
        }

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def sector_dims(self) -> tuple[int, ...]:
        return tuple(s.stop - s.start for s in self.sector_slices)

    def sector_basis(self, n: int) -> tuple[ModeOccupation, ...]:
        return self.basis[self.sector_slices[n]]

    def index_of(self, occ: ModeOccupation | tuple[int, ...]) -> int:
        counts = occ.counts if isinstance(occ, ModeOccupation) else tuple(occ)
        try:
            return self.index[counts]
        except KeyError:
            raise ValueError(f"occupation {counts} not in space "
                             f"(modes={self.modes}, cutoff={self.cutoff})") from None

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, TruncatedFockSpace)
                and self.modes == other.modes and self.cutoff == other.cutoff)

    def __hash__(self) -> int:
        return hash((self.modes, self.cutoff))

    def __repr__(self) -> str:
        return f"TruncatedFockSpace(modes={self.modes}, cutoff={self.cutoff}, dim={self.dim})"


def enumerate_basis(modes: int, cutoff: int) -> TruncatedFockSpace:
    """Build the truncated space with its deterministic basis ordering."""
    return TruncatedFockSpace(modes, cutoff)


@dataclass(frozen=True)
class ModeVector:
    """Unit-norm complex amplitude vector over the optical modes."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _readonly(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("mode vector must be a nonempty 1-d array")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"mode vector norm {nrm!r} differs from 1 by more than {_NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def modes(self) -> int:
        return self.amplitudes.size

    @staticmethod
    def basis(modes: int, mode: int) -> "ModeVector":
        """All amplitude in a single mode."""
        amps = np.zeros(modes, dtype=complex)
        amps[mode] = 1.0
        return ModeVector(amps)

    @staticmethod
    def uniform(modes: int) -> "ModeVector":
        """Equal real amplitude in every mode."""
        return ModeVector(np.full(modes, 1.0 / math.sqrt(modes), dtype=complex))


@dataclass(frozen=True)
class PureSectorState:
    """Pure state supported on a single total-photon-number sector."""

    sector: int
    amplitudes: np.ndarray  # over the sector's occupation basis, unit norm

    def __post_init__(self) -> None:
        amps = _readonly(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 1:
            raise ValueError("sector amplitudes must be 1-d")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"sector state norm {nrm!r} differs from 1 by more than {_NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> np.ndarray:
        """Rank-one density matrix on the sector subspace."""
        return np.outer(self.amplitudes, self.amplitudes.conj())


def coherent_sector_state(space: TruncatedFockSpace, beta: ModeVector, n: int) -> PureSectorState:
    """n-photon sector image of mode amplitudes beta.

    Amplitude on occupation (n1, .., nD) is sqrt(n!/(n1!..nD!)) prod_i beta_i^{n_i};
    unit norm follows from the multinomial theorem since |beta| = 1.
    """
    if beta.modes != space.modes:
        raise ValueError(f"mode count mismatch: beta has {beta.modes}, space has {space.modes}")
    if not 0 <= n <= space.cutoff:
        raise ValueError(f"sector {n} outside [0, {space.cutoff}]")
    occs = space.sector_basis(n)
    amps = np.empty(len(occs), dtype=complex)
    for i, occ in enumerate(occs):
        denom = 1
        for c in occ.counts:
            denom *= math.factorial(c)
        coeff = math.sqrt(math.factorial(n) / denom)
        amps[i] = coeff * np.prod(beta.amplitudes ** np.array(occ.counts))
    return PureSectorState(sector=n, amplitudes=amps)


def kappa(mu: float, cutoff: int) -> float:
    """Probability that a Poisson(mu) pulse carries at most `cutoff` photons."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    return math.exp(-mu) * sum(mu ** n / math.factorial(n) for n in range(cutoff + 1))


@dataclass(frozen=True)
class BlockDiagonalState:
    """Photon-number block-diagonal preparation: weighted pure sector states.

    `weights[n]` is the probability of sector n.  When `renormalized` is
    True the weights sum to 1 on the truncated space and `kappa` records
    the untruncated probability mass the truncation kept; a downstream
    bound on the truncated model is then corrected through kappa.  When
    False the weights are the raw Poisson masses and sum to kappa.
    """

    space: TruncatedFockSpace
    weights: tuple[float, ...]
    sector_states: tuple[PureSectorState | None, ...]
    kappa: float
    renormalized: bool = True
    mu: float | None = None
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        nsec = self.space.cutoff + 1
        if len(self.weights) != nsec or len(self.sector_states) != nsec:
            raise ValueError("need one weight and one sector state slot per sector")
        if any(w < 0 for w in self.weights):
            raise ValueError(f"negative sector weight in {self.weights}")
        if not 0 < self.kappa <= 1 + _NORM_TOL:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        target = 1.0 if self.renormalized else self.kappa
        total = sum(self.weights)
        if abs(total - target) > 1e-9:
            raise ValueError(f"sector weights sum to {total!r}, expected {target!r}")
        for n, (w, st) in enumerate(zip(self.weights, self.sector_states)):
            if w > 0 and st is None:
                raise ValueError(f"sector {n} has weight {w} but no state")
            if st is not None:
                if st.sector != n:
                    raise ValueError(f"sector state at slot {n} claims sector {st.sector}")
                if st.amplitudes.size != self.space.sector_dims[n]:
                    raise ValueError(f"sector {n} amplitude length {st.amplitudes.size} "
                                     f"!= sector dim {self.space.sector_dims[n]}")

    def sector_matrices(self) -> tuple[np.ndarray, ...]:
        """Per-sector density blocks w_n |psi_n><psi_n| (zeros where w_n = 0)."""
        out = []
        for n, (w, st) in enumerate(zip(self.weights, self.sector_states)):
            d = self.space.sector_dims[n]
            if w == 0 or st is None:
                out.append(np.zeros((d, d), dtype=complex))
            else:
                out.append(w * st.density())
        return tuple(out)

    def to_blocks(self) -> "BlockDensity":
        return BlockDensity(space=self.space, blocks=self.sector_matrices(),
                            kappa=self.kappa, label=self.label)

    def dense(self) -> np.ndarray:
        return self.to_blocks().dense()


@dataclass(frozen=True)
class BlockDensity:
    """General block-diagonal density operator, one Hermitian PSD block per sector."""

    space: TruncatedFockSpace
    blocks: tuple[np.ndarray, ...]
    kappa: float = 1.0
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.blocks) != self.space.cutoff + 1:
            raise ValueError("need one block per photon-number sector")
        frozen = []
        for n, blk in enumerate(self.blocks):
            b = np.asarray(blk, dtype=complex)
            d = self.space.sector_dims[n]
            if b.shape != (d, d):
                raise ValueError(f"sector {n} block shape {b.shape}, expected ({d}, {d})")
            if np.max(np.abs(b - b.conj().T), initial=0.0) > 1e-12:
                raise ValueError(f"sector {n} block is not Hermitian within 1e-12")
            frozen.append(_readonly(b))
        object.__setattr__(self, "blocks", tuple(frozen))

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    def diagonal(self) -> np.ndarray:
        """Diagonal in the full basis ordering (real)."""
        return np.concatenate([np.diag(b).real for b in self.blocks])

    def dense(self) -> np.ndarray:
        full = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for sl, blk in zip(self.space.sector_slices, self.blocks):
            full[sl, sl] = blk
        return full

    @staticmethod
    def from_state(state: BlockDiagonalState) -> "BlockDensity":
        return state.to_blocks()


def build_wcs_state(space: TruncatedFockSpace, beta: ModeVector, mu: float,
                    renormalize: bool = True, label: str | None = None) -> BlockDiagonalState:
    """Phase-randomized weak coherent pulse on the truncated space.

    Sector weights are Poisson(mu), divided by kappa(mu, cutoff) when
    `renormalize` is set so the truncated state has unit trace.
    """
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    kap = kappa(mu, space.cutoff)
    raw = [math.exp(-mu) * mu ** n / math.factorial(n) for n in range(space.cutoff + 1)]
    weights = [w / kap for w in raw] if renormalize else raw
    states: list[PureSectorState | None] = []
    for n, w in enumerate(weights):
        states.append(coherent_sector_state(space, beta, n) if w > 0 else None)
    return BlockDiagonalState(space=space, weights=tuple(weights),
                              sector_states=tuple(states), kappa=kap,
                              renormalized=renormalize, mu=mu, label=label)
