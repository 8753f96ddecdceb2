"""Threshold detectors, click patterns, and conditional click statistics.

Each optical mode terminates on one non-photon-number-resolving detector
with efficiency eta_i and dark-count probability d_i per detection window.
Given n photons in mode i, the detector clicks with probability

    p_i(1|n) = 1 - (1 - d_i) (1 - eta_i)^n.

Because both the preparations and these response functions are diagonal
in the occupation basis, the full click-pattern POVM is diagonal as well:
the weight of pattern a = (a_1..a_D) on basis state |n_1..n_D> is the
product of the per-detector click or no-click factors.  Simulated
statistics are Born probabilities of those diagonal POVM elements against
the (optionally visibility-degraded) preparation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fock import BlockDensity, BlockDiagonalState, TruncatedFockSpace

__all__ = [
    "DetectorParams",
    "ClickPattern",
    "MeasurementModel",
    "NoiseModel",
    "ConditionalStats",
    "IntervalStats",
    "enumerate_patterns",
    "click_prob",
    "build_threshold_povm",
    "apply_visibility",
    "simulate_statistics",
    "sample_counts",
    "dark_prob_from_rate",
]

ClickPattern = tuple[int, ...]


def enumerate_patterns(n_detectors: int) -> tuple[ClickPattern, ...]:
    """All click patterns in binary counting order, detector 1 most significant.

    For 3 detectors: (0,0,0), (0,0,1), (0,1,0), .., (1,1,1).
    """
    if n_detectors < 1:
        raise ValueError(f"need at least one detector, got {n_detectors}")
    out = []
    for idx in range(2 ** n_detectors):
        bits = tuple((idx >> (n_detectors - 1 - i)) & 1 for i in range(n_detectors))
        out.append(bits)
    return tuple(out)


def pattern_to_str(pattern: ClickPattern) -> str:
    return "".join(str(b) for b in pattern)


def pattern_from_str(text: str) -> ClickPattern:
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"click pattern must be a nonempty 0/1 string, got {text!r}")
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class DetectorParams:
    """Per-detector efficiencies and per-window dark-count probabilities."""

    efficiencies: tuple[float, ...]
    dark_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.efficiencies) != len(self.dark_probs):
            raise ValueError("efficiencies and dark_probs must have equal length")
        if len(self.efficiencies) == 0:
            raise ValueError("need at least one detector")
        for eta in self.efficiencies:
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"efficiency {eta} outside [0, 1]")
        for d in self.dark_probs:
            if not 0.0 <= d < 1.0:
                raise ValueError(f"dark probability {d} outside [0, 1)")

    @property
    def n_detectors(self) -> int:
        return len(self.efficiencies)

    @staticmethod
    def from_rates(efficiencies: Sequence[float], dark_rates_cps: Sequence[float],
                   window_ns: float) -> "DetectorParams":
        """Convert dark-count rates (counts/s) and a gate window to per-window probabilities."""
        darks = tuple(dark_prob_from_rate(r, window_ns) for r in dark_rates_cps)
        return DetectorParams(efficiencies=tuple(float(e) for e in efficiencies),
                              dark_probs=darks)


def dark_prob_from_rate(rate_cps: float, window_ns: float) -> float:
    """Dark-count probability in one detection window, rate times window."""
    if rate_cps < 0 or window_ns <= 0:
        raise ValueError("rate must be >= 0 and window > 0")
    return rate_cps * window_ns * 1e-9


def click_prob(n_photons: int, efficiency: float, dark_prob: float, clicked: int) -> float:
    """Probability of a click (clicked=1) or no click (0) given n incident photons."""
    if n_photons < 0:
        raise ValueError(f"photon number must be >= 0, got {n_photons}")
    if clicked not in (0, 1):
        raise ValueError(f"clicked must be 0 or 1, got {clicked}")
    # evaluate as d + (1-d)(1 - (1-eta)^n) so tiny dark probabilities survive roundoff
    if n_photons == 0:
        absorb = 0.0
    elif efficiency == 1.0:
        absorb = 1.0
    else:
        absorb = -math.expm1(n_photons * math.log1p(-efficiency))
    p_click = dark_prob + (1.0 - dark_prob) * absorb
    return p_click if clicked == 1 else 1.0 - p_click


class MeasurementModel:
    """Diagonal click-pattern POVM of independent threshold detectors.

    `weights[a, i]` is the POVM weight of pattern index a on basis state i,
    so each POVM element is diag(weights[a]) in the occupation ordering.
    """

    def __init__(self, space: TruncatedFockSpace, params: DetectorParams):
        if params.n_detectors != space.modes:
            raise ValueError(f"{params.n_detectors} detectors for {space.modes} modes; "
                             "each mode must end on exactly one detector")
        self.space = space
        self.params = params
        self.patterns = enumerate_patterns(params.n_detectors)
        weights = np.empty((len(self.patterns), space.dim))
        for a, pattern in enumerate(self.patterns):
            for i, occ in enumerate(space.basis):
                w = 1.0
                for det, bit in enumerate(pattern):
                    w *= click_prob(occ.counts[det], params.efficiencies[det],
                                    params.dark_probs[det], bit)
                weights[a, i] = w
        self.weights = weights
        self.weights.flags.writeable = False
        col_sums = weights.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > 1e-12:
            raise ValueError("POVM completeness violated beyond 1e-12")

    def element(self, pattern: ClickPattern) -> np.ndarray:
        """Dense diagonal POVM element for one click pattern."""
        a = self.patterns.index(tuple(pattern))
        return np.diag(self.weights[a])

    def element_blocks(self, pattern: ClickPattern) -> tuple[np.ndarray, ...]:
        """POVM element restricted to each photon-number sector."""
        a = self.patterns.index(tuple(pattern))
        return tuple(np.diag(self.weights[a, sl]) for sl in self.space.sector_slices)


def build_threshold_povm(space: TruncatedFockSpace, params: DetectorParams) -> MeasurementModel:
    return MeasurementModel(space, params)


@dataclass(frozen=True)
class NoiseModel:
    """Interferometric visibility, mixing the preparation with white noise."""

    visibility: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility {self.visibility} outside [0, 1]")


def apply_visibility(state: BlockDiagonalState | BlockDensity, visibility: float) -> BlockDensity:
    """Mix the preparation with the maximally mixed state on the truncated space.

    rho -> nu rho + (1 - nu) I / dim, which stays block diagonal in photon number.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility {visibility} outside [0, 1]")
    blocks = state.to_blocks() if isinstance(state, BlockDiagonalState) else state
    dim = blocks.space.dim
    mixed = tuple(visibility * blk + (1.0 - visibility) * np.eye(blk.shape[0]) / dim
                  for blk in blocks.blocks)
    return BlockDensity(space=blocks.space, blocks=mixed, kappa=blocks.kappa,
                        label=blocks.label)


@dataclass(frozen=True)
class ConditionalStats:
    """Click statistics p(a|x) or raw counts, settings as rows, patterns as columns."""

    settings: tuple[str, ...]
    patterns: tuple[ClickPattern, ...]
    table: np.ndarray
    kind: str = "probability"  # or "count"

    def __post_init__(self) -> None:
        tab = np.asarray(self.table, dtype=float)
        if tab.shape != (len(self.settings), len(self.patterns)):
            raise ValueError(f"table shape {tab.shape} does not match "
                             f"{len(self.settings)} settings x {len(self.patterns)} patterns")
        if len(set(self.settings)) != len(self.settings):
            raise ValueError("duplicate setting labels")
        if len(set(self.patterns)) != len(self.patterns):
            raise ValueError("duplicate patterns")
        if self.kind == "probability":
            if np.any(tab < -1e-12) or np.any(tab > 1 + 1e-12):
                raise ValueError("probabilities must lie in [0, 1]")
            row_sums = tab.sum(axis=1)
            if np.max(np.abs(row_sums - 1.0)) > 1e-9:
                raise ValueError(f"probability rows must sum to 1 within 1e-9, got {row_sums}")
        elif self.kind == "count":
            if np.any(tab < 0) or np.max(np.abs(tab - np.round(tab)), initial=0.0) > 0:
                raise ValueError("counts must be nonnegative integers")
        else:
            raise ValueError(f"kind must be 'probability' or 'count', got {self.kind!r}")
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    def row(self, setting: str) -> np.ndarray:
        return self.table[self.settings.index(setting)]

    def rounds_per_setting(self) -> dict[str, int]:
        if self.kind != "count":
            raise ValueError("rounds are defined for count statistics only")
        return {x: int(round(s)) for x, s in zip(self.settings, self.table.sum(axis=1))}

    def frequencies(self) -> "ConditionalStats":
        """Empirical frequency table from counts."""
        if self.kind == "probability":
            return self
        sums = self.table.sum(axis=1, keepdims=True)
        if np.any(sums == 0):
            empty = [x for x, s in zip(self.settings, sums[:, 0]) if s == 0]
            raise ValueError(f"no rounds recorded for settings {empty}")
        return ConditionalStats(settings=self.settings, patterns=self.patterns,
                                table=self.table / sums, kind="probability")


@dataclass(frozen=True)
class IntervalStats:
    """Elementwise confidence bounds L(a|x) <= p(a|x) <= U(a|x)."""

    settings: tuple[str, ...]
    patterns: tuple[ClickPattern, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        shape = (len(self.settings), len(self.patterns))
        if lo.shape != shape or hi.shape != shape:
            raise ValueError(f"interval tables must have shape {shape}")
        if np.any(lo > hi + 1e-15):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(hi < 0) or np.any(lo > 1):
            raise ValueError("intervals must intersect [0, 1]")
        # a row must be able to hold a probability distribution
        if np.any(hi.sum(axis=1) < 1 - 1e-12) or np.any(lo.sum(axis=1) > 1 + 1e-12):
            raise ValueError("row intervals exclude every probability distribution")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def widen(self, delta: float) -> "IntervalStats":
        """Slacken every interval by delta on both sides (clipped to [0, 1])."""
        if delta < 0:
            raise ValueError("delta must be >= 0")
        return IntervalStats(settings=self.settings, patterns=self.patterns,
                             lower=np.clip(self.lower - delta, 0.0, 1.0),
                             upper=np.clip(self.upper + delta, 0.0, 1.0))


def simulate_statistics(states: Mapping[str, BlockDiagonalState | BlockDensity],
                        model: MeasurementModel,
                        visibility: float = 1.0) -> ConditionalStats:
    """Born-rule click distribution p(a|x) for each labelled preparation."""
    if not states:
        raise ValueError("need at least one preparation")
    labels = tuple(states.keys())
    table = np.empty((len(labels), len(model.patterns)))
    for r, label in enumerate(labels):
        rho = apply_visibility(states[label], visibility)
        if rho.space != model.space:
            raise ValueError(f"state {label!r} lives on {rho.space}, model on {model.space}")
        diag = rho.diagonal()
        table[r] = model.weights @ diag
    # clip away negative float dust before row validation
    table = np.clip(table, 0.0, None)
    table /= table.sum(axis=1, keepdims=True)
    return ConditionalStats(settings=labels, patterns=model.patterns, table=table)


def sample_counts(stats: ConditionalStats,
                  schedule: Mapping[str, float] | Sequence[float],
                  rounds: int,
                  seed: int | np.random.Generator) -> ConditionalStats:
    """Draw click counts for a finite run.

    The total `rounds` are first split over settings by a multinomial draw
    from `schedule` (given as probabilities per setting, either mapped by
    label or ordered like `stats.settings`); each setting's rounds are then
    distributed over click patterns by its probability row.  Deterministic
    for a fixed integer seed.
    """
    if stats.kind != "probability":
        raise ValueError("sample_counts needs a probability table")
    if rounds <= 0:
        raise ValueError(f"rounds must be positive, got {rounds}")
    if isinstance(schedule, Mapping):
        missing = set(stats.settings) - set(schedule)
        if missing:
            raise ValueError(f"no schedule weight for settings {sorted(missing)}")
        probs = np.array([float(schedule[x]) for x in stats.settings])
    else:
        probs = np.asarray(schedule, dtype=float)
        if probs.shape != (len(stats.settings),):
            raise ValueError(f"schedule length {probs.size} does not match "
                             f"{len(stats.settings)} settings")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("schedule must be a probability distribution over settings")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    per_setting = rng.multinomial(rounds, probs)
    table = np.empty_like(stats.table)
    for r in range(len(stats.settings)):
        table[r] = rng.multinomial(int(per_setting[r]),
                                   stats.table[r] / stats.table[r].sum())
    return ConditionalStats(settings=stats.settings, patterns=stats.patterns,
                            table=table, kind="count")
