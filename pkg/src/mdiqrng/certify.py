"""Certified min-entropy from solved guessing programs.

The chain is: click statistics (exact or finite-round confidence
intervals) -> guessing-probability SDP on the truncated space -> dual
value p*' -> truncation correction p* = kappa p*' + (1 - kappa) ->
h = -log2 p* bits per generation round.  Also implements the classical
coarse-graining that turns three-detector data into a two-detector
protocol, and the bits-per-second accounting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .detector import (
    ClickPattern,
    ConditionalStats,
    IntervalStats,
    enumerate_patterns,
    pattern_to_str,
)
from .fock import BlockDensity, BlockDiagonalState
from .sdp import (
    SdpProblem,
    SdpSolution,
    SolverConfig,
    block_reduce,
    build_guessing_sdp,
    facial_reduce,
    solve,
)

__all__ = [
    "EpsilonBudget",
    "BinningConfig",
    "CertificationResult",
    "chernoff_radius",
    "intervals_from_counts",
    "truncation_correct",
    "min_entropy",
    "bin_to_qubit",
    "certified_bitrate",
    "certify_from_statistics",
]


def chernoff_radius(n_x: int, eps: float) -> float:
    """Two-sided concentration radius sqrt(ln(2/eps) / (2 n_x))."""
    if n_x < 1:
        raise ValueError(f"need at least one round, got {n_x}")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"failure probability {eps} outside (0, 2]")
    return math.sqrt(math.log(2.0 / eps) / (2.0 * n_x))


@dataclass(frozen=True)
class EpsilonBudget:
    """Global statistical failure probability and its split over (x, a) pairs.

    The default splits uniformly over every setting/pattern pair; a mapping
    from (setting, pattern string) to weights replaces that, normalized so
    the weights sum to the total.
    """

    total: float
    weights: Mapping[tuple[str, str], float] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.total < 1.0:
            raise ValueError(f"total failure probability {self.total} outside (0, 1)")
        if self.weights is not None:
            vals = list(self.weights.values())
            if not vals or any(w <= 0 for w in vals):
                raise ValueError("weights must be positive")

    def per_pair(self, settings: Sequence[str],
                 patterns: Sequence[ClickPattern]) -> dict[tuple[str, str], float]:
        pairs = [(x, pattern_to_str(a)) for x in settings for a in patterns]
        if self.weights is None:
            eps = self.total / len(pairs)
            return {p: eps for p in pairs}
        missing = [p for p in pairs if p not in self.weights]
        if missing:
            raise ValueError(f"no weight for pairs {missing[:3]}...")
        norm = sum(self.weights[p] for p in pairs)
        return {p: self.total * self.weights[p] / norm for p in pairs}


def intervals_from_counts(counts: ConditionalStats,
                          budget: EpsilonBudget) -> IntervalStats:
    """Elementwise confidence bands L = max(0, phat - t), U = min(1, phat + t)."""
    if counts.kind != "count":
        raise ValueError("intervals_from_counts needs a count table")
    eps = budget.per_pair(counts.settings, counts.patterns)
    n_per = counts.rounds_per_setting()
    lower = np.zeros_like(counts.table)
    upper = np.zeros_like(counts.table)
    for xi, x in enumerate(counts.settings):
        n_x = n_per[x]
        if n_x < 1:
            raise ValueError(f"setting {x!r} has no rounds")
        for ai, a in enumerate(counts.patterns):
            t = chernoff_radius(n_x, eps[(x, pattern_to_str(a))])
            phat = counts.table[xi, ai] / n_x
            lower[xi, ai] = max(0.0, phat - t)
            upper[xi, ai] = min(1.0, phat + t)
    return IntervalStats(settings=counts.settings, patterns=counts.patterns,
                         lower=lower, upper=upper)


def truncation_correct(p_trunc: float, kappa: float) -> float:
    """Worst-case physical guessing probability kappa p' + (1 - kappa).

    Outside the kept photon-number sectors the adversary is assumed to
    guess perfectly, so the correction is always conservative.
    """
    if not 0.0 <= p_trunc <= 1.0 + 1e-9:
        raise ValueError(f"guessing probability {p_trunc} outside [0, 1]")
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa {kappa} outside [0, 1]")
    return kappa * min(p_trunc, 1.0) + (1.0 - kappa)


def min_entropy(p_guess: float) -> float:
    """Min-entropy -log2(p) of the adversary's best guessing probability."""
    if not 0.0 < p_guess <= 1.0 + 1e-12:
        raise ValueError(f"guessing probability {p_guess} outside (0, 1]")
    return max(0.0, -math.log2(min(p_guess, 1.0)))


def certified_bitrate(h: float, symbol_rate: float,
                      generation_fraction: float) -> float:
    """Certified bits per second: per-round bits times generation rounds per second."""
    if h < 0 or symbol_rate < 0 or not 0.0 <= generation_fraction <= 1.0:
        raise ValueError("inputs must be non-negative, fraction within [0, 1]")
    return h * symbol_rate * generation_fraction


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinningConfig:
    """Coarse-graining of three-detector data onto two kept detectors.

    `kept` names the two retained detector indices; the third is
    marginalized.  Test rows additionally pass through a loss map with
    retention `r`: a non-null pattern keeps its mass with probability r
    and is rerouted to the no-click pattern otherwise, which makes the
    test data consistent with the generation state's reduced mean photon
    number (2/3 of the three-path value for balanced splitting).
    """

    kept: tuple[int, int] = (1, 2)
    retention: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if len(self.kept) != 2 or len(set(self.kept)) != 2:
            raise ValueError(f"kept must be two distinct indices, got {self.kept}")
        if not 0.0 <= self.retention <= 1.0:
            raise ValueError(f"retention {self.retention} outside [0, 1]")


def bin_to_qubit(stats3: ConditionalStats,
                 config: BinningConfig | None = None,
                 generation_setting: str = "G",
                 test_modes: Mapping[str, int] | None = None,
                 seed: int | np.random.Generator | None = None) -> ConditionalStats:
    """Convert three-detector statistics to a two-detector protocol's.

    Drops the test setting aimed at the discarded path, marginalizes the
    discarded detector out of every click pattern, renames the kept test
    settings T1/T2 in `config.kept` order, and applies the loss map to
    the test rows only.  Probability tables transform exactly; count
    tables route each discarded-detector event with a seeded binomial
    draw so the output stays integer (pass `seed` for reproducibility).
    """
    config = config or BinningConfig()
    n_det = len(stats3.patterns[0])
    if n_det != 3:
        raise ValueError(f"expected three-detector patterns, got {n_det}")
    if not all(0 <= k < 3 for k in config.kept):
        raise ValueError(f"kept indices {config.kept} outside the detector range")
    if generation_setting not in stats3.settings:
        raise ValueError(f"generation setting {generation_setting!r} not present")
    if test_modes is None:
        test_modes = {x: i for i, x in enumerate(s for s in stats3.settings
                                                 if s != generation_setting)}
    (dropped,) = set(range(3)) - set(config.kept)
    drop_setting = None
    for x, mode in test_modes.items():
        if mode == dropped:
            drop_setting = x

    out_settings = []
    src_rows = []
    for pos, k in enumerate(config.kept):
        for x, mode in test_modes.items():
            if mode == k:
                out_settings.append(f"T{pos+1}")
                src_rows.append(stats3.settings.index(x))
    out_settings.append("G")
    src_rows.append(stats3.settings.index(generation_setting))
    if len(out_settings) != 3:
        raise ValueError("could not match one test setting per kept detector; "
                         f"test_modes={dict(test_modes)}, kept={config.kept}")

    patterns2 = enumerate_patterns(2)
    pat_index = {a: i for i, a in enumerate(patterns2)}
    null2 = patterns2.index((0, 0))
    table = np.zeros((3, len(patterns2)))
    for row, src in enumerate(src_rows):
        for ai, a in enumerate(stats3.patterns):
            a2 = (a[config.kept[0]], a[config.kept[1]])
            table[row, pat_index[a2]] += stats3.table[src, ai]

    r = config.retention
    if stats3.kind == "probability":
        for row in range(2):  # loss map on test rows only
            for ai, a2 in enumerate(patterns2):
                if ai == null2:
                    continue
                mass = table[row, ai]
                table[row, ai] = r * mass
                table[row, null2] += (1.0 - r) * mass
        kind = "probability"
    else:
        rng = (seed if isinstance(seed, np.random.Generator)
               else np.random.default_rng(seed))
        for row in range(2):
            for ai in range(len(patterns2)):
                if ai == null2:
                    continue
                n = int(table[row, ai])
                keep = int(rng.binomial(n, r)) if n else 0
                table[row, ai] = keep
                table[row, null2] += n - keep
        kind = "count"
    return ConditionalStats(settings=tuple(out_settings), patterns=patterns2,
                            table=table, kind=kind)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificationResult:
    """Certified randomness bound together with everything needed to audit it."""

    min_entropy_bits: float
    p_guess: float
    p_guess_truncated: float
    kappa: float
    mode: str  # "asymptotic" | "finite"
    status: str  # "certified" | "statistics-inconsistent" | "solver-failure"
    settings: tuple[str, ...]
    generation_setting: str
    solver_status: str
    solver_gap: float | None
    solver_iterations: int
    epsilon_total: float | None = None
    intervals_used: IntervalStats | None = None
    bitrate_bits_per_second: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_dict(self) -> dict:
        out = {
            "min_entropy_bits": self.min_entropy_bits,
            "p_guess": self.p_guess,
            "p_guess_truncated": self.p_guess_truncated,
            "kappa": self.kappa,
            "mode": self.mode,
            "status": self.status,
            "settings": list(self.settings),
            "generation_setting": self.generation_setting,
            "solver": {
                "status": self.solver_status,
                "duality_gap": self.solver_gap,
                "iterations": self.solver_iterations,
            },
            "epsilon_total": self.epsilon_total,
            "bitrate_bits_per_second": self.bitrate_bits_per_second,
        }
        if self.intervals_used is not None:
            out["intervals"] = {
                "settings": list(self.intervals_used.settings),
                "patterns": [pattern_to_str(a) for a in self.intervals_used.patterns],
                "lower": [[float(v) for v in row] for row in self.intervals_used.lower],
                "upper": [[float(v) for v in row] for row in self.intervals_used.upper],
            }
        out.update(self.detail)
        return out

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def certify_from_statistics(
    states: Mapping[str, BlockDiagonalState | BlockDensity],
    generation_setting: str,
    stats: ConditionalStats | None = None,
    intervals: IntervalStats | None = None,
    kappa: float = 1.0,
    epsilon_total: float | None = None,
    solver_config: SolverConfig | None = None,
    use_facial_reduction: bool = True,
    detail: Mapping | None = None,
) -> CertificationResult:
    """Build, reduce, and solve the guessing program; return the entropy bound.

    `kappa` is the in-truncation weight of the preparations (1 for exact
    states); the returned bound includes the truncation correction.  The
    dual value is the certified upper bound on the guessing probability.
    An infeasible program means the claimed statistics cannot arise from
    any measurement on the given states, reported as its own status with
    zero certified entropy.
    """
    problem = build_guessing_sdp(states, generation_setting,
                                 stats=stats, intervals=intervals)
    reduced = block_reduce(problem)
    solution: SdpSolution | None = None
    if use_facial_reduction:
        fr = facial_reduce(reduced)
        if fr.infeasible:
            return _failed_result(
                "statistics-inconsistent", stats, intervals, kappa,
                epsilon_total, generation_setting, states,
                solver_status="infeasible", message=fr.message, detail=detail)
        solution = solve(fr.problem, solver_config)
    else:
        solution = solve(reduced, solver_config)

    mode = "asymptotic" if stats is not None else "finite"
    base = dict(detail or {})
    base.setdefault("solver_message", solution.message)
    if solution.status == "infeasible":
        return _failed_result("statistics-inconsistent", stats, intervals, kappa,
                              epsilon_total, generation_setting, states,
                              solver_status="infeasible",
                              message=solution.message, detail=detail)
    if solution.status != "optimal":
        return _failed_result("solver-failure", stats, intervals, kappa,
                              epsilon_total, generation_setting, states,
                              solver_status=solution.status,
                              message=solution.message, detail=detail)

    p_trunc = float(min(max(solution.dual_value, 0.0), 1.0))
    p_phys = truncation_correct(p_trunc, kappa)
    h = min_entropy(p_phys)
    return CertificationResult(
        min_entropy_bits=h,
        p_guess=p_phys,
        p_guess_truncated=p_trunc,
        kappa=kappa,
        mode=mode,
        status="certified",
        settings=tuple(states.keys()),
        generation_setting=generation_setting,
        solver_status=solution.status,
        solver_gap=solution.duality_gap,
        solver_iterations=solution.iterations,
        epsilon_total=epsilon_total,
        intervals_used=intervals,
        detail=base,
    )


def _failed_result(status, stats, intervals, kappa, epsilon_total,
                   generation_setting, states, solver_status, message,
                   detail) -> CertificationResult:
    base = dict(detail or {})
    base["solver_message"] = message
    return CertificationResult(
        min_entropy_bits=0.0,
        p_guess=1.0,
        p_guess_truncated=1.0,
        kappa=kappa,
        mode="asymptotic" if stats is not None else "finite",
        status=status,
        settings=tuple(states.keys()),
        generation_setting=generation_setting,
        solver_status=solver_status,
        solver_gap=None,
        solver_iterations=0,
        epsilon_total=epsilon_total,
        intervals_used=intervals,
        detail=base,
    )
