"""Batch workflows around the certification core.

Everything here is file-facing plumbing: JSON run configurations, a small
CSV format for click counts, and the simulate / certify / sweep / bin
orchestration used by the command line front end.  The physics lives in
`protocols`, `detector`, and `certify`; this module only wires them to
disk in a reproducible way (fixed seeds give byte-identical outputs).
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .certify import (BinningConfig, CertificationResult, EpsilonBudget,
                      bin_to_qubit, certify_from_statistics,
                      intervals_from_counts)
from .detector import (ConditionalStats, DetectorParams, build_threshold_povm,
                       enumerate_patterns, sample_counts, simulate_statistics)
from .fock import kappa
from .protocols import (DARK_RATES_CPS, EFFECTIVE_EFFICIENCIES, WINDOW_NS,
                        GENERATION_BIAS, DEFAULT_CUTOFF, Protocol,
                        prepare_states, qubit_protocol, qutrit_protocol)
from .sdp import (SolverConfig, block_reduce, build_guessing_sdp,
                  problem_to_json)

_CONFIG_KEYS = {
    "modes", "cutoff", "mu", "mu_grid", "efficiencies", "dark_rates_cps",
    "window_ns", "visibility", "generation_bias", "epsilon_total",
    "rounds", "seed", "solver", "out_dir",
}


@dataclass(frozen=True)
class RunConfig:
    """One batch run: protocol parameters plus sampling and output choices.

    `mu` selects a single operating point (simulate / certify / bin);
    `mu_grid` selects a sweep.  Exactly one of them must be given.
    Detector parameters default to the effective efficiencies and dark
    rates of the three-detector setup (sliced to the kept pair for
    `modes=2`).  `epsilon_total` switches certification to finite-round
    interval mode; leaving it unset means asymptotic equality mode.
    """

    modes: int = 3
    cutoff: int = DEFAULT_CUTOFF
    mu: float | None = None
    mu_grid: tuple[float, ...] | None = None
    efficiencies: tuple[float, ...] | None = None
    dark_rates_cps: tuple[float, ...] | None = None
    window_ns: float = WINDOW_NS
    visibility: float = 1.0
    generation_bias: float = GENERATION_BIAS
    epsilon_total: float | None = None
    rounds: int = 0
    seed: int = 0
    solver: SolverConfig | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.modes not in (2, 3):
            raise ValueError(f"modes must be 2 or 3, got {self.modes}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError("cutoff must be a positive integer")
        if (self.mu is None) == (self.mu_grid is None):
            raise ValueError("provide exactly one of mu or mu_grid")
        if self.mu is not None:
            mu = float(self.mu)
            if not np.isfinite(mu) or mu < 0:
                raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
            object.__setattr__(self, "mu", mu)
        if self.mu_grid is not None:
            grid = tuple(float(v) for v in self.mu_grid)
            if not grid:
                raise ValueError("mu_grid must not be empty")
            if any(not np.isfinite(v) or v < 0 for v in grid):
                raise ValueError("mu_grid values must be finite and >= 0")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("mu_grid must be strictly increasing")
            object.__setattr__(self, "mu_grid", grid)
        for name in ("efficiencies", "dark_rates_cps"):
            value = getattr(self, name)
            if value is not None:
                value = tuple(float(v) for v in value)
                if len(value) != self.modes:
                    raise ValueError(f"{name} needs {self.modes} entries")
                object.__setattr__(self, name, value)
        if self.window_ns <= 0:
            raise ValueError("window_ns must be positive")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if not 0.0 < self.generation_bias < 1.0:
            raise ValueError("generation_bias must lie in (0, 1)")
        if self.epsilon_total is not None and not 0.0 < self.epsilon_total < 1.0:
            raise ValueError("epsilon_total must lie in (0, 1)")
        if int(self.rounds) != self.rounds or self.rounds < 0:
            raise ValueError("rounds must be a nonnegative integer")
        object.__setattr__(self, "rounds", int(self.rounds))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        unknown = sorted(set(doc) - _CONFIG_KEYS)
        if unknown:
            raise ValueError(f"{path}: unknown config keys {unknown}")
        kwargs = dict(doc)
        for key in ("mu_grid", "efficiencies", "dark_rates_cps"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(kwargs[key])
        solver = kwargs.pop("solver", None)
        if solver is not None:
            if not isinstance(solver, dict):
                raise ValueError(f"{path}: solver must be a JSON object")
            valid = {f.name for f in dataclasses.fields(SolverConfig)}
            bad = sorted(set(solver) - valid)
            if bad:
                raise ValueError(f"{path}: unknown solver keys {bad}")
            kwargs["solver"] = SolverConfig(**solver)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        for key in ("mu_grid", "efficiencies", "dark_rates_cps"):
            if doc[key] is not None:
                doc[key] = list(doc[key])
        return doc

    def detector_params(self) -> DetectorParams:
        if self.modes == 3:
            eff = self.efficiencies or EFFECTIVE_EFFICIENCIES
            dark = self.dark_rates_cps or DARK_RATES_CPS
        else:
            kept = BinningConfig().kept
            eff = self.efficiencies or tuple(EFFECTIVE_EFFICIENCIES[i] for i in kept)
            dark = self.dark_rates_cps or tuple(DARK_RATES_CPS[i] for i in kept)
        return DetectorParams.from_rates(eff, dark, self.window_ns)

    def protocol(self) -> Protocol:
        if self.modes == 3:
            return qutrit_protocol(self.cutoff, self.detector_params(),
                                   self.generation_bias)
        return qubit_protocol(self.cutoff, self.detector_params(),
                              generation_bias=self.generation_bias)


def _single_mu(config: RunConfig) -> float:
    if config.mu is None:
        raise ValueError("this workflow needs a single mu, not a mu_grid")
    return config.mu


def _grid(config: RunConfig) -> tuple[float, ...]:
    if config.mu_grid is None:
        raise ValueError("sweep needs a mu_grid")
    return config.mu_grid


# ---------------------------------------------------------------------------
# counts files


def _pattern_key(pattern: tuple[int, ...]) -> str:
    return "".join(str(b) for b in pattern)


def write_counts(counts: ConditionalStats, path: str | Path) -> None:
    """Write count statistics as a headered CSV, one row per (setting, pattern)."""
    if counts.kind != "count":
        raise ValueError("write_counts needs count statistics")
    _write_table(counts, path, "count",
                 lambda v: str(int(round(v))))


def write_statistics(stats: ConditionalStats, path: str | Path) -> None:
    """Write probability statistics in the same headered CSV layout."""
    if stats.kind != "probability":
        raise ValueError("write_statistics needs probability statistics")
    _write_table(stats, path, "probability", lambda v: repr(float(v)))


def _write_table(stats, path, column, fmt) -> None:
    lines = [f"# detectors: {len(stats.patterns[0])}",
             f"# settings: {','.join(stats.settings)}",
             f"setting,pattern,{column}"]
    for i, x in enumerate(stats.settings):
        for j, p in enumerate(stats.patterns):
            lines.append(f"{x},{_pattern_key(p)},{fmt(stats.table[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def ingest_counts(path: str | Path) -> ConditionalStats:
    """Parse a counts CSV back into count statistics.

    Missing (setting, pattern) rows are treated as zero counts and
    duplicate rows are summed.  Malformed lines are rejected with their
    line number; so are settings absent from the header.
    """
    path = Path(path)
    detectors: int | None = None
    settings: tuple[str, ...] | None = None
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key = key.strip().lower()
            if key == "detectors":
                try:
                    detectors = int(value.strip())
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: detector count "
                                     f"{value.strip()!r} is not an integer")
                if detectors < 1:
                    raise ValueError(f"{path}: line {lineno}: need at least one detector")
            elif key == "settings":
                settings = tuple(s.strip() for s in value.split(",") if s.strip())
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts == ["setting", "pattern", "count"]:
            continue
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected "
                             f"'setting,pattern,count', got {line!r}")
        rows.append((lineno, parts[0], parts[1], parts[2]))
    if detectors is None:
        raise ValueError(f"{path}: missing '# detectors:' header")
    if not settings:
        raise ValueError(f"{path}: missing '# settings:' header")
    patterns = enumerate_patterns(detectors)
    pattern_index = {_pattern_key(p): j for j, p in enumerate(patterns)}
    setting_index = {x: i for i, x in enumerate(settings)}
    table = np.zeros((len(settings), len(patterns)))
    for lineno, x, pat, count in rows:
        if x not in setting_index:
            raise ValueError(f"{path}: line {lineno}: unknown setting {x!r} "
                             f"(header declares {list(settings)})")
        if pat not in pattern_index:
            raise ValueError(f"{path}: line {lineno}: pattern {pat!r} is not "
                             f"a {detectors}-bit click pattern")
        try:
            value = int(count)
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: count {count!r} "
                             f"is not an integer")
        if value < 0:
            raise ValueError(f"{path}: line {lineno}: negative count")
        table[setting_index[x], pattern_index[pat]] += value
    return ConditionalStats(settings=settings, patterns=patterns,
                            table=table, kind="count")


# ---------------------------------------------------------------------------
# workflows


@dataclass(frozen=True)
class SimulateResult:
    stats: ConditionalStats
    counts: ConditionalStats | None
    written: tuple[str, ...]


def run_simulate(config: RunConfig, out: str | Path | None = None) -> SimulateResult:
    """Model statistics at the configured operating point, optionally sampled.

    With `rounds > 0` the configured schedule is sampled into a counts
    table under `config.seed`.  When `out` is given, the statistics (and
    counts, if any) are written there as CSV.
    """
    mu = _single_mu(config)
    protocol = config.protocol()
    states = prepare_states(protocol, mu)
    model = build_threshold_povm(protocol.space(), protocol.detectors)
    stats = simulate_statistics(states, model, visibility=config.visibility)
    counts = None
    if config.rounds > 0:
        schedule = dict(zip(protocol.settings, protocol.schedule))
        counts = sample_counts(stats, schedule, config.rounds, seed=config.seed)
    written = []
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        stats_path = out / "statistics.csv"
        write_statistics(stats, stats_path)
        written.append(str(stats_path))
        if counts is not None:
            counts_path = out / "counts.csv"
            write_counts(counts, counts_path)
            written.append(str(counts_path))
    return SimulateResult(stats=stats, counts=counts, written=tuple(written))


def run_certify(config: RunConfig, counts: ConditionalStats,
                out: str | Path | None = None) -> CertificationResult:
    """Certify ingested statistics against the configured preparations.

    `epsilon_total` in the config selects finite-round interval mode
    (count data required); otherwise counts are normalized to
    frequencies and certified with equality constraints.  The JSON
    report echoes the full configuration so a third party can rebuild
    the same program.
    """
    mu = _single_mu(config)
    protocol = config.protocol()
    if set(counts.settings) != set(protocol.settings):
        raise ValueError(f"counts cover settings {list(counts.settings)}, "
                         f"protocol needs {list(protocol.settings)}")
    states = prepare_states(protocol, mu)
    kap = kappa(mu, config.cutoff)
    detail = {"config": config.to_dict()}
    if config.epsilon_total is not None:
        if counts.kind != "count":
            raise ValueError("finite-round certification needs count data")
        intervals = intervals_from_counts(
            counts, EpsilonBudget(total=config.epsilon_total))
        result = certify_from_statistics(
            states, protocol.generation_setting, intervals=intervals,
            kappa=kap, epsilon_total=config.epsilon_total,
            solver_config=config.solver, detail=detail)
    else:
        result = certify_from_statistics(
            states, protocol.generation_setting, stats=counts.frequencies(),
            kappa=kap, solver_config=config.solver, detail=detail)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(result.to_json(indent=2) + "\n")
    return result


def run_bin(config: RunConfig, counts: ConditionalStats,
            out: str | Path | None = None) -> ConditionalStats:
    """Coarse-grain three-detector data to the kept pair and apply the loss map."""
    binned = bin_to_qubit(counts, seed=config.seed)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        if binned.kind == "count":
            write_counts(binned, out / "binned_counts.csv")
        else:
            write_statistics(binned, out / "binned_statistics.csv")
    return binned


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    h_qutrit: float
    status_qutrit: str
    mu_qubit: float
    h_qubit: float
    status_qubit: str
    # solver duality gaps, kept off the CSV but available for auditing
    gap_qutrit: float | None = None
    gap_qubit: float | None = None


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    written: tuple[str, ...]

    def to_csv(self) -> str:
        lines = ["mu,h_qutrit,status_qutrit,mu_qubit,h_qubit,status_qubit"]
        for p in self.points:
            lines.append(f"{p.mu!r},{p.h_qutrit!r},{p.status_qutrit},"
                         f"{p.mu_qubit!r},{p.h_qubit!r},{p.status_qubit}")
        return "\n".join(lines) + "\n"


def _binned_qubit_protocol(config: RunConfig) -> Protocol:
    kept = BinningConfig().kept
    full = config.detector_params()
    detectors = DetectorParams(
        efficiencies=tuple(full.efficiencies[i] for i in kept),
        dark_probs=tuple(full.dark_probs[i] for i in kept))
    return qubit_protocol(config.cutoff, detectors,
                          generation_bias=config.generation_bias)


def _sweep_point(task: tuple[RunConfig, float]) -> SweepPoint:
    config, mu = task
    protocol = config.protocol()
    states = prepare_states(protocol, mu)
    model = build_threshold_povm(protocol.space(), protocol.detectors)
    stats = simulate_statistics(states, model, visibility=config.visibility)
    try:
        res3 = certify_from_statistics(
            states, protocol.generation_setting, stats=stats,
            kappa=kappa(mu, config.cutoff), solver_config=config.solver)
        h3, status3, gap3 = res3.min_entropy_bits, res3.status, res3.solver_gap
    except Exception as exc:
        h3, status3, gap3 = float("nan"), f"error: {exc}", None

    # the qubit curve reuses the qutrit data, binned and lossy, with the
    # matching scaled-down preparation
    mu_q = 2.0 * mu / 3.0
    try:
        binned = bin_to_qubit(stats)
        qubit = _binned_qubit_protocol(config)
        qstates = prepare_states(qubit, mu_q)
        resq = certify_from_statistics(
            qstates, qubit.generation_setting, stats=binned,
            kappa=kappa(mu_q, config.cutoff), solver_config=config.solver)
        hq, statusq, gapq = resq.min_entropy_bits, resq.status, resq.solver_gap
    except Exception as exc:
        hq, statusq, gapq = float("nan"), f"error: {exc}", None
    return SweepPoint(mu=mu, h_qutrit=h3, status_qutrit=status3,
                      mu_qubit=mu_q, h_qubit=hq, status_qubit=statusq,
                      gap_qutrit=gap3, gap_qubit=gapq)


def run_sweep(config: RunConfig, workers: int | None = None,
              out: str | Path | None = None, plot: bool = True) -> SweepResult:
    """Certify every grid point, qutrit and binned qubit side by side.

    Points run in parallel when `workers > 1`.  Failures at single
    points are recorded in the status columns and do not abort the
    sweep.  Output rows always follow grid order, so a fixed config
    yields byte-identical CSV.
    """
    grid = _grid(config)
    if config.modes != 3:
        raise ValueError("sweep needs modes=3: the qubit column is derived "
                         "by binning the three-detector data")
    tasks = [(config, mu) for mu in grid]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(_sweep_point, tasks))
    else:
        points = tuple(_sweep_point(t) for t in tasks)
    written = []
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "sweep.csv"
        result_tmp = SweepResult(points=points, written=())
        csv_path.write_text(result_tmp.to_csv())
        written.append(str(csv_path))
        if plot:
            svg_path = out / "sweep.svg"
            if _write_sweep_plot(points, svg_path):
                written.append(str(svg_path))
    return SweepResult(points=points, written=tuple(written))


def _write_sweep_plot(points, path) -> bool:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    qutrit = [(p.mu, p.h_qutrit) for p in points if p.status_qutrit == "certified"]
    qubit = [(p.mu_qubit, p.h_qubit) for p in points if p.status_qubit == "certified"]
    if not qutrit and not qubit:
        return False
    plt.rcParams["svg.hashsalt"] = "mdiqrng-sweep"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if qutrit:
        ax.plot(*zip(*qutrit), marker="o", label="qutrit")
    if qubit:
        ax.plot(*zip(*qubit), marker="s", label="binned qubit")
    ax.set_xlabel("mean photon number")
    ax.set_ylabel("certified min-entropy (bits/round)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


# ---------------------------------------------------------------------------
# problem inspection


def sdp_manifest(config: RunConfig, counts: ConditionalStats) -> dict:
    """Dump the (reduced) program a certify run would solve.

    Returns the configuration echo, the statistics actually constrained,
    and the complete reduced problem in self-describing form, ready for
    an external solver to re-solve.
    """
    mu = _single_mu(config)
    protocol = config.protocol()
    states = prepare_states(protocol, mu)
    if config.epsilon_total is not None:
        intervals = intervals_from_counts(
            counts, EpsilonBudget(total=config.epsilon_total))
        problem = build_guessing_sdp(states, protocol.generation_setting,
                                     intervals=intervals)
        data = {"mode": "finite",
                "lower": intervals.lower.tolist(),
                "upper": intervals.upper.tolist()}
    else:
        stats = counts.frequencies()
        problem = build_guessing_sdp(states, protocol.generation_setting,
                                     stats=stats)
        data = {"mode": "asymptotic", "table": stats.table.tolist()}
    data.update({
        "settings": list(counts.settings),
        "patterns": [_pattern_key(p) for p in counts.patterns],
    })
    reduced = block_reduce(problem)
    return {
        "config": config.to_dict(),
        "statistics": data,
        "problem": json.loads(problem_to_json(reduced)),
    }
