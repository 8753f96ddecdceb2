"""Canonical protocol definitions: settings, preparations, device parameters.

A protocol fixes the number of paths, the truncation, the setting labels
(test settings probe the device, one generation setting produces the
certified bits), the detector parameters, and the scheduling bias.  The
reference three-path instrument uses superconducting nanowire detectors
with effective efficiencies 86.2%, 90.0% and 75.1%, dark rates of 19, 9
and 1.3 counts per second gated in 10 ns windows, a 2.2 MHz pulse rate,
and a 97% generation bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .detector import DetectorParams
from .fock import (
    BlockDiagonalState,
    ModeVector,
    PureSectorState,
    TruncatedFockSpace,
    build_wcs_state,
)

__all__ = [
    "Protocol",
    "qutrit_protocol",
    "qubit_protocol",
    "prepare_states",
    "ideal_single_photon_states",
    "NOMINAL_EFFICIENCIES",
    "EFFECTIVE_EFFICIENCIES",
    "DARK_RATES_CPS",
    "WINDOW_NS",
    "REPETITION_RATE_HZ",
    "GENERATION_BIAS",
    "DEFAULT_CUTOFF",
]

NOMINAL_EFFICIENCIES = (0.932, 0.92, 0.80)
EFFECTIVE_EFFICIENCIES = (0.862, 0.900, 0.751)
DARK_RATES_CPS = (19.0, 9.0, 1.3)
WINDOW_NS = 10.0
REPETITION_RATE_HZ = 2.2e6
GENERATION_BIAS = 0.97
DEFAULT_CUTOFF = 3


@dataclass(frozen=True)
class Protocol:
    """Measurement-device-independent randomness protocol description.

    Test setting ``Ti`` sends every photon down path ``i-1``; the
    generation setting ``G`` sends the balanced superposition over all
    paths.  `schedule` lists the per-round probability of each setting in
    `settings` order.
    """

    name: str
    modes: int
    cutoff: int
    detectors: DetectorParams
    schedule: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.modes < 2:
            raise ValueError("need at least two paths")
        if len(self.detectors.efficiencies) != self.modes:
            raise ValueError(f"{len(self.detectors.efficiencies)} detectors for "
                             f"{self.modes} paths")
        if len(self.schedule) != self.modes + 1:
            raise ValueError("schedule needs one entry per setting")
        s = np.asarray(self.schedule, dtype=float)
        if np.any(s < 0) or abs(s.sum() - 1.0) > 1e-9:
            raise ValueError("schedule must be a probability distribution")

    @property
    def test_settings(self) -> tuple[str, ...]:
        return tuple(f"T{i+1}" for i in range(self.modes))

    @property
    def generation_setting(self) -> str:
        return "G"

    @property
    def settings(self) -> tuple[str, ...]:
        return self.test_settings + (self.generation_setting,)

    def space(self) -> TruncatedFockSpace:
        return TruncatedFockSpace(modes=self.modes, cutoff=self.cutoff)

    def beam(self, setting: str) -> ModeVector:
        """Normalized mode vector prepared under a setting."""
        if setting == self.generation_setting:
            return ModeVector.uniform(self.modes)
        tests = self.test_settings
        if setting not in tests:
            raise ValueError(f"unknown setting {setting!r} for protocol {self.name}")
        return ModeVector.basis(self.modes, tests.index(setting))


def _spread_tests(bias: float, n_tests: int) -> tuple[float, ...]:
    rest = (1.0 - bias) / n_tests
    return (rest,) * n_tests + (bias,)


def qutrit_protocol(cutoff: int = DEFAULT_CUTOFF,
                    detectors: DetectorParams | None = None,
                    generation_bias: float = GENERATION_BIAS) -> Protocol:
    """Three-path protocol with the reference instrument's parameters."""
    det = detectors if detectors is not None else DetectorParams.from_rates(
        EFFECTIVE_EFFICIENCIES, DARK_RATES_CPS, WINDOW_NS)
    return Protocol(name="qutrit", modes=3, cutoff=cutoff, detectors=det,
                    schedule=_spread_tests(generation_bias, 3))


def qubit_protocol(cutoff: int = DEFAULT_CUTOFF,
                   detectors: DetectorParams | None = None,
                   kept: Sequence[int] = (1, 2),
                   generation_bias: float = GENERATION_BIAS) -> Protocol:
    """Two-path protocol; by default it inherits the two detectors the
    binned variant keeps (indices 1 and 2 of the three-path instrument)."""
    if detectors is None:
        idx = tuple(kept)
        if len(idx) != 2 or len(set(idx)) != 2 or not all(0 <= i < 3 for i in idx):
            raise ValueError(f"kept must name two of the three detectors, got {kept}")
        detectors = DetectorParams.from_rates(
            tuple(EFFECTIVE_EFFICIENCIES[i] for i in idx),
            tuple(DARK_RATES_CPS[i] for i in idx),
            WINDOW_NS)
    return Protocol(name="qubit", modes=2, cutoff=cutoff, detectors=detectors,
                    schedule=_spread_tests(generation_bias, 2))


def prepare_states(protocol: Protocol, mu: float,
                   renormalize: bool = True) -> dict[str, BlockDiagonalState]:
    """Weak-coherent preparations for every setting at mean photon number mu."""
    space = protocol.space()
    return {x: build_wcs_state(space, protocol.beam(x), mu,
                               renormalize=renormalize, label=x)
            for x in protocol.settings}


def ideal_single_photon_states(modes: int) -> dict[str, BlockDiagonalState]:
    """Exact one-photon preparations on the cutoff-1 space.

    These are the idealized limit the path encoding approximates: test
    setting Ti is the photon in path i-1, G the balanced superposition.
    Useful as analytic references; the guessing probability they certify
    is exactly 1/modes.
    """
    space = TruncatedFockSpace(modes=modes, cutoff=1)
    states: dict[str, BlockDiagonalState] = {}

    def pure(amps, label):
        return BlockDiagonalState(space=space, weights=(0.0, 1.0),
                                  sector_states=(None, PureSectorState(1, amps)),
                                  kappa=1.0, label=label)

    for i in range(modes):
        amps = np.zeros(modes, dtype=complex)
        amps[i] = 1.0
        states[f"T{i+1}"] = pure(amps, f"T{i+1}")
    states["G"] = pure(np.full(modes, 1.0 / np.sqrt(modes), dtype=complex), "G")
    return states
