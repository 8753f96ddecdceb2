"""Certified randomness for measurement-device-independent QRNGs.

The toolkit models path-encoded weak-coherent-pulse preparations in a
truncated Fock space, simulates or ingests threshold-detector click
statistics, and lower-bounds the min-entropy of the announced outcomes
by solving a guessing-probability semidefinite program over all
no-signaling measurement strategies consistent with those statistics.
"""

from .fock import (
    BlockDensity,
    BlockDiagonalState,
    ModeOccupation,
    ModeVector,
    PureSectorState,
    TruncatedFockSpace,
    build_wcs_state,
    coherent_sector_state,
    enumerate_basis,
    kappa,
)
from .detector import (
    ConditionalStats,
    DetectorParams,
    IntervalStats,
    MeasurementModel,
    build_threshold_povm,
    enumerate_patterns,
    sample_counts,
    simulate_statistics,
)
from .protocols import (
    Protocol,
    ideal_single_photon_states,
    prepare_states,
    qubit_protocol,
    qutrit_protocol,
)
from .certify import (
    BinningConfig,
    CertificationResult,
    EpsilonBudget,
    bin_to_qubit,
    certified_bitrate,
    certify_from_statistics,
    chernoff_radius,
    intervals_from_counts,
    min_entropy,
    truncation_correct,
)
from .sdp import (
    SdpProblem,
    SdpSolution,
    SolverConfig,
    block_reduce,
    build_guessing_sdp,
    facial_reduce,
    solve,
)
from .pipeline import (
    RunConfig,
    ingest_counts,
    run_bin,
    run_certify,
    run_simulate,
    run_sweep,
)

__version__ = "0.1.0"
