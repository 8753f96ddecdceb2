"""Guessing-probability SDP: problem containers, builder, reductions, solver."""

from .build import (
    FacialReduction,
    block_reduce,
    build_guessing_sdp,
    facial_reduce,
    mvar,
    qvar,
)
from .ipm import (
    SdpSolution,
    SolverConfig,
    available_backends,
    register_backend,
    solve,
)
from .problem import (
    HermitianBlock,
    LinearConstraint,
    PsdVariable,
    ScalarVariable,
    SdpProblem,
    problem_to_json,
    smat,
    svec,
    symkron,
)

__all__ = [
    "FacialReduction",
    "block_reduce",
    "build_guessing_sdp",
    "facial_reduce",
    "mvar",
    "qvar",
    "SdpSolution",
    "SolverConfig",
    "available_backends",
    "register_backend",
    "solve",
    "HermitianBlock",
    "LinearConstraint",
    "PsdVariable",
    "ScalarVariable",
    "SdpProblem",
    "problem_to_json",
    "smat",
    "svec",
    "symkron",
]
