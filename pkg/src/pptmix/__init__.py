"""PPT-mixture detection of genuine multipartite entanglement for permutationally invariant qubit states."""

from .analysis import (
    BiseparabilityCertificate,
    NoiseToleranceResult,
    PlaneScanResult,
    analyze,
    build_certificate,
    certify_biseparable_3q,
    noise_tolerance,
    scan_plane,
    solve_state,
)
from .block_sdp import BipartiteQ, block_ppt_mixture_sdp, recouple
from .config import Settings, load_settings
from .dense_oracle import dense_ppt_mixture_sdp
from .errors import (
    InvalidArgumentError,
    PptMixError,
    PreconditionError,
    ResourceLimitError,
    SolverError,
)
from .pi_state import (
    PIState,
    StateSpec,
    dicke_state,
    expand_dense,
    ghz_state,
    ghz_w_noise,
    mix,
    project_pi,
    w_state,
    white_noise,
)
from .report import SdpReport
from .spin_structure import SpinStructure, build_structure, cg_table

__all__ = [
    "BiseparabilityCertificate", "BipartiteQ", "InvalidArgumentError", "NoiseToleranceResult",
    "PIState", "PlaneScanResult", "PptMixError", "PreconditionError", "ResourceLimitError",
    "SdpReport", "Settings", "SolverError", "SpinStructure", "StateSpec", "analyze",
    "block_ppt_mixture_sdp", "build_certificate", "build_structure", "certify_biseparable_3q",
    "cg_table", "dense_ppt_mixture_sdp", "dicke_state", "expand_dense", "ghz_state",
    "ghz_w_noise", "load_settings", "mix", "noise_tolerance", "project_pi", "recouple",
    "scan_plane", "solve_state", "w_state", "white_noise",
]
