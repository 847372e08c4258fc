"""Quantum-controlled chain synthesis: CHSH gluing indices, Monte Carlo protocol runs, and claim checks."""

from ._version import __version__
from .chsh import (
    DEFAULT_PRESET,
    FIGURE4,
    PRESETS,
    SECTION2,
    TRIPLET_CAL,
    ConventionPreset,
    PairSpec,
    Participant,
    Sex,
    all_heterosexual_pairs,
    calibrate_convention,
    chsh_operator,
    get_preset,
    gluing_index,
    roster,
    xi_exact,
)
from .claims import ClaimRecord, RunManifest, Verdict, emit_report, load_registry, verify_all
from .optimize import (
    Objective,
    OptimizationResult,
    StrategySpace,
    classical_bound,
    max_biphoton_family,
    max_unrestricted,
    min_all_pairs,
    optimize,
)
from .qcore import PureState, format_state, parse_state
from .synthesis import Chain, GluingTable, ProtocolConfig, exact_glue_fraction, mc_gluing_index, overlay

__all__ = [
    "DEFAULT_PRESET", "FIGURE4", "PRESETS", "SECTION2", "TRIPLET_CAL", "Chain", "ClaimRecord", "ConventionPreset",
    "GluingTable", "Objective", "OptimizationResult", "PairSpec", "Participant", "ProtocolConfig", "PureState",
    "RunManifest", "Sex", "StrategySpace", "Verdict", "__version__", "all_heterosexual_pairs",
    "calibrate_convention", "chsh_operator", "classical_bound", "emit_report", "exact_glue_fraction",
    "format_state", "get_preset", "gluing_index", "load_registry", "max_biphoton_family", "max_unrestricted",
    "mc_gluing_index", "min_all_pairs", "optimize", "overlay", "parse_state", "roster", "verify_all", "xi_exact",
]
