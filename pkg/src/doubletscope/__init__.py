"""Doublet spectroscopy of two emitters on a closed ring waveguide.

Reduces the single-excitation problem to a pair of real arrowhead
matrices (one per reflection sector), solves them through the secular
equation, and tracks the highest-emitter-weight state of each sector
across an emitter-frequency scan to locate and characterize the
quasi-degenerate doublet at the double-resonance point.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .config import RunConfig, parse_config
from .doublet import (
    DoubletCrossing,
    DoubletReport,
    ScanRow,
    best_in_window,
    classify_resonances,
    find_crossing,
    fit_doublet,
    isolation_profile,
    sweep,
)
from .eigensolver import (
    EigenPair,
    dense_oracle,
    secular_value,
    solve_all,
    solve_window,
)
from .errors import (
    BranchJumpError,
    ConfigError,
    ConvergenceError,
    CrossingBracketError,
    NumericalError,
    PoleHitError,
    UndefinedConfinementError,
)
from .model import (
    ResonanceLadder,
    SystemParams,
    form_factor,
    fundamental_pair,
    long_resonance,
    mode_frequency,
    params_key,
    resonances_in_window,
    short_resonance,
)
from .observables import (
    AmplitudeProfile,
    SingleExcitationState,
    confinement_ratio,
    deflated_state,
    emitter_probability,
    photon_amplitude,
    profile_mismatch,
    resolvent_profile,
    sector_state,
)
from .sectors import (
    ArrowheadSector,
    SectorLabel,
    arrowhead_matrix,
    build_sector,
    embed_deflated,
    embed_full,
    full_residual,
    resonance_sector,
    synthetic_sector,
)

__all__ = [
    "BACKEND",
    "__version__",
    "AmplitudeProfile",
    "ArrowheadSector",
    "BranchJumpError",
    "ConfigError",
    "ConvergenceError",
    "CrossingBracketError",
    "DoubletCrossing",
    "DoubletReport",
    "EigenPair",
    "NumericalError",
    "PoleHitError",
    "ResonanceLadder",
    "RunConfig",
    "ScanRow",
    "SectorLabel",
    "SingleExcitationState",
    "SystemParams",
    "UndefinedConfinementError",
    "arrowhead_matrix",
    "best_in_window",
    "build_sector",
    "classify_resonances",
    "confinement_ratio",
    "deflated_state",
    "dense_oracle",
    "embed_deflated",
    "embed_full",
    "emitter_probability",
    "find_crossing",
    "fit_doublet",
    "form_factor",
    "full_residual",
    "fundamental_pair",
    "isolation_profile",
    "long_resonance",
    "mode_frequency",
    "params_key",
    "parse_config",
    "photon_amplitude",
    "profile_mismatch",
    "resolvent_profile",
    "resonance_sector",
    "resonances_in_window",
    "secular_value",
    "sector_state",
    "short_resonance",
    "solve_all",
    "solve_window",
    "sweep",
    "synthetic_sector",
]
