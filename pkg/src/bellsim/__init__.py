"""Event-by-event simulator of an ideal time-stamped Bell experiment.

Hidden-variable vectors with threshold detection reproduce the quantum
coincidence statistics once a contextual collapse rule links the stations;
the analysis toolkit computes CHSH/CH parameters, runs exact counterfactual
replays, and decides when an outcome table with empty boxes can be condensed
by correlation-preserving reordering.
"""

from .backend import KERNEL_BACKEND
from .engine import (
    HvTrace,
    RolePolicy,
    RoleAssignment,
    RunConfig,
    RunLog,
    SettingsSchedule,
    SlotRecord,
    StationGeometry,
    assign_roles,
    counterfactual_replay,
    run,
    switch_roles_midrun,
)
from .model import (
    AnalyzerAxis,
    GateMemory,
    PairSourceConfig,
    PolarizationVector,
    emit_pair,
    gate_step,
    project,
    station_measure,
)
from .sica import (
    CondensedTable,
    FeasibilityResult,
    Infeasible,
    OutcomeTable,
    PairCountMatrix,
    build_table,
    condense,
    feasibility_by_counts,
    sica_locality_diff,
    verify_ch_bound,
    verify_chsh_bound,
)
from .stats import (
    ChResult,
    ChshResult,
    CoincidenceCounts,
    ScanPoint,
    ch,
    chsh,
    coincidence_rate_pp,
    correlator,
    count_coincidences,
    curve_scan,
    singles_plus_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # model
    "PolarizationVector",
    "AnalyzerAxis",
    "GateMemory",
    "PairSourceConfig",
    "project",
    "emit_pair",
    "gate_step",
    "station_measure",
    # engine
    "SettingsSchedule",
    "RolePolicy",
    "RunConfig",
    "SlotRecord",
    "RunLog",
    "HvTrace",
    "StationGeometry",
    "RoleAssignment",
    "run",
    "counterfactual_replay",
    "switch_roles_midrun",
    "assign_roles",
    # stats
    "CoincidenceCounts",
    "ChshResult",
    "ChResult",
    "ScanPoint",
    "count_coincidences",
    "correlator",
    "chsh",
    "ch",
    "curve_scan",
    "coincidence_rate_pp",
    "singles_plus_fraction",
    # sica
    "OutcomeTable",
    "CondensedTable",
    "PairCountMatrix",
    "Infeasible",
    "FeasibilityResult",
    "build_table",
    "condense",
    "feasibility_by_counts",
    "verify_chsh_bound",
    "verify_ch_bound",
    "sica_locality_diff",
]
