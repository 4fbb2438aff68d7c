"""Monte Carlo study of detector blinding on noise-cancelling QKD receivers.

The package simulates a phase-encoded two-way QKD link whose receiver
uses background-noise-cancelling single-photon detectors (balanced twin
APDs or a self-differencing APD), an intercept-and-resend attack that
exploits the cancellation to blind the receiver, and the comparator-based
monitor circuits that expose the attempt.  Closed-form oracles validate
the Monte Carlo output.
"""

__version__ = "0.1.0"

from .analytics import (
    ClickProbabilities,
    LinkBudget,
    attack_qber,
    click_probabilities,
    cm_success_percent,
    ideal_click_rate_diff_phase,
    ideal_click_rate_same_phase,
)
from .attack import (
    AttackCaseRow,
    AttackConfig,
    CaseLabel,
    DetectorKind,
    EveState,
    ExpectedOutcome,
    GateTally,
    Scenario,
    enumerate_cases,
    eve_intercept,
    eve_resend,
    run_attack,
    run_fixed,
)
from .balanced import (
    BaselineClick,
    ComparatorWord4,
    GateEvent,
    baseline_click,
    classify,
    comparator_bank,
    simulate_gate_balanced,
)
from .errors import (
    ConfigError,
    EmptySiftedKey,
    InconsistentWord,
    MissingFluxPoint,
    NonPhysical,
    NotSiftable,
    UndefinedQuantity,
)
from .harness import (
    DEFAULT_FLUX_GRID,
    LANDMARK_FLUX_GRID,
    ReportRow,
    RunReport,
    SweepSpec,
    emit_report,
    load_report_rows,
    run_sweep,
    verify_landmarks,
)
from .protocol import (
    QberSummary,
    SiftingRecord,
    build_record,
    choose_alice_phase,
    choose_bob_phase,
    click_to_bit,
    sift_and_score,
)
from .selfdiff import (
    ComparatorWord3,
    SdGateEvent,
    sd_classify,
    sd_comparators,
    simulate_stream_sd,
)
from .signal_model import (
    ArmCounts,
    DetectorParams,
    OpticalPulse,
    PhaseSymbol,
    avalanche_amplitude,
    dark_fire,
    detect,
    route_photons,
)
