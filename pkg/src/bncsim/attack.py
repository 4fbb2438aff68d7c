"""Intercept-and-resend attack with detector blinding, and the honest twin.

The resender measures the sender's phase with her own receiver, then fires
a bright pulse carrying the guessed phase at the legitimate receiver.
When her guess basis matches the receiver's basis she controls the click;
when the bases differ the bright pulse splits between the arms and, on a
noise-cancelling detector, the simultaneous avalanches cancel and the
gate goes silent instead of producing the 50/50 error clicks that would
raise the sifted error rate.

The per-gate pipeline is embarrassingly parallel, so the engine runs on
numpy arrays in shards; shard results merge by plain field-wise addition,
making the aggregate independent of how shards are grouped over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional

import numpy as np

from .balanced import comparator_arrays, event_codes
from .errors import ConfigError
from .signal_model import (
    RECEIVER_PHASES,
    DetectorParams,
    OpticalPulse,
    PhaseSymbol,
)

ALL_PHASES = (
    PhaseSymbol.ZERO,
    PhaseSymbol.HALF_PI,
    PhaseSymbol.PI,
    PhaseSymbol.THREE_HALF_PI,
)


class Scenario(str, Enum):
    HONEST = "honest"
    ATTACK_NO_CM = "attack_no_cm"
    ATTACK_CM = "attack_cm"
    BLINDING_ONLY = "blinding_only"


class DetectorKind(str, Enum):
    BASELINE_TWO_APD = "baseline_two_apd"
    BALANCED_BNC = "balanced_bnc"
    SELF_DIFFERENCING = "self_differencing"


class CaseLabel(str, Enum):
    A = "A"  # matched guess basis, controlled click
    B = "B"  # matched guess basis, click lost to finite efficiency
    C = "C"  # mismatched guess basis, 50/50 split


class ExpectedOutcome(str, Enum):
    DETERMINISTIC_1 = "deterministic_apd1"
    DETERMINISTIC_2 = "deterministic_apd2"
    SPLIT_50 = "split_50_50"


@dataclass(frozen=True)
class EveState:
    """Outcome of one intercept: which of Eve's APDs fired and her guess."""

    evebob_basis: int
    evebob_click: int  # 1 or 2
    guessed_phase: PhaseSymbol
    resend_mu: float

    def __post_init__(self) -> None:
        if self.evebob_basis not in (0, 1):
            raise ValueError("evebob_basis must be 0 or 1")
        if self.evebob_click not in (1, 2):
            raise ValueError("evebob_click must be 1 or 2")
        if self.guessed_phase.basis != self.evebob_basis:
            raise ValueError("guessed phase must lie in the measurement basis")
        if self.resend_mu < 0.0:
            raise ValueError("resend_mu must be non-negative")


def eve_intercept(
    alice_phase: PhaseSymbol,
    evebob_basis: int,
    resend_mu: float,
    rng: np.random.Generator,
) -> EveState:
    """Measure the sender's phase with the resender's own receiver.

    Her hardware is taken as ideal (bright pulses, unit efficiency, no
    dark counts): a matched basis reads the phase exactly, a mismatched
    basis clicks 50/50 and she guesses the phase consistent with the
    click.
    """
    if evebob_basis not in (0, 1):
        raise ValueError("evebob_basis must be 0 or 1")
    if alice_phase.basis == evebob_basis:
        guess = alice_phase
        click = 1 + alice_phase.bit
    else:
        coin = int(rng.integers(0, 2))
        guess = PhaseSymbol(evebob_basis + 2 * coin)
        click = 1 + coin
    return EveState(evebob_basis, click, guess, resend_mu)


def eve_resend(
    state: EveState, rng: np.random.Generator, gate_index: int = 0
) -> OpticalPulse:
    """Fire the bright resend pulse carrying the guessed phase."""
    if state.resend_mu <= 0.0:
        raise ValueError("resend_mu must be positive to resend")
    return OpticalPulse.sample(gate_index, state.resend_mu, state.guessed_phase, rng)


@dataclass(frozen=True)
class AttackCaseRow:
    """One row of the sifting-case enumeration."""

    alice_phase: PhaseSymbol
    evebob_basis: int
    eve_apd: int
    evealice_phase: PhaseSymbol
    bob_phase: PhaseSymbol
    expected_outcome: ExpectedOutcome
    case_label: CaseLabel


def enumerate_cases() -> list[AttackCaseRow]:
    """All 16 sifting-relevant combinations of sender phase, guess basis,
    and receiver basis.

    The receiver's basis is pinned to the sender's (other combinations
    are discarded in sifting).  Matched guess bases contribute a
    controlled row (case A) and its detection-loss twin (case B);
    mismatched bases contribute one 50/50 row per resender click, giving
    eight case-C rows.
    """
    rows: list[AttackCaseRow] = []
    for alice in ALL_PHASES:
        bob = RECEIVER_PHASES[alice.basis]
        for eve_basis in (0, 1):
            if alice.basis == eve_basis:
                outcome = (
                    ExpectedOutcome.DETERMINISTIC_1
                    if alice.minus(bob) == PhaseSymbol.ZERO
                    else ExpectedOutcome.DETERMINISTIC_2
                )
                for label in (CaseLabel.A, CaseLabel.B):
                    rows.append(
                        AttackCaseRow(
                            alice_phase=alice,
                            evebob_basis=eve_basis,
                            eve_apd=1 + alice.bit,
                            evealice_phase=alice,
                            bob_phase=bob,
                            expected_outcome=outcome,
                            case_label=label,
                        )
                    )
            else:
                for coin in (0, 1):
                    rows.append(
                        AttackCaseRow(
                            alice_phase=alice,
                            evebob_basis=eve_basis,
                            eve_apd=1 + coin,
                            evealice_phase=PhaseSymbol(eve_basis + 2 * coin),
                            bob_phase=bob,
                            expected_outcome=ExpectedOutcome.SPLIT_50,
                            case_label=CaseLabel.C,
                        )
                    )
    return rows


@dataclass
class GateTally:
    """Aggregate counters of one run (or one shard); merge with ``+``."""

    gates: int = 0
    pe1: int = 0  # detected signal photons per arm
    pe2: int = 0
    fired1: int = 0  # gates whose arm avalanched (photon or dark)
    fired2: int = 0
    dark1: int = 0
    dark2: int = 0
    weak: int = 0  # avalanche amplitude census, both arms pooled
    strong: int = 0
    diff1: int = 0  # difference-comparator clicks (baseline readout)
    diff2: int = 0
    blind: int = 0  # monitor blinding flags
    weak_coinc: int = 0  # both arms fired yet no event: cancelled weak pair
    doubles_discarded: int = 0
    casec_gates: int = 0  # gates with guess basis != receiver basis
    casec_diff1: int = 0
    casec_diff2: int = 0
    casec_blind: int = 0
    sifted: int = 0
    errors: int = 0

    def __add__(self, other: "GateTally") -> "GateTally":
        merged = GateTally()
        for f in fields(GateTally):
            setattr(merged, f.name, getattr(self, f.name) + getattr(other, f.name))
        return merged

    @property
    def qber(self) -> float:
        return self.errors / self.sifted if self.sifted else math.nan


@dataclass(frozen=True)
class AttackConfig:
    """One run of the gate pipeline.

    ``case_filter`` conditions the guess-basis draw: ``{"C"}`` forces a
    basis mismatch every gate, ``{"A"}``/``{"B"}``/``{"A","B"}`` force a
    match (A and B share configurations; B is the detection-loss branch).
    ``cm_enabled`` controls whether the monitor counters accumulate; the
    physics is identical either way.
    """

    n_pulses: int
    resend_mu: float
    scenario: Scenario = Scenario.ATTACK_CM
    detector: DetectorKind = DetectorKind.BALANCED_BNC
    cm_enabled: bool = True
    case_filter: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if self.n_pulses <= 0:
            raise ConfigError("n_pulses must be positive")
        if self.resend_mu < 0.0:
            raise ConfigError("resend_mu must be non-negative")
        if self.detector is DetectorKind.SELF_DIFFERENCING:
            raise ConfigError(
                "the self-differencing receiver is not wired into the gate "
                "pipeline; use the harness stream runner"
            )
        if self.cm_enabled and self.detector is not DetectorKind.BALANCED_BNC:
            raise ConfigError("the blinding monitor exists only on the balanced receiver")
        if self.case_filter is not None:
            bad = set(self.case_filter) - {"A", "B", "C"}
            if bad:
                raise ConfigError(f"unknown case labels in filter: {sorted(bad)}")
            if self.scenario is Scenario.BLINDING_ONLY:
                raise ConfigError("blinding_only ignores case filters")


def _forced_mismatch(case_filter: Optional[frozenset[str]]) -> Optional[bool]:
    """None: unconstrained; True: force basis mismatch; False: force match."""
    if not case_filter:
        return None
    has_c = "C" in case_filter
    has_ab = bool(set(case_filter) & {"A", "B"})
    if has_c and has_ab:
        return None
    return has_c


def sift_counts(
    alice_basis: np.ndarray,
    alice_bit: np.ndarray,
    bob_basis: np.ndarray,
    click1: np.ndarray,
    click2: np.ndarray,
) -> tuple[int, int]:
    """Array-level sifting reduction: (kept gates, error gates).

    Same contract as building per-gate records and scoring them: a gate is
    kept when the bases agree and it clicked, and errs when the decoded
    bit (APD 1 -> 0, APD 2 -> 1) disagrees with the sender's bit.
    """
    kept = (alice_basis == bob_basis) & (click1 | click2)
    errors = kept & (click2.astype(np.int64) != alice_bit)
    return int(kept.sum()), int(errors.sum())


def simulate_block(
    config: AttackConfig, params: DetectorParams, rng: np.random.Generator
) -> GateTally:
    """Simulate ``config.n_pulses`` gates in one vectorized block."""
    n = config.n_pulses
    mu = config.resend_mu
    scenario = config.scenario

    if scenario is Scenario.BLINDING_ONLY:
        # pure blinding characterization: conjugate-basis flux every gate
        alice_bit = np.zeros(n, dtype=np.int64)
        alice_basis = np.zeros(n, dtype=np.int64)
        bob_basis = np.zeros(n, dtype=np.int64)
        send_q = np.ones(n, dtype=np.int64)
        eve_mismatch = np.ones(n, dtype=bool)
    else:
        mismatch = _forced_mismatch(config.case_filter)
        bob_basis = rng.integers(0, 2, n)
        alice_bit = rng.integers(0, 2, n)
        if scenario is Scenario.HONEST:
            if mismatch is None:
                alice_basis = rng.integers(0, 2, n)
            else:
                alice_basis = bob_basis ^ 1 if mismatch else bob_basis.copy()
            send_q = alice_basis + 2 * alice_bit
            eve_mismatch = alice_basis != bob_basis
        else:
            alice_basis = rng.integers(0, 2, n)
            if mismatch is None:
                eve_basis = rng.integers(0, 2, n)
            else:
                eve_basis = bob_basis ^ 1 if mismatch else bob_basis.copy()
            alice_q = alice_basis + 2 * alice_bit
            coin = rng.integers(0, 2, n)
            same = alice_basis == eve_basis
            send_q = np.where(same, alice_q, eve_basis + 2 * coin)
            eve_mismatch = eve_basis != bob_basis

    delta_q = (send_q - bob_basis) % 4

    photons = rng.poisson(mu, n) if mu > 0.0 else np.zeros(n, dtype=np.int64)
    split = rng.binomial(photons, 0.5)
    n1 = np.where(delta_q == 0, photons, np.where(delta_q == 2, 0, split))
    n2 = photons - n1
    det1 = rng.binomial(n1, params.qe)
    det2 = rng.binomial(n2, params.qe)
    dark1 = rng.random(n) < params.dcp_apd1
    dark2 = rng.random(n) < params.dcp_apd2
    k1 = det1 + dark1
    k2 = det2 + dark2
    fired1 = k1 > 0
    fired2 = k2 > 0

    tally = GateTally(
        gates=n,
        pe1=int(det1.sum()),
        pe2=int(det2.sum()),
        fired1=int(fired1.sum()),
        fired2=int(fired2.sum()),
        dark1=int(dark1.sum()),
        dark2=int(dark2.sum()),
        casec_gates=int(eve_mismatch.sum()),
    )

    if config.detector is DetectorKind.BASELINE_TWO_APD:
        click1 = fired1 & ~fired2
        click2 = fired2 & ~fired1
        tally.doubles_discarded = int((fired1 & fired2).sum())
    else:
        amp1 = params.gain_mean * rng.standard_gamma(k1)
        amp2 = params.gain_mean * rng.standard_gamma(k2)
        a, b, c, d = comparator_arrays(amp1, amp2, params)
        event_codes(a, b, c, d)  # raises on any unreachable word
        click1 = c
        click2 = d
        blind = (a | b) & ~c & ~d
        no_event = ~a & ~b & ~c & ~d
        tally.weak = int((fired1 & ~a).sum() + (fired2 & ~b).sum())
        tally.strong = int(a.sum() + b.sum())
        tally.diff1 = int(c.sum())
        tally.diff2 = int(d.sum())
        tally.weak_coinc = int((fired1 & fired2 & no_event).sum())
        tally.casec_diff1 = int((c & eve_mismatch).sum())
        tally.casec_diff2 = int((d & eve_mismatch).sum())
        if config.cm_enabled:
            tally.blind = int(blind.sum())
            tally.casec_blind = int((blind & eve_mismatch).sum())

    if scenario is not Scenario.BLINDING_ONLY:
        tally.sifted, tally.errors = sift_counts(
            alice_basis, alice_bit, bob_basis, click1, click2
        )

    return tally


def run_attack(
    config: AttackConfig,
    params: DetectorParams,
    seed_seq: np.random.SeedSequence,
    shard_gates: int = 1_000_000,
) -> GateTally:
    """Run the gate pipeline in shards and merge the counters.

    Shard generators are spawned from ``seed_seq`` up front, so the result
    depends only on the seed and the shard size, not on how shards are
    distributed over workers.
    """
    if shard_gates <= 0:
        raise ConfigError("shard_gates must be positive")
    n_shards = -(-config.n_pulses // shard_gates)
    children = seed_seq.spawn(n_shards)
    tally = GateTally()
    remaining = config.n_pulses
    for child in children:
        block = min(shard_gates, remaining)
        remaining -= block
        shard_config = AttackConfig(
            n_pulses=block,
            resend_mu=config.resend_mu,
            scenario=config.scenario,
            detector=config.detector,
            cm_enabled=config.cm_enabled,
            case_filter=config.case_filter,
        )
        tally = tally + simulate_block(
            shard_config, params, np.random.Generator(np.random.PCG64(child))
        )
    return tally


@dataclass
class FixedStats:
    """Counters of a fixed-phase run (both modulators pinned)."""

    gates: int = 0
    pe1: int = 0
    pe2: int = 0
    fired1: int = 0
    fired2: int = 0
    click1: int = 0
    click2: int = 0
    doubles: int = 0
    no_click: int = 0
    blind: int = 0


def run_fixed(
    send_phase: PhaseSymbol,
    bob_phase: PhaseSymbol,
    mu: float,
    n_gates: int,
    params: DetectorParams,
    seed_seq: np.random.SeedSequence,
    detector: DetectorKind = DetectorKind.BASELINE_TWO_APD,
) -> FixedStats:
    """Run gates with both modulators pinned to fixed phases.

    This is the calibration-style measurement: one configuration, one
    flux, count what each readout reports.
    """
    if n_gates <= 0:
        raise ConfigError("n_gates must be positive")
    if detector is DetectorKind.SELF_DIFFERENCING:
        raise ConfigError("fixed-phase runner supports the two-arm receivers only")
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    delta = send_phase.minus(bob_phase)
    delta_q = np.full(n_gates, delta.value, dtype=np.int64)
    photons = rng.poisson(mu, n_gates) if mu > 0.0 else np.zeros(n_gates, dtype=np.int64)
    split = rng.binomial(photons, 0.5)
    n1 = np.where(delta_q == 0, photons, np.where(delta_q == 2, 0, split))
    n2 = photons - n1
    det1 = rng.binomial(n1, params.qe)
    det2 = rng.binomial(n2, params.qe)
    dark1 = rng.random(n_gates) < params.dcp_apd1
    dark2 = rng.random(n_gates) < params.dcp_apd2
    k1 = det1 + dark1
    k2 = det2 + dark2
    fired1 = k1 > 0
    fired2 = k2 > 0

    stats = FixedStats(
        gates=n_gates,
        pe1=int(det1.sum()),
        pe2=int(det2.sum()),
        fired1=int(fired1.sum()),
        fired2=int(fired2.sum()),
    )
    if detector is DetectorKind.BASELINE_TWO_APD:
        click1 = fired1 & ~fired2
        click2 = fired2 & ~fired1
        stats.doubles = int((fired1 & fired2).sum())
    else:
        amp1 = params.gain_mean * rng.standard_gamma(k1)
        amp2 = params.gain_mean * rng.standard_gamma(k2)
        a, b, c, d = comparator_arrays(amp1, amp2, params)
        event_codes(a, b, c, d)
        click1, click2 = c, d
        stats.doubles = int((fired1 & fired2).sum())
        stats.blind = int(((a | b) & ~c & ~d).sum())
    stats.click1 = int(click1.sum())
    stats.click2 = int(click2.sum())
    stats.no_click = int((~click1 & ~click2).sum())
    return stats


@dataclass(frozen=True)
class CaseRowResult:
    row: AttackCaseRow
    mu: float
    gates: int
    observed: float
    expected: str
    matched: bool


# Per-kind check fluxes: controlled rows at saturating flux, loss rows at
# single-photon flux, split rows in the linear regime.
CASE_A_MU = 500.0
CASE_B_MU = 1.0
CASE_C_MU = 0.1
CASE_A_GATES = 200_000
CASE_B_GATES = 200_000
CASE_C_GATES = 4_000_000


def evaluate_case_row(
    row: AttackCaseRow,
    params: DetectorParams,
    seed_seq: np.random.SeedSequence,
    gates: Optional[int] = None,
) -> CaseRowResult:
    """Simulate one enumeration row and check it against its expectation.

    Case A: at mu=500 at least 99.9% of clicking gates land on the
    expected APD alone.  Case B: at mu=1 the no-click fraction matches
    exp(-mu*qe) within four binomial sigma.  Case C: at mu=0.1 each side
    takes 0.50 +/- 0.01 of the single clicks.
    """
    if row.case_label is CaseLabel.A:
        mu, n = CASE_A_MU, gates or CASE_A_GATES
    elif row.case_label is CaseLabel.B:
        mu, n = CASE_B_MU, gates or CASE_B_GATES
    else:
        mu, n = CASE_C_MU, gates or CASE_C_GATES
    stats = run_fixed(row.evealice_phase, row.bob_phase, mu, n, params, seed_seq)

    if row.case_label is CaseLabel.A:
        expected_clicks = (
            stats.click1
            if row.expected_outcome is ExpectedOutcome.DETERMINISTIC_1
            else stats.click2
        )
        total = stats.click1 + stats.click2 + stats.doubles
        frac = expected_clicks / total if total else 0.0
        return CaseRowResult(
            row, mu, n, frac, "single-sided fraction >= 0.999", frac >= 0.999
        )
    if row.case_label is CaseLabel.B:
        p_none = math.exp(-mu * params.qe)
        frac = stats.no_click / stats.gates
        sigma = math.sqrt(p_none * (1.0 - p_none) / stats.gates)
        ok = abs(frac - p_none) <= 4.0 * sigma
        return CaseRowResult(
            row, mu, n, frac, f"no-click fraction {p_none:.4f} +/- 4 sigma", ok
        )
    singles = stats.click1 + stats.click2
    frac = stats.click1 / singles if singles else 0.0
    return CaseRowResult(
        row, mu, n, frac, "APD1 share of singles in 0.50 +/- 0.01", abs(frac - 0.5) <= 0.01
    )
