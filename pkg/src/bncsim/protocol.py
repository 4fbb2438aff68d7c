"""Honest two-basis phase protocol: phase choices, bit recovery, sifting.

Bit convention: a click on APD 1 decodes to bit 0, a click on APD 2 to
bit 1 (APD 1 is the constructive port for zero phase difference).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .balanced import BaselineClick
from .errors import EmptySiftedKey, NotSiftable
from .signal_model import RECEIVER_PHASES, PhaseSymbol

ALL_PHASES = (
    PhaseSymbol.ZERO,
    PhaseSymbol.HALF_PI,
    PhaseSymbol.PI,
    PhaseSymbol.THREE_HALF_PI,
)


@dataclass(frozen=True)
class SiftingRecord:
    """Per-gate ledger entry used by the sifting reduction.

    Invariants: ``kept`` iff the bases agree and the gate clicked, and
    ``error`` implies ``kept``.
    """

    gate_index: int
    alice_phase: PhaseSymbol
    bob_phase: PhaseSymbol
    alice_basis: int
    bob_basis: int
    click: BaselineClick
    kept: bool
    error: bool

    def __post_init__(self) -> None:
        basis_match = self.alice_basis == self.bob_basis
        if self.kept != (basis_match and self.click is not BaselineClick.NO_CLICK):
            raise ValueError("kept must equal (bases agree and gate clicked)")
        if self.error and not self.kept:
            raise ValueError("error implies kept")


@dataclass(frozen=True)
class QberSummary:
    sifted: int
    errors: int
    qber: float


def choose_alice_phase(rng: np.random.Generator) -> PhaseSymbol:
    """Uniform draw over the four sender phases."""
    return ALL_PHASES[int(rng.integers(0, 4))]


def choose_bob_phase(rng: np.random.Generator) -> PhaseSymbol:
    """Uniform draw over the two receiver (basis-selector) phases."""
    return RECEIVER_PHASES[int(rng.integers(0, 2))]


def click_to_bit(
    click: BaselineClick, bob_basis: int, alice_phase: PhaseSymbol
) -> tuple[int, bool]:
    """Decode a click into a key bit and flag whether it disagrees with Alice.

    Only defined for sifted gates: the bases must agree and the gate must
    have clicked.
    """
    if click is BaselineClick.NO_CLICK:
        raise ValueError("click_to_bit needs a clicked gate")
    if bob_basis != alice_phase.basis:
        raise NotSiftable(
            f"bases differ (bob={bob_basis}, alice={alice_phase.basis})"
        )
    bit = 0 if click is BaselineClick.CLICK_1 else 1
    return bit, bit != alice_phase.bit


def build_record(
    gate_index: int,
    alice_phase: PhaseSymbol,
    bob_phase: PhaseSymbol,
    click: BaselineClick,
) -> SiftingRecord:
    """Assemble one ledger entry from a finished gate."""
    alice_basis = alice_phase.basis
    bob_basis = bob_phase.basis
    kept = alice_basis == bob_basis and click is not BaselineClick.NO_CLICK
    error = False
    if kept:
        _, error = click_to_bit(click, bob_basis, alice_phase)
    return SiftingRecord(
        gate_index=gate_index,
        alice_phase=alice_phase,
        bob_phase=bob_phase,
        alice_basis=alice_basis,
        bob_basis=bob_basis,
        click=click,
        kept=kept,
        error=error,
    )


def sift_and_score(records: Iterable[SiftingRecord]) -> QberSummary:
    """Reduce the ledger to sifted-key length and error rate."""
    sifted = 0
    errors = 0
    for rec in records:
        if rec.kept:
            sifted += 1
            if rec.error:
                errors += 1
    if sifted == 0:
        raise EmptySiftedKey("no gate survived sifting")
    return QberSummary(sifted=sifted, errors=errors, qber=errors / sifted)
