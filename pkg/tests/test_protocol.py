from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bncsim.balanced import BaselineClick, simulate_gate_balanced
from bncsim.errors import EmptySiftedKey, NotSiftable
from bncsim.protocol import (
    ALL_PHASES,
    QberSummary,
    build_record,
    choose_alice_phase,
    choose_bob_phase,
    click_to_bit,
    sift_and_score,
)
from bncsim.signal_model import (
    RECEIVER_PHASES,
    DetectorParams,
    OpticalPulse,
    PhaseSymbol,
)


class TestPhaseChoices:
    def test_alice_uniform(self):
        rng = np.random.default_rng(1)
        n = 4_000_000
        counts = Counter(choose_alice_phase(rng) for _ in range(n))
        for phase in ALL_PHASES:
            assert abs(counts[phase] - n / 4) < 3000  # multinomial 3.5 sigma

    def test_alice_basis_marginal(self):
        rng = np.random.default_rng(2)
        n = 100_000
        ones = sum(choose_alice_phase(rng).basis for _ in range(n))
        assert abs(ones / n - 0.5) < 0.01

    def test_bob_uniform(self):
        rng = np.random.default_rng(3)
        n = 200_000
        counts = Counter(choose_bob_phase(rng) for _ in range(n))
        assert set(counts) == set(RECEIVER_PHASES)
        assert abs(counts[PhaseSymbol.ZERO] / n - 0.5) < 0.01

    def test_bob_seed_reproducibility(self):
        rng1, rng2 = np.random.default_rng(8), np.random.default_rng(8)
        assert [choose_bob_phase(rng1) for _ in range(10)] == [
            choose_bob_phase(rng2) for _ in range(10)
        ]

    def test_seed_reproducibility(self):
        rng1 = np.random.default_rng(9)
        rng2 = np.random.default_rng(9)
        seq1 = [choose_alice_phase(rng1) for _ in range(10)]
        seq2 = [choose_alice_phase(rng2) for _ in range(10)]
        assert seq1 == seq2


class TestClickToBit:
    def test_click1_zero_phase(self):
        assert click_to_bit(BaselineClick.CLICK_1, 0, PhaseSymbol.ZERO) == (0, False)

    def test_click2_pi_phase(self):
        assert click_to_bit(BaselineClick.CLICK_2, 0, PhaseSymbol.PI) == (1, False)

    def test_click2_zero_phase_is_error(self):
        assert click_to_bit(BaselineClick.CLICK_2, 0, PhaseSymbol.ZERO) == (1, True)

    def test_basis_1_mapping(self):
        assert click_to_bit(BaselineClick.CLICK_1, 1, PhaseSymbol.HALF_PI) == (0, False)
        assert click_to_bit(BaselineClick.CLICK_2, 1, PhaseSymbol.THREE_HALF_PI) == (1, False)

    def test_mismatched_bases_not_siftable(self):
        with pytest.raises(NotSiftable):
            click_to_bit(BaselineClick.CLICK_1, 1, PhaseSymbol.ZERO)

    def test_no_click_rejected(self):
        with pytest.raises(ValueError):
            click_to_bit(BaselineClick.NO_CLICK, 0, PhaseSymbol.ZERO)


class TestSifting:
    def test_all_bases_differ_is_empty(self):
        records = [
            build_record(i, PhaseSymbol.HALF_PI, PhaseSymbol.ZERO, BaselineClick.CLICK_1)
            for i in range(50)
        ]
        assert not any(r.kept for r in records)
        with pytest.raises(EmptySiftedKey):
            sift_and_score(records)

    def test_counts(self):
        records = [
            build_record(0, PhaseSymbol.ZERO, PhaseSymbol.ZERO, BaselineClick.CLICK_1),
            build_record(1, PhaseSymbol.PI, PhaseSymbol.ZERO, BaselineClick.CLICK_1),
            build_record(2, PhaseSymbol.ZERO, PhaseSymbol.ZERO, BaselineClick.NO_CLICK),
            build_record(3, PhaseSymbol.HALF_PI, PhaseSymbol.ZERO, BaselineClick.CLICK_2),
        ]
        summary = sift_and_score(records)
        assert summary == QberSummary(sifted=2, errors=1, qber=0.5)

    @given(seed=st.integers(0, 2**32 - 1))
    def test_qber_invariant_under_permutation(self, seed):
        rng = np.random.default_rng(seed)
        records = [
            build_record(
                i,
                ALL_PHASES[rng.integers(0, 4)],
                RECEIVER_PHASES[rng.integers(0, 2)],
                (BaselineClick.NO_CLICK, BaselineClick.CLICK_1, BaselineClick.CLICK_2)[
                    rng.integers(0, 3)
                ],
            )
            for i in range(100)
        ]
        if not any(r.kept for r in records):
            return
        base = sift_and_score(records)
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert sift_and_score(shuffled) == base


def honest_run(n_gates, mu, params, seed):
    """Record-based honest exchange on the noise-cancelling receiver."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_gates):
        alice = choose_alice_phase(rng)
        bob = choose_bob_phase(rng)
        pulse = OpticalPulse.sample(i, mu, alice, rng)
        _, click, _ = simulate_gate_balanced(pulse, bob, params, rng)
        records.append(build_record(i, alice, bob, click))
    return records


class TestHonestOperation:
    @pytest.mark.parametrize("mu", [0.1, 0.5, 5.0, 100.0])
    def test_qber_exactly_zero_without_darks(self, params, mu):
        quiet = replace(params, dcp_apd1=0.0, dcp_apd2=0.0)
        records = honest_run(8_000, mu, quiet, seed=4)
        summary = sift_and_score(records)
        assert summary.errors == 0
        assert summary.qber == 0.0

    def test_sifting_symmetry(self, params):
        # kept fraction tracks click probability times the 1/2 basis match
        quiet = replace(params, dcp_apd1=0.0, dcp_apd2=0.0)
        records = honest_run(40_000, 1.0, quiet, seed=5)
        matched = [r for r in records if r.alice_basis == r.bob_basis]
        p_click = sum(
            1 for r in matched if r.click is not BaselineClick.NO_CLICK
        ) / len(matched)
        kept = sum(r.kept for r in records) / len(records)
        assert abs(kept - 0.5 * p_click) < 0.01
