from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bncsim.errors import InconsistentWord
from bncsim.selfdiff import (
    ComparatorWord3,
    SdGateEvent,
    sd_classify,
    sd_comparators,
    sd_event_codes,
    simulate_stream_sd,
)
from bncsim.signal_model import DetectorParams, OpticalPulse, PhaseSymbol


def quiet_params():
    return replace(DetectorParams.default(), dcp_apd1=0.0, dcp_apd2=0.0)


def vacuum(i):
    return OpticalPulse(i, 0.0, PhaseSymbol.ZERO, 0)


def bright(i, rng, mu=500.0):
    return OpticalPulse.sample(i, mu, PhaseSymbol.ZERO, rng)


class TestComparators:
    def test_strong_arrival(self, params):
        word = sd_comparators(2 * params.t_strong, 0.0, params)
        assert word == ComparatorWord3(a=True, b=False, c=True)

    def test_delayed_echo(self, params):
        word = sd_comparators(0.0, 2 * params.t_strong, params)
        assert word == ComparatorWord3(a=False, b=True, c=False)

    def test_silent(self, params):
        assert sd_comparators(0.0, 0.0, params) == ComparatorWord3(False, False, False)

    def test_consecutive_strong_cancel(self, params):
        # different ideal charges, same railed level: the subtraction nulls
        word = sd_comparators(1.2 * params.t_strong, 9 * params.t_strong, params)
        assert word == ComparatorWord3(a=True, b=False, c=False)


class TestClassify:
    @pytest.mark.parametrize(
        "bits,expected",
        [
            ((1, 0, 1), SdGateEvent.STRONG_RISE),
            ((0, 1, 0), SdGateEvent.DELAYED_FALL),
            ((0, 0, 1), SdGateEvent.WEAK_RISE),
            ((1, 0, 0), SdGateEvent.BLINDING_DETECTED),
            ((0, 0, 0), SdGateEvent.NO_EVENT),
        ],
    )
    def test_truth_table(self, bits, expected):
        assert sd_classify(ComparatorWord3(*map(bool, bits))) is expected

    @pytest.mark.parametrize("bits", [(1, 1, 0), (0, 1, 1), (1, 1, 1)])
    def test_unreachable_words_raise(self, bits):
        with pytest.raises(InconsistentWord):
            sd_classify(ComparatorWord3(*map(bool, bits)))


def test_isolated_avalanche_grid(params):
    """Any lone avalanche above t_diff yields one rise then one fall."""
    for amp in np.linspace(params.t_diff, 10.0, 200):
        rise = sd_classify(sd_comparators(amp, 0.0, params))
        fall = sd_classify(sd_comparators(0.0, amp, params))
        assert rise in (SdGateEvent.STRONG_RISE, SdGateEvent.WEAK_RISE)
        assert fall is SdGateEvent.DELAYED_FALL


class TestStream:
    def test_empty_stream(self, rng):
        assert simulate_stream_sd([], quiet_params(), rng) == []

    def test_isolated_avalanche_events(self, rng):
        p = quiet_params()
        pulses = [vacuum(0), vacuum(1), bright(2, rng), vacuum(3), vacuum(4)]
        events = simulate_stream_sd(pulses, p, rng)
        assert events == [
            SdGateEvent.NO_EVENT,
            SdGateEvent.NO_EVENT,
            SdGateEvent.STRONG_RISE,
            SdGateEvent.DELAYED_FALL,
            SdGateEvent.NO_EVENT,
        ]

    def test_blinding_train(self, rng):
        p = quiet_params()
        pulses = [bright(i, rng) for i in range(200)]
        events = simulate_stream_sd(pulses, p, rng)
        assert events[0] is SdGateEvent.STRONG_RISE
        assert all(e is SdGateEvent.BLINDING_DETECTED for e in events[1:])

    def test_gate_index_gap_rejected(self, rng):
        with pytest.raises(ValueError):
            simulate_stream_sd([vacuum(0), vacuum(2)], quiet_params(), rng)

    @given(shift=st.integers(min_value=1, max_value=20), seed=st.integers(0, 2**32 - 1))
    def test_shift_equivariance(self, shift, seed):
        """Prepending empty gates shifts the event stream unchanged."""
        p = quiet_params()
        rng = np.random.default_rng(seed)
        amps = rng.exponential(1.0, 30) * (rng.random(30) < 0.4)
        base = sd_event_codes(amps, p)
        shifted = sd_event_codes(np.concatenate([np.zeros(shift), amps]), p)
        assert (shifted[:shift] == 0).all()
        assert (shifted[shift:] == base).all()


def test_stream_matches_vectorized_classifier(params):
    """The pulse-stream API and the array classifier share one truth table."""
    rng = np.random.default_rng(9)
    amps = np.abs(rng.normal(0.0, 0.5, 500))
    codes = sd_event_codes(amps, params)
    register = 0.0
    for i, amp in enumerate(amps):
        event = sd_classify(sd_comparators(amp, register, params))
        assert event.value == (
            "no_event",
            "strong_rise",
            "delayed_fall",
            "weak_rise",
            "blinding_detected",
        )[codes[i]]
        register = min(amp, params.t_strong)
