#!/usr/bin/env python3
"""Event timeline of the self-differencing monitor under blinding.

Prints the gate-by-gate classification for an isolated bright pulse and
for a continuous blinding train: the isolated avalanche produces a rise
and, one gate later, the delayed-copy fall; the train collapses into
raw-comparator clicks with a silent difference output, the blinded
signature.
"""

from dataclasses import replace

import numpy as np

from bncsim.selfdiff import simulate_stream_sd
from bncsim.signal_model import DetectorParams, OpticalPulse, PhaseSymbol


def timeline(title, pulses, params, rng):
    events = simulate_stream_sd(pulses, params, rng)
    print(f"\n{title}")
    print(f"{'gate':>5} {'photons':>8}  event")
    for pulse, event in zip(pulses, events):
        print(f"{pulse.gate_index:>5} {pulse.sampled_photons:>8}  {event.value}")


def main() -> None:
    params = replace(DetectorParams.default(), dcp_apd1=0.0, dcp_apd2=0.0)
    rng = np.random.default_rng(42)

    vacuum = lambda i: OpticalPulse(i, 0.0, PhaseSymbol.ZERO, 0)  # noqa: E731
    bright = lambda i: OpticalPulse.sample(i, 500.0, PhaseSymbol.ZERO, rng)  # noqa: E731

    isolated = [vacuum(0), vacuum(1), bright(2), vacuum(3), vacuum(4), vacuum(5)]
    timeline("isolated avalanche", isolated, params, rng)

    train = [vacuum(0)] + [bright(i) for i in range(1, 11)] + [vacuum(11), vacuum(12)]
    timeline("blinding train (10 bright gates)", train, params, rng)


if __name__ == "__main__":
    main()
