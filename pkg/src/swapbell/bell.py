"""Bell value of the full-correlator inequality, and the end-to-end pipeline.

The Bell functional is ``2^-N sum_b | sum_n (-1)^<b,n> <M^(n)> |`` over all
binary setting lists; the inner transform is a Walsh-Hadamard transform of
the correlator table.  The local bound is 1 and the quantum bound is
``2^((N-1)/2)``.

Setting lists are packed into integers with party p on bit p.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .exceptions import InvalidArgument
from .herald import herald_swap
from .measurement import correlator_table, plan_from_noise
from .network import SqueezerBank, fold_detector_efficiency, prepared_state


def bell_value(correlators):
    """Bell value from the complete table of 2^N correlators."""
    corr = np.asarray(correlators, dtype=float)
    size = corr.shape[0]
    n = size.bit_length() - 1
    if size != 1 << n or size < 2:
        raise InvalidArgument("correlator table must have 2^N entries")
    transform = hadamard(size) @ corr
    return float(np.abs(transform).sum() / size)


@dataclass(frozen=True)
class ExperimentResult:
    bell: float
    p_success: float
    correlators: np.ndarray
    heralded: object


def evaluate_experiment(bank, noise, plan):
    """Full pipeline: network, loss, interferometer, herald, correlators, Bell.

    Detector efficiency is folded into the channels and the displacements
    before anything is built, so the detectors are treated as ideal.
    """
    if plan.n_parties != bank.n_parties:
        raise InvalidArgument("plan and squeezer bank disagree on the party count")
    noise, plan = fold_detector_efficiency(noise, plan)
    state = prepared_state(bank, noise)
    heralded = herald_swap(state, noise.p_dark_s)
    corr = correlator_table(heralded, plan)
    return ExperimentResult(
        bell=bell_value(corr),
        p_success=heralded.p_success,
        correlators=corr,
        heralded=heralded,
    )


def evaluate_point(n_parties, r, m0, m1, noise, phases=None):
    """Convenience wrapper used by the optimizer and the CLI."""
    if phases is None:
        phases = (0.0,) * n_parties
    bank = SqueezerBank(r=r, phases=tuple(phases), n_parties=n_parties)
    plan = plan_from_noise(m0, m1, phases, noise)
    return evaluate_experiment(bank, noise, plan)
