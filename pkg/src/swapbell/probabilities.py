"""Full outcome distribution P(g | n) over clicks g and settings n.

The closed form mirrors the correlator: for each Gaussian term of the
heralded mixture,

    h_g(V) = [4 pi (1-p_dark)]^(|~g|) sum_b [-4 pi (1-p_dark)]^(|b|)
             G[V^(b+~g) + Delta^(b+~g), 0](2 X^(b+~g))

where b runs over binary lists that vanish wherever g vanishes and ~g is the
bitwise negation.  The table is normalized and no-signalling by construction;
both are still asserted because they are the cheapest possible detectors of
covariance bookkeeping bugs.

Outcome and setting lists are packed into integers with party p on bit p;
g_p = 1 means a click.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError, InvalidArgument
from .measurement import subset_term_table

logger = logging.getLogger(__name__)

#: negatives smaller than this are clamped to zero; larger ones are an error
NEGATIVE_CLAMP = 1e-12


@dataclass(frozen=True)
class OutcomeTable:
    """P(g | n) for all 2^N settings x 2^N outcomes.

    ``probs[n, g]`` uses the bit-packed indices described in the module
    docstring.
    """

    probs: np.ndarray
    n_parties: int

    def __post_init__(self):
        size = 1 << self.n_parties
        if self.probs.shape != (size, size):
            raise InvalidArgument(f"table must be {size}x{size}")

    def normalization_defect(self):
        return float(np.abs(self.probs.sum(axis=1) - 1.0).max())

    def correlators(self):
        """Correlator table implied by the outcome distribution."""
        n = self.n_parties
        signs = np.array([
            (-1) ** (n - int(g).bit_count()) for g in range(1 << n)
        ])
        return self.probs @ signs


def _h_table(cov, plan, n_bits_for):
    """h_g(V) for all (g, n); returns an array indexed [n, g]."""
    n = plan.n_parties
    size = 1 << n
    terms = subset_term_table(cov, plan)
    neg = -4.0 * math.pi * (1.0 - plan.p_dark)
    pos = 4.0 * math.pi * (1.0 - plan.p_dark)
    out = np.empty((size, size))
    full = size - 1
    for g in range(size):
        gbar = full ^ g
        n_gbar = int(gbar).bit_count()
        # b subsets of g; evaluation mask is b | gbar
        subs = []
        b = g
        while True:
            subs.append(b)
            if b == 0:
                break
            b = (b - 1) & g
        for idx in range(size):
            bits = n_bits_for[idx]
            acc = 0.0
            for b in subs:
                mask = b | gbar
                key = (mask, tuple(bits[p] for p in range(n) if mask >> p & 1))
                acc += neg ** int(b).bit_count() * terms[key]
            out[idx, g] = pos**n_gbar * acc
    return out


def outcome_probability(heralded, plan, outcomes, settings):
    """Single entry P(g | n); exact closed form, no table reuse."""
    n = plan.n_parties
    if len(outcomes) != n or len(settings) != n:
        raise InvalidArgument("need one outcome and one setting per party")
    g = sum(int(bool(b)) << p for p, b in enumerate(outcomes))
    h_sbar = _h_table_single(heralded.v_sbar, plan, g, tuple(settings))
    h_s = _h_table_single(heralded.v_s, plan, g, tuple(settings))
    return (heralded.u_sbar * h_sbar + heralded.u_s * h_s) / heralded.p_success


def _h_table_single(cov, plan, g, bits):
    n = plan.n_parties
    size = 1 << n
    full = size - 1
    gbar = full ^ g
    neg = -4.0 * math.pi * (1.0 - plan.p_dark)
    pos = 4.0 * math.pi * (1.0 - plan.p_dark)
    from .measurement import _subset_density

    acc = 0.0
    b = g
    while True:
        mask = b | gbar
        parties = [p for p in range(n) if mask >> p & 1]
        dens = _subset_density(cov, plan, parties, [bits[p] for p in parties])
        acc += neg ** int(b).bit_count() * dens
        if b == 0:
            break
        b = (b - 1) & g
    return pos ** int(gbar).bit_count() * acc


def build_outcome_table(heralded, plan):
    """The complete outcome distribution, clamped and sanity-checked."""
    n = plan.n_parties
    size = 1 << n
    n_bits_for = [tuple((idx >> p) & 1 for p in range(n)) for idx in range(size)]
    h_sbar = _h_table(heralded.v_sbar, plan, n_bits_for)
    h_s = _h_table(heralded.v_s, plan, n_bits_for)
    probs = (heralded.u_sbar * h_sbar + heralded.u_s * h_s) / heralded.p_success
    worst = probs.min()
    if worst < -NEGATIVE_CLAMP:
        raise ConsistencyError(
            f"outcome probability {worst:.3e} is negative beyond rounding noise"
        )
    if worst < 0.0:
        logger.warning("clamping tiny negative probabilities (min %.3e)", worst)
        probs = np.clip(probs, 0.0, None)
    return OutcomeTable(probs=probs, n_parties=n)


def marginalize(table, subset, fixed_setting=0, check_tol=1e-8):
    """Marginal outcome table for the parties listed in ``subset``.

    Outcomes of the remaining parties are summed at a fixed setting
    (default 0 for all).  No-signalling is asserted by recomputing at the
    all-ones setting for the traced-out parties.
    """
    n = table.n_parties
    subset = sorted(subset)
    if not subset or len(subset) > n or any(not 0 <= p < n for p in subset):
        raise InvalidArgument("subset must be a nonempty list of party indices")
    if len(set(subset)) != len(subset):
        raise InvalidArgument("subset has duplicates")
    if len(subset) == n:
        return table
    others = [p for p in range(n) if p not in subset]

    def reduce(fixed):
        k = len(subset)
        size = 1 << k
        probs = np.zeros((size, size))
        for n_small in range(size):
            n_full = sum(((n_small >> i) & 1) << p for i, p in enumerate(subset))
            n_full |= sum(fixed << p for p in others) if fixed else 0
            for g_full in range(1 << n):
                g_small = sum(((g_full >> p) & 1) << i for i, p in enumerate(subset))
                probs[n_small, g_small] += table.probs[n_full, g_full]
        return probs

    lo = reduce(0 if fixed_setting == 0 else 1)
    hi = reduce(1 if fixed_setting == 0 else 0)
    defect = float(np.abs(lo - hi).max())
    if defect > check_tol:
        raise ConsistencyError(
            f"no-signalling violated at {defect:.3e} when tracing out parties {others}"
        )
    return OutcomeTable(probs=lo, n_parties=len(subset))
