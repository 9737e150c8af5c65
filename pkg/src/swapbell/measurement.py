"""Displacement-based on/off observables and closed-form correlators.

A party applies one of two displacements and then an on/off detector; click
counts as +1, no click as -1.  Transferring the displacement onto the
observable gives ``M = I - 2(1-p_dark)|-X><-X|``.  Amplitude and phase jitter
of the displacement broaden the projector into a Gaussian with covariance
``Delta = I + V_A (2X)(2X)^T + V_theta (w^T 2X)(w^T 2X)^T`` where ``w`` is the
single-mode symplectic form (small-angle treatment of the phase jitter).

Expectation values against a Gaussian state reduce to the inclusion-exclusion
sum

    f(V, X) = sum_d [-8 pi (1-p_dark)]^(|d|) G[V^(d) + Delta^(d), 0](2 X^(d))

over all binary party-subsets d, with the empty term contributing 1.
"""

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InvalidArgument
from .gauss import OMEGA_1, normal_pdf, quad_indices

def rotation(angle):
    """Counter-clockwise rotation of a phase-space 2-vector."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def noisy_disp_cov(disp, v_a, v_theta):
    """Effective 2x2 projector covariance for a jittered displacement."""
    if v_a < 0 or v_theta < 0:
        raise InvalidArgument("noise variances must be nonnegative")
    x2 = 2.0 * np.asarray(disp, dtype=float)
    ortho = OMEGA_1.T @ x2
    return np.eye(2) + v_a * np.outer(x2, x2) + v_theta * np.outer(ortho, ortho)


@dataclass(frozen=True)
class MeasurementPlan:
    """Per-party displacement pairs plus measurement-noise parameters.

    ``disp0``/``disp1`` are (N, 2) arrays of phase-space displacement
    amplitudes for settings 0 and 1.  ``p_dark`` is the dark-count
    probability of the party detectors.
    """

    disp0: np.ndarray
    disp1: np.ndarray
    phases: tuple
    v_a: float = 0.0
    v_theta: float = 0.0
    p_dark: float = 0.0

    @property
    def n_parties(self):
        return self.disp0.shape[0]

    def displacement(self, party, setting):
        return (self.disp0 if setting == 0 else self.disp1)[party]

    def delta(self, party, setting):
        return noisy_disp_cov(self.displacement(party, setting), self.v_a, self.v_theta)

    def scaled(self, factor):
        """Scale every displacement; used to fold detector efficiency."""
        return replace(self, disp0=self.disp0 * factor, disp1=self.disp1 * factor)

    def swapped_settings(self):
        return replace(self, disp0=self.disp1.copy(), disp1=self.disp0.copy())

    def is_symmetric(self):
        """True when every party holds the same displacement pair."""
        return bool(
            np.ptp(self.disp0, axis=0).max(initial=0.0) == 0.0
            and np.ptp(self.disp1, axis=0).max(initial=0.0) == 0.0
        )


def settings_from_reference(m0, m1, phases, v_a=0.0, v_theta=0.0, p_dark=0.0):
    """Build a plan from reference magnitudes along the q-axis of party 1.

    Party ``p_n`` uses the reference displacements rotated by the squeezer
    phase difference ``phases[0] - phases[n]``; with equal phases all parties
    share the same pair.  The global orientation is an arbitrary gauge.
    """
    phases = tuple(float(p) for p in phases)
    base0 = np.array([float(m0), 0.0])
    base1 = np.array([float(m1), 0.0])
    disp0 = np.array([rotation(phases[0] - phi) @ base0 for phi in phases])
    disp1 = np.array([rotation(phases[0] - phi) @ base1 for phi in phases])
    return MeasurementPlan(
        disp0=disp0, disp1=disp1, phases=phases,
        v_a=v_a, v_theta=v_theta, p_dark=p_dark,
    )


def plan_from_noise(m0, m1, phases, noise):
    """Plan wired to a NoiseConfig (dark counts and displacement jitter)."""
    return settings_from_reference(
        m0, m1, phases, v_a=noise.v_a, v_theta=noise.v_theta, p_dark=noise.p_dark_p
    )


def _subset_density(cov, plan, parties, settings):
    """G[ cov^(sel) + Delta^(sel), 0 ]( 2 X^(sel) ) for the selected parties."""
    if not parties:
        return 1.0
    mask = np.zeros(plan.n_parties, dtype=int)
    mask[list(parties)] = 1
    idx = quad_indices(mask)
    sub = cov[np.ix_(idx, idx)].copy()
    point = np.empty(2 * len(parties))
    for slot, (party, setting) in enumerate(zip(parties, settings)):
        sub[2 * slot : 2 * slot + 2, 2 * slot : 2 * slot + 2] += plan.delta(party, setting)
    for slot, (party, setting) in enumerate(zip(parties, settings)):
        point[2 * slot : 2 * slot + 2] = 2.0 * plan.displacement(party, setting)
    return normal_pdf(sub, np.zeros_like(point), point)


def correlator_against_gaussian(cov, plan, settings):
    """Expectation of the product click observable against one Gaussian term."""
    n = plan.n_parties
    if len(settings) != n:
        raise InvalidArgument("one setting per party required")
    base = -8.0 * math.pi * (1.0 - plan.p_dark)
    total = 0.0
    for d in range(1 << n):
        parties = [p for p in range(n) if d >> p & 1]
        dens = _subset_density(cov, plan, parties, [settings[p] for p in parties])
        total += base ** len(parties) * dens
    return total


def correlator(heralded, plan, settings):
    """Correlator <prod_p M_p> of the heralded state at the given settings."""
    f_sbar = correlator_against_gaussian(heralded.v_sbar, plan, settings)
    f_s = correlator_against_gaussian(heralded.v_s, plan, settings)
    return (heralded.u_sbar * f_sbar + heralded.u_s * f_s) / heralded.p_success


def _party_permutation_invariant(cov, n, tol=1e-10):
    """Check invariance of a P-mode covariance under party permutations.

    A swap of the first two parties plus a cyclic shift generate the full
    symmetric group, so checking those two suffices.
    """
    def permuted(perm):
        idx = np.concatenate([[2 * p, 2 * p + 1] for p in perm])
        return cov[np.ix_(idx, idx)]

    swap = list(range(n))
    swap[0], swap[1] = swap[1], swap[0]
    cyc = list(range(1, n)) + [0]
    scale = max(1.0, np.abs(cov).max())
    return (
        np.abs(permuted(swap) - cov).max() <= tol * scale
        and np.abs(permuted(cyc) - cov).max() <= tol * scale
    )


def subset_term_table(cov, plan):
    """Density of every (subset, per-party setting) combination.

    Keys are (bitmask, settings-tuple for the parties in the mask, ascending
    party order).  3^N entries; shared by the correlator table and the
    outcome-probability table.
    """
    n = plan.n_parties
    table = {}
    for d in range(1 << n):
        parties = [p for p in range(n) if d >> p & 1]
        for sub in itertools.product((0, 1), repeat=len(parties)):
            table[(d, sub)] = _subset_density(cov, plan, parties, sub)
    return table


def correlator_table(heralded, plan, force_general=False):
    """All 2^N correlators as an array indexed by the setting bitmask.

    Bit p of the index holds party p's setting.  When the plan is symmetric
    and both mixture covariances are invariant under party permutations the
    correlator depends only on the number of 1-settings, which cuts the work
    from 4^N to about N^2 Gaussian evaluations; the general path is kept for
    asymmetric configurations and as the reference implementation.
    """
    n = plan.n_parties
    size = 1 << n
    symmetric = (
        not force_general
        and plan.is_symmetric()
        and _party_permutation_invariant(heralded.v_sbar, n)
        and _party_permutation_invariant(heralded.v_s, n)
    )
    out = np.empty(size)
    if symmetric:
        by_weight = np.empty(n + 1)
        for ones in range(n + 1):
            settings = (1,) * ones + (0,) * (n - ones)
            by_weight[ones] = correlator(heralded, plan, settings)
        for idx in range(size):
            out[idx] = by_weight[int(idx).bit_count()]
        return out

    tbl_sbar = subset_term_table(heralded.v_sbar, plan)
    tbl_s = subset_term_table(heralded.v_s, plan)
    base = -8.0 * math.pi * (1.0 - plan.p_dark)
    masks = [[p for p in range(n) if d >> p & 1] for d in range(size)]
    coeffs = [base ** len(m) for m in masks]
    for idx in range(size):
        n_bits = [(idx >> p) & 1 for p in range(n)]
        f_sbar = 0.0
        f_s = 0.0
        for d in range(size):
            key = (d, tuple(n_bits[p] for p in masks[d]))
            f_sbar += coeffs[d] * tbl_sbar[key]
            f_s += coeffs[d] * tbl_s[key]
        out[idx] = (heralded.u_sbar * f_sbar + heralded.u_s * f_s) / heralded.p_success
    return out


def sampled_correlator(heralded, plan, settings, n_samples, seed=0):
    """Monte-Carlo correlator with explicitly sampled displacement jitter.

    Draws per-party relative-amplitude and angle perturbations, applies them
    as exact displacements (the same linearized substitution used by the
    closed form), and averages the jitter-free correlator.  Returns
    (mean, standard error).  This is the independent check on the
    closed-form broadened-projector treatment.
    """
    n = plan.n_parties
    rng = np.random.default_rng(seed)
    amp = rng.normal(0.0, math.sqrt(plan.v_a), size=(n_samples, n))
    ang = rng.normal(0.0, math.sqrt(plan.v_theta), size=(n_samples, n))
    disp = np.array([plan.displacement(p, settings[p]) for p in range(n)])
    ortho = disp @ OMEGA_1  # row p: omega^T X_p
    # sample-dependent effective displacements, shape (n_samples, n, 2)
    eff = disp[None, :, :] * (1.0 + amp)[:, :, None] + ortho[None, :, :] * ang[:, :, None]

    base = -8.0 * math.pi * (1.0 - plan.p_dark)
    masks = [[p for p in range(n) if d >> p & 1] for d in range(1 << n)]
    values = np.zeros(n_samples)
    for cov, weight in ((heralded.v_sbar, heralded.u_sbar), (heralded.v_s, heralded.u_s)):
        acc = np.zeros(n_samples)
        for parties in masks:
            if not parties:
                acc += 1.0
                continue
            mask = np.zeros(n, dtype=int)
            mask[parties] = 1
            idx = quad_indices(mask)
            sub = cov[np.ix_(idx, idx)] + np.eye(2 * len(parties))
            inv = np.linalg.inv(sub)
            norm = ((2.0 * math.pi) ** len(parties)) * math.sqrt(np.linalg.det(sub))
            pts = 2.0 * eff[:, parties, :].reshape(n_samples, -1)
            quad = np.einsum("si,ij,sj->s", pts, inv, pts)
            acc += base ** len(parties) * np.exp(-0.5 * quad) / norm
        values += weight * acc
    values /= heralded.p_success
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_samples))
