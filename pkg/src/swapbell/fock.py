"""Brute-force truncated Fock-space simulation of the two-party experiment.

This module is the independent oracle for the Gaussian pipeline: it builds
the squeezed pairs as state vectors, applies loss through Kraus operators,
runs the interferometer as an exact matrix exponential, heralds with the
explicit dark-count operator and measures with coherent-state projectors.
Everything is dense matrix mechanics, so it is slow and limited to small
party numbers (2 by default, 3 without loss), which is exactly its job.

Mode order matches the Gaussian side: p_1 .. p_N, s_1 .. s_N.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .exceptions import HeraldImpossibleError, InvalidArgument, PrecisionError
from .network import interferometer_unitary


def destroy(dim):
    """Single-mode annihilation operator on a (dim)-level truncation."""
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def mode_operator(op, mode, n_modes, dim):
    """Embed a single-mode operator at position ``mode`` of an n-mode space."""
    mats = [np.eye(dim, dtype=complex)] * n_modes
    mats[mode] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def coherent_vector(alpha, dim):
    """Truncated coherent state with the exact (sub-normalized) coefficients."""
    n = np.arange(dim)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, dim))]))
    coeff = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(alpha) - 0.5 * log_fact) \
        if alpha != 0 else np.eye(dim)[0].astype(complex)
    return coeff.astype(complex)


def tmsv_fock(r, phi, cutoff):
    """Two-mode squeezed vacuum as a truncated state vector.

    Fock expansion sum_n lam^n |n, n> with lam = exp(-i phi) tanh(r); the
    sign of the phase matches the covariance-matrix convention used by the
    network builder (verified by test against the covariance).  The reported
    truncation error bound is tanh(r)^(2 (cutoff+1)).
    """
    if cutoff < 3:
        raise InvalidArgument("cutoff must be at least 3")
    dim = cutoff + 1
    lam = np.exp(-1j * phi) * math.tanh(r)
    vec = np.zeros((dim, dim), dtype=complex)
    for n in range(dim):
        vec[n, n] = lam**n
    vec /= np.linalg.norm(vec)
    return vec.reshape(-1)


def tmsv_truncation_error(r, cutoff):
    return math.tanh(r) ** (2 * (cutoff + 1))


def loss_kraus(eta, dim):
    """Kraus operators of the pure-loss channel on one truncated mode."""
    ops = []
    a = destroy(dim)
    n = np.arange(dim)
    damp = np.diag(eta ** (n / 2.0)).astype(complex)
    ak = np.eye(dim, dtype=complex)
    for k in range(dim):
        coeff = (1.0 - eta) ** (k / 2.0) / math.sqrt(math.factorial(k))
        ops.append(coeff * damp @ ak)
        ak = ak @ a
    return ops


def apply_loss_fock(rho, eta, mode, n_modes, dim):
    """Pure-loss channel on one mode of a density operator."""
    if eta == 1.0:
        return rho
    out = np.zeros_like(rho)
    for k in loss_kraus(eta, dim):
        big = mode_operator(k, mode, n_modes, dim)
        out += big @ rho @ big.conj().T
    return out


def passive_unitary_fock(unitary, n_modes, dim):
    """Fock-space unitary implementing the passive transformation a -> U a."""
    herm = logm(unitary) / 1j
    herm = (herm + herm.conj().T) / 2
    a_ops = [mode_operator(destroy(dim), m, n_modes, dim) for m in range(n_modes)]
    gen = np.zeros((dim**n_modes, dim**n_modes), dtype=complex)
    for j in range(n_modes):
        for k in range(n_modes):
            if herm[j, k] != 0:
                gen += herm[j, k] * a_ops[j].conj().T @ a_ops[k]
    # B = exp(+i sum H_jk a_j^dag a_k) satisfies B^dag a B = U a, so the
    # state map rho -> B rho B^dag matches the covariance map S sigma S^T.
    return expm(1j * gen)


@dataclass
class FockExperiment:
    """Exact truncated simulation of the N=2 (optionally lossless N=3) setup."""

    n_parties: int
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 3:
            raise InvalidArgument("cutoff must be at least 3")
        if self.n_parties not in (2, 3):
            raise InvalidArgument("the oracle supports 2 or 3 parties only")
        self.dim = self.cutoff + 1

    # -- state construction -------------------------------------------------

    def network_density(self, bank, eta_p=1.0, eta_s=1.0):
        """Density matrix of all 2N modes after loss and the interferometer."""
        n = self.n_parties
        dim = self.dim
        if bank.n_parties != n:
            raise InvalidArgument("bank party count mismatch")
        err = tmsv_truncation_error(bank.r, self.cutoff)
        if err > 1e-8:
            raise PrecisionError(
                f"truncation error bound {err:.2e} exceeds 1e-8; raise the cutoff"
            )
        if n == 3 and (eta_p != 1.0 or eta_s != 1.0):
            raise InvalidArgument("loss is only supported for the 2-party oracle")

        # pure state over (p_1, s_1, ..., p_N, s_N), then reordered to
        # (p_1..p_N, s_1..s_N)
        psi = None
        for p in range(n):
            pair = tmsv_fock(bank.r, bank.phases[p], self.cutoff)
            psi = pair if psi is None else np.kron(psi, pair)
        perm = [2 * p for p in range(n)] + [2 * p + 1 for p in range(n)]
        psi = np.transpose(psi.reshape([dim] * 2 * n), perm).reshape(-1)

        rho = np.outer(psi, psi.conj())
        for p in range(n):
            rho = apply_loss_fock(rho, eta_p, p, 2 * n, dim)
        for s in range(n):
            rho = apply_loss_fock(rho, eta_s, n + s, 2 * n, dim)

        big_u = passive_unitary_fock(interferometer_unitary(n), n, dim)
        full_u = np.kron(np.eye(dim**n, dtype=complex), big_u)
        rho = full_u @ rho @ full_u.conj().T
        return rho

    # -- heralding -----------------------------------------------------------

    def herald_operator(self, p_dark, fock_resolved=False):
        """The dark-count herald on the S modes.

        ``fock_resolved=True`` builds it from the per-photon-number Bayesian
        weights instead of the closed two-term form; the two must agree.
        """
        dim = self.dim
        n = self.n_parties
        vac = np.zeros((dim, dim), dtype=complex)
        vac[0, 0] = 1.0
        eye = np.eye(dim, dtype=complex)
        if fock_resolved:
            win_dark = (1.0 - p_dark) ** (n - 1) * p_dark
            win_light = (1.0 - p_dark) ** n + win_dark
            last = np.zeros((dim, dim), dtype=complex)
            last[0, 0] = win_dark
            for k in range(1, dim):
                last[k, k] = win_light
            pref = 1.0
        else:
            last = eye - (1.0 - p_dark) * vac
            pref = (1.0 - p_dark) ** (n - 1)
        op = None
        for s in range(n - 1):
            op = vac if op is None else np.kron(op, vac)
        op = last if op is None else np.kron(op, last)
        return pref * op

    def herald(self, rho, p_dark, fock_resolved=False):
        """Return (conditional density on P modes, success probability)."""
        n = self.n_parties
        dp = self.dim**n
        herald_op = self.herald_operator(p_dark, fock_resolved=fock_resolved)
        big = np.kron(np.eye(dp, dtype=complex), herald_op)
        weighted = big @ rho
        # partial trace over the S modes
        w = weighted.reshape(dp, dp, dp, dp)
        cond = np.einsum("ikjk->ij", w)
        p_success = float(np.real(np.trace(cond)))
        if p_success <= 0.0:
            raise HeraldImpossibleError(
                "heralding pattern has zero probability (no squeezing and "
                "no dark counts)")
        return cond / p_success, p_success

    # -- measurement ---------------------------------------------------------

    def click_povm(self, disp, p_dark):
        """(no-click, click) POVM pair for one party after displacement transfer."""
        alpha = -(disp[0] + 1j * disp[1])
        vec = coherent_vector(alpha, self.dim)
        proj = np.outer(vec, vec.conj())
        no_click = (1.0 - p_dark) * proj
        return no_click, np.eye(self.dim, dtype=complex) - no_click

    def correlator(self, rho_c, plan, settings):
        """<prod_p M_p> against the conditional state of the P modes."""
        obs = None
        for p in range(self.n_parties):
            no_click, click = self.click_povm(plan.displacement(p, settings[p]), plan.p_dark)
            m_op = click - no_click
            obs = m_op if obs is None else np.kron(obs, m_op)
        return float(np.real(np.trace(rho_c @ obs)))

    def outcome_probability(self, rho_c, plan, outcomes, settings):
        """P(g | n) with g_p = 1 for a click."""
        op = None
        for p in range(self.n_parties):
            no_click, click = self.click_povm(plan.displacement(p, settings[p]), plan.p_dark)
            elem = click if outcomes[p] else no_click
            op = elem if op is None else np.kron(op, elem)
        return float(np.real(np.trace(rho_c @ op)))
