"""Conditioning on the swap event: click at the last S detector, silence elsewhere.

With dark counts at probability ``p_dark`` the heralding operator is
``(1 - p_dark)^(N-1) * (prod |0><0|) (I - (1 - p_dark)|0><0|)`` on the S
modes.  Integrating it against the network Gaussian leaves the P modes in a
signed two-term Gaussian mixture whose covariances are Schur complements of
the network covariance.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

import math

from .exceptions import HeraldImpossibleError, InvalidArgument, SingularMatrixError


@dataclass(frozen=True)
class CovariancePartition:
    """Block decomposition of the 2N-mode covariance around the herald mode.

    ``sigma_p`` covers the P modes, ``sigma_sbar`` the non-heralding S modes,
    ``sigma_sn`` the heralding mode; ``k_sbar``/``k_sn`` are the P-S cross
    blocks and ``c`` couples the two S groups.
    """

    sigma_p: np.ndarray
    k_sbar: np.ndarray
    k_sn: np.ndarray
    sigma_sbar: np.ndarray
    c: np.ndarray
    sigma_sn: np.ndarray

    @property
    def k_s(self):
        return np.hstack([self.k_sbar, self.k_sn])

    @property
    def sigma_s(self):
        top = np.hstack([self.sigma_sbar, self.c])
        bot = np.hstack([self.c.T, self.sigma_sn])
        return np.vstack([top, bot])

    def reassemble(self):
        """Rebuild the full covariance; exact inverse of ``partition``."""
        top = np.hstack([self.sigma_p, self.k_sbar, self.k_sn])
        mid = np.hstack([self.k_sbar.T, self.sigma_sbar, self.c])
        bot = np.hstack([self.k_sn.T, self.c.T, self.sigma_sn])
        return np.vstack([top, mid, bot])


@dataclass(frozen=True)
class HeraldedState:
    """Conditional state of the P modes after a successful swap.

    Stored as the signed mixture ``w_sbar * E[v_sbar] + w_s * E[v_s]`` with
    ``w_sbar + w_s = 1`` exactly; ``u_sbar``/``u_s`` are the unnormalized
    weights whose sum is the heralding probability.
    """

    v_sbar: np.ndarray
    v_s: np.ndarray
    u_sbar: float
    u_s: float
    p_dark: float
    n_parties: int

    @property
    def p_success(self):
        return self.u_sbar + self.u_s

    @property
    def w_sbar(self):
        return self.u_sbar / self.p_success

    @property
    def w_s(self):
        return self.u_s / self.p_success


def partition(state):
    """Split the covariance into the blocks used by the conditioning formulas."""
    n = state.n_parties
    if n < 2:
        raise InvalidArgument("need at least two parties")
    cov = state.cov
    ip = 2 * n                # end of P block
    isb = ip + 2 * (n - 1)    # end of the non-heralding S block
    return CovariancePartition(
        sigma_p=cov[:ip, :ip],
        k_sbar=cov[:ip, ip:isb],
        k_sn=cov[:ip, isb:],
        sigma_sbar=cov[ip:isb, ip:isb],
        c=cov[ip:isb, isb:],
        sigma_sn=cov[isb:, isb:],
    )


def _schur_and_halflogdet(sigma_p, k, sigma_cond):
    """Return sigma_p - k (sigma_cond + I)^-1 k^T and log det(sigma_cond+I)/2.

    For a physical covariance the conditioning matrix has eigenvalues >= 1,
    so the Cholesky factorization cannot fail except on broken input.
    """
    gamma = sigma_cond + np.eye(sigma_cond.shape[0])
    try:
        factor = cho_factor(gamma, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            "conditioning block not positive definite",
            condition_number=np.linalg.cond(gamma),
        ) from exc
    half_logdet = float(np.log(np.diag(factor[0])).sum())
    schur = sigma_p - k @ cho_solve(factor, k.T)
    return (schur + schur.T) / 2, half_logdet


def herald_swap(state, p_dark):
    """Condition on the swap pattern and return the two-term mixture.

    The unnormalized weights are
    ``u_sbar = (1-p_dark)^(N-1) 2^(N-1) det(gamma_sbar)^(-1/2)`` and
    ``u_s = -(1-p_dark)^N 2^N det(gamma_s)^(-1/2)``; their sum is the
    success probability of the herald.
    """
    if not 0.0 <= p_dark < 1.0:
        raise InvalidArgument(f"dark-count probability must be in [0, 1), got {p_dark}")
    n = state.n_parties
    blocks = partition(state)
    v_sbar, hld_sbar = _schur_and_halflogdet(blocks.sigma_p, blocks.k_sbar, blocks.sigma_sbar)
    v_s, hld_s = _schur_and_halflogdet(blocks.sigma_p, blocks.k_s, blocks.sigma_s)
    u_sbar = (1.0 - p_dark) ** (n - 1) * math.exp((n - 1) * math.log(2.0) - hld_sbar)
    u_s = -((1.0 - p_dark) ** n) * math.exp(n * math.log(2.0) - hld_s)
    p_success = u_sbar + u_s
    if p_success <= 0.0:
        raise HeraldImpossibleError(
            f"non-positive heralding probability {p_success:.3e}; covariance is broken"
        )
    return HeraldedState(
        v_sbar=v_sbar,
        v_s=v_s,
        u_sbar=u_sbar,
        u_s=u_s,
        p_dark=p_dark,
        n_parties=n,
    )


def herald_probability(state, p_dark):
    """Success probability of the swap; identical to ``herald_swap(...).p_success``."""
    return herald_swap(state, p_dark).p_success
