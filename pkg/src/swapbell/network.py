"""Construction of the pre-measurement Gaussian network state.

The network consists of N two-mode squeezers.  One half of each pair (the
``P`` modes, indices 0..N-1) travels to a party; the other half (the ``S``
modes, indices N..2N-1) travels through a lossy channel into an N-port
interferometer whose outputs hit the swap detectors.  Mode ``p_n`` is paired
with mode ``s_n``.

All operations are pure functions over immutable states.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgument
from .gauss import assert_symmetric, symplectic_form
from .params import NoiseConfig


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean Gaussian state of the 2N network modes.

    ``cov`` is the 4N x 4N covariance matrix in interleaved quadrature order;
    the first N modes are the P modes, the last N are the S modes.
    """

    cov: np.ndarray
    n_parties: int

    def __post_init__(self):
        expected = 4 * self.n_parties
        if self.cov.shape != (expected, expected):
            raise InvalidArgument(
                f"covariance must be {expected}x{expected}, got {self.cov.shape}"
            )
        assert_symmetric(self.cov, what="covariance")

    @property
    def n_modes(self):
        return 2 * self.n_parties

    def p_block(self):
        """Covariance of the P modes alone."""
        k = 2 * self.n_parties
        return self.cov[:k, :k]


@dataclass(frozen=True)
class SqueezerBank:
    """N two-mode squeezers with a common squeezing parameter.

    ``phases`` holds the phase angle of each squeezer; the helper identities
    a = sinh(2r), v = cosh(2r) satisfy v^2 - a^2 = 1.
    """

    r: float
    phases: tuple
    n_parties: int

    def __post_init__(self):
        if self.r < 0:
            raise InvalidArgument(f"squeezing parameter must be >= 0, got {self.r}")
        if not 2 <= self.n_parties <= 8:
            raise InvalidArgument(f"party count must be in [2, 8], got {self.n_parties}")
        if len(self.phases) != self.n_parties:
            raise InvalidArgument("one squeezer phase per party required")

    @classmethod
    def symmetric(cls, r, n_parties):
        """All squeezer phases zero."""
        return cls(r=r, phases=(0.0,) * n_parties, n_parties=n_parties)


def build_tmsv_network(bank):
    """Covariance matrix of N fresh two-mode squeezed vacua.

    Diagonal blocks are v*I; the P-S cross block couples p_n to s_n through
    the 2x2 block [[a cos phi, -a sin phi], [-a sin phi, -a cos phi]].
    """
    n = bank.n_parties
    a = math.sinh(2.0 * bank.r)
    v = math.cosh(2.0 * bank.r)
    dim = 2 * n
    cov = np.zeros((2 * dim, 2 * dim))
    cov[:dim, :dim] = v * np.eye(dim)
    cov[dim:, dim:] = v * np.eye(dim)
    r_phi = np.zeros((dim, dim))
    for p, phi in enumerate(bank.phases):
        c, s = a * math.cos(phi), a * math.sin(phi)
        r_phi[2 * p : 2 * p + 2, 2 * p : 2 * p + 2] = [[c, -s], [-s, -c]]
    cov[:dim, dim:] = r_phi
    cov[dim:, :dim] = r_phi
    return GaussianState(cov=cov, n_parties=n)


def interferometer_unitary(n_parties):
    """Complex N x N unitary of the swap interferometer.

    Row j (1-based) and column k (0-based) carry the phase 2*pi*j*k/N; the
    last row is all ones, so N=2 gives the balanced beamsplitter
    [[1, -1], [1, 1]] / sqrt(2).
    """
    if n_parties < 2:
        raise InvalidArgument("interferometer needs at least two ports")
    j = np.arange(1, n_parties + 1)[:, None]
    k = np.arange(n_parties)[None, :]
    return np.exp(2j * np.pi * j * k / n_parties) / math.sqrt(n_parties)


def real_embedding(unitary):
    """Real symplectic matrix acting on interleaved quadratures for a -> U a.

    Each complex entry u = alpha + i*beta becomes the 2x2 block
    [[alpha, -beta], [beta, alpha]].
    """
    n = unitary.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[0::2, 0::2] = unitary.real
    out[0::2, 1::2] = -unitary.imag
    out[1::2, 0::2] = unitary.imag
    out[1::2, 1::2] = unitary.real
    return out


def interferometer_symplectic(n_parties):
    """Real 2N x 2N symplectic-orthogonal matrix of the swap interferometer."""
    return real_embedding(interferometer_unitary(n_parties))


def apply_symplectic(state, sympl, modes=None):
    """Apply a symplectic transformation to a subset of modes (default: all).

    The covariance transforms as S sigma S^T with S acting as the identity on
    unselected modes.
    """
    total = state.n_modes
    if modes is None:
        modes = range(total)
    modes = list(modes)
    if 2 * len(modes) != sympl.shape[0]:
        raise InvalidArgument("matrix size does not match the selected modes")
    omega = symplectic_form(len(modes))
    defect = np.abs(sympl @ omega @ sympl.T - omega).max()
    if defect > 1e-9:
        raise InvalidArgument(f"matrix is not symplectic (defect {defect:.3e})")
    full = np.eye(2 * total)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    full[np.ix_(idx, idx)] = sympl
    cov = full @ state.cov @ full.T
    return GaussianState(cov=(cov + cov.T) / 2, n_parties=state.n_parties)


def apply_loss(state, eta_p, eta_s):
    """Pure-loss channel on every mode: eta_p on P modes, eta_s on S modes.

    Covariance map: G^(1/2) sigma G^(1/2) + (I - G) with G diagonal.
    """
    for name, eta in (("eta_p", eta_p), ("eta_s", eta_s)):
        if not 0.0 <= eta <= 1.0:
            raise InvalidArgument(f"{name} must lie in [0, 1], got {eta}")
    n = state.n_parties
    g = np.concatenate([np.full(2 * n, eta_p), np.full(2 * n, eta_s)])
    root = np.sqrt(g)
    cov = root[:, None] * state.cov * root[None, :] + np.diag(1.0 - g)
    return GaussianState(cov=cov, n_parties=n)


def fold_detector_efficiency(noise, plan):
    """Absorb detector inefficiency into the channels and the displacements.

    A uniform detector efficiency commutes through the interferometer into
    the S channels, and commutes past the displacements on the P side when
    the channel picks up the same factor and every displacement is scaled by
    sqrt(eta_d).  Downstream code then treats all detectors as ideal.
    """
    if noise.eta_d <= 0.0:
        raise InvalidArgument("detector efficiency must be positive")
    if noise.eta_d == 1.0:
        return noise, plan
    folded = noise.replace(
        eta_p=noise.eta_p * noise.eta_d,
        eta_s=noise.eta_s * noise.eta_d,
        eta_d=1.0,
    )
    return folded, plan.scaled(math.sqrt(noise.eta_d))


def prepared_state(bank, noise):
    """Network state just before the swap detectors.

    Squeezers, then channel loss, then the interferometer on the S modes.
    The S channels share one transmission, so applying loss before or after
    the interferometer is equivalent (asserted by tests, not assumed blindly).
    """
    if not isinstance(noise, NoiseConfig):
        raise InvalidArgument("noise must be a NoiseConfig")
    state = build_tmsv_network(bank)
    state = apply_loss(state, noise.eta_p, noise.eta_s)
    s_modes = range(bank.n_parties, 2 * bank.n_parties)
    return apply_symplectic(state, interferometer_symplectic(bank.n_parties), s_modes)
