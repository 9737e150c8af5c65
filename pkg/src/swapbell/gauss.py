"""Phase-space linear algebra and Gaussian characteristic-function primitives.

Conventions used throughout the package:

* quadratures are ordered ``(q_1, p_1, q_2, p_2, ...)`` (interleaved);
* ``[q_k, p_l] = 2i delta_kl``, so the vacuum covariance matrix is the
  identity;
* a Gaussian characteristic term with weight ``w``, covariance ``V`` and
  phase-space center ``x`` evaluates to
  ``w * exp(-1/2 L^T O V O^T L - i (O x)^T L)`` where ``O`` is the symplectic
  form.

Empty (0-dimensional) Gaussian objects are legal and evaluate to 1; the
inclusion-exclusion sums in the measurement layer rely on this.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import InvalidArgument, SingularMatrixError

#: single-mode symplectic form
OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes):
    """Return the 2M x 2M symplectic form, a direct sum of 2x2 blocks."""
    if n_modes < 1:
        raise InvalidArgument(f"need at least one mode, got {n_modes}")
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = OMEGA_1
    return out


def assert_symmetric(mat, rtol=1e-12, what="matrix"):
    scale = max(1.0, float(np.abs(mat).max())) if mat.size else 1.0
    if mat.size and np.abs(mat - mat.T).max() > rtol * scale:
        raise InvalidArgument(f"{what} is not symmetric")


def is_physical(cov, tol=1e-9):
    """Check the uncertainty condition cov + i*Omega >= 0."""
    n_modes = cov.shape[0] // 2
    herm = cov.astype(complex) + 1j * symplectic_form(n_modes)
    eigs = np.linalg.eigvalsh((herm + herm.conj().T) / 2)
    return bool(eigs.min() > -tol)


@dataclass(frozen=True)
class GaussianCharTerm:
    """One weighted Gaussian term of a characteristic function."""

    weight: float
    cov: np.ndarray
    center: np.ndarray

    def __call__(self, lam):
        return char_eval(self, lam)


@dataclass(frozen=True)
class GaussianMixtureChar:
    """Signed mixture of Gaussian characteristic terms.

    Weights may be negative; a normalized state evaluates to 1 at the origin.
    """

    terms: tuple

    def __call__(self, lam):
        return sum(term(lam) for term in self.terms)

    @property
    def total_weight(self):
        return sum(term.weight for term in self.terms)


def char_eval(term, lam):
    """Evaluate one Gaussian characteristic term at the conjugate point ``lam``."""
    lam = np.asarray(lam, dtype=float)
    dim = term.cov.shape[0]
    if lam.shape != (dim,) or term.center.shape != (dim,):
        raise InvalidArgument(
            f"dimension mismatch: cov is {term.cov.shape}, lambda is {lam.shape}"
        )
    if dim == 0:
        return complex(term.weight)
    omega = symplectic_form(dim // 2)
    rotated = omega.T @ lam
    quad = rotated @ term.cov @ rotated
    phase = -1j * (omega @ term.center) @ lam
    return term.weight * np.exp(-0.5 * quad + phase)


def normal_pdf(cov, mean, point):
    """Multivariate normal density with covariance ``cov`` evaluated at ``point``.

    The empty (0-dimensional) case returns 1 by the empty-product convention.
    """
    cov = np.asarray(cov, dtype=float)
    dim = cov.shape[0]
    if dim == 0:
        return 1.0
    delta = np.asarray(point, dtype=float) - np.asarray(mean, dtype=float)
    try:
        factor = cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            "covariance not positive definite", condition_number=np.linalg.cond(cov)
        ) from exc
    diag = np.diag(factor[0])
    if diag.min() <= 1e-12:
        raise SingularMatrixError(
            "covariance numerically singular", condition_number=np.linalg.cond(cov)
        )
    logdet = 2.0 * np.log(diag).sum()
    maha = delta @ cho_solve(factor, delta)
    return float(np.exp(-0.5 * (maha + logdet + dim * np.log(2.0 * np.pi))))


def quad_indices(mask):
    """Expand a per-mode binary mask into interleaved quadrature indices."""
    idx = []
    for k, keep in enumerate(mask):
        if keep:
            idx.extend((2 * k, 2 * k + 1))
    return np.asarray(idx, dtype=int)


def submatrix(cov, mask):
    """Extract the covariance of the modes selected by a binary mask.

    Both quadratures of every selected mode are kept, in their original
    order.  An all-zero mask yields the 0-dimensional matrix.
    """
    cov = np.asarray(cov, dtype=float)
    if 2 * len(mask) != cov.shape[0]:
        raise InvalidArgument(
            f"mask selects {len(mask)} modes but matrix has {cov.shape[0] // 2}"
        )
    idx = quad_indices(mask)
    if idx.size == 0:
        return np.zeros((0, 0))
    return cov[np.ix_(idx, idx)]


def subvector(vec, mask):
    """Extract the quadrature entries of the modes selected by a binary mask."""
    vec = np.asarray(vec, dtype=float)
    if 2 * len(mask) != vec.shape[0]:
        raise InvalidArgument(
            f"mask selects {len(mask)} modes but vector has {vec.shape[0] // 2}"
        )
    idx = quad_indices(mask)
    return vec[idx] if idx.size else np.zeros(0)
