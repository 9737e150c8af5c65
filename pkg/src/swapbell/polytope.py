"""Membership of an outcome distribution in the local (Bell) polytope.

A distribution is local iff it is a convex mixture of deterministic
strategies, where a strategy fixes each party's outcome for both settings.
That is a linear feasibility problem: find c >= 0, sum c = 1 with
A c = vec(P) where column k of A is the indicator table of strategy k.
It is solved by a self-contained dense phase-1 simplex with Bland's rule,
so results are deterministic down to pivot choices.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgument, SolverFailure
from .probabilities import marginalize

logger = logging.getLogger(__name__)


def enumerate_strategies(n_parties):
    """All 4^N deterministic strategies as an (4^N, N, 2) outcome array.

    ``strategies[k, p, s]`` is party p's outcome under setting s.  Party p's
    behaviour is digit p of k in base 4, with bit 0 the outcome at setting 0.
    """
    if not 1 <= n_parties <= 8:
        raise InvalidArgument("strategy enumeration supports 1..8 parties")
    count = 4**n_parties
    out = np.empty((count, n_parties, 2), dtype=np.int8)
    for k in range(count):
        rest = k
        for p in range(n_parties):
            digit = rest & 3
            rest >>= 2
            out[k, p, 0] = digit & 1
            out[k, p, 1] = (digit >> 1) & 1
    return out


def strategy_matrix(n_parties):
    """Indicator matrix A with rows (n, g) and one column per strategy."""
    strategies = enumerate_strategies(n_parties)
    count = strategies.shape[0]
    size = 1 << n_parties
    mat = np.zeros((size * size, count))
    for k in range(count):
        for n_idx in range(size):
            g_idx = 0
            for p in range(n_parties):
                g_idx |= int(strategies[k, p, (n_idx >> p) & 1]) << p
            mat[n_idx * size + g_idx, k] = 1.0
    return mat


def _phase1_simplex(a_mat, rhs, tol=1e-9, max_iter=None):
    """Minimize the sum of artificial variables for A x = b, x >= 0.

    Dense tableau simplex with Bland's rule (both for the entering column
    and for ratio ties), which guarantees termination and determinism.
    Returns (x, objective).
    """
    m, n = a_mat.shape
    sign = np.where(rhs < 0, -1.0, 1.0)
    a_mat = a_mat * sign[:, None]
    rhs = rhs * sign
    if max_iter is None:
        max_iter = 200 * (m + n)

    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a_mat
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = rhs
    # cost row for min(sum of artificials), reduced against the artificial basis
    tableau[m, :n] = -a_mat.sum(axis=0)
    tableau[m, -1] = -rhs.sum()
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        costs = tableau[m, : n + m]
        entering = -1
        for j in range(n + m):
            if costs[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        col = tableau[:m, entering]
        best_ratio = np.inf
        leaving = -1
        for i in range(m):
            if col[i] > tol:
                ratio = tableau[i, -1] / col[i]
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise SolverFailure("unbounded phase-1 problem; the tableau is corrupt")
        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        for i in range(m + 1):
            if i != leaving and tableau[i, entering] != 0.0:
                tableau[i] -= tableau[i, entering] * tableau[leaving]
        basis[leaving] = entering
    else:
        raise SolverFailure(f"phase-1 simplex did not converge in {max_iter} pivots")

    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tableau[i, -1]
    objective = -tableau[m, -1]
    return x, float(objective)


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the local-model feasibility test."""

    feasible: bool
    weights: np.ndarray | None
    infeasibility_gap: float
    residual: float


def lhv_feasible(table, tol=1e-9):
    """Decide whether the outcome table admits a local hidden-variable model.

    Returns the mixture weights when feasible; otherwise the phase-1
    objective (total constraint violation) and the max-norm residual of the
    best attempt.
    """
    n = table.n_parties
    a_mat = strategy_matrix(n)
    rhs = table.probs.reshape(-1)
    # normalization row; redundant with the equality rows but cheap insurance
    a_full = np.vstack([a_mat, np.ones((1, a_mat.shape[1]))])
    b_full = np.concatenate([rhs, [1.0]])
    weights, objective = _phase1_simplex(a_full, b_full, tol=tol)
    residual = float(np.abs(a_full @ weights - b_full).max())
    if objective <= tol:
        if residual > 1e-8:
            raise SolverFailure(
                f"feasible basis but reconstruction residual {residual:.3e}"
            )
        return FeasibilityResult(
            feasible=True, weights=weights, infeasibility_gap=0.0, residual=residual
        )
    return FeasibilityResult(
        feasible=False, weights=None, infeasibility_gap=float(objective),
        residual=residual,
    )


def subgroup_scan(table, min_size=1, progress=None):
    """Feasibility of every strict-subset marginal of the table.

    Returns a dict mapping party tuples to FeasibilityResult.
    """
    n = table.n_parties
    if n < 2:
        raise InvalidArgument("subgroup scan needs at least two parties")
    results = {}
    for size in range(min_size, n):
        for subset in _subsets(n, size):
            marginal = marginalize(table, list(subset))
            results[subset] = lhv_feasible(marginal)
            if progress is not None:
                progress(subset, results[subset])
    return results


def _subsets(n, size):
    import itertools

    return itertools.combinations(range(n), size)
