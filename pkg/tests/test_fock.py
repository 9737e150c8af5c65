"""Exact truncated Fock-space reference implementation."""

import numpy as np
import pytest

from swapbell.exceptions import InvalidArgument, PrecisionError
from swapbell.fock import (
    FockExperiment,
    apply_loss_fock,
    coherent_vector,
    destroy,
    loss_kraus,
    passive_unitary_fock,
    tmsv_fock,
    tmsv_truncation_error,
)
from swapbell.herald import herald_swap
from swapbell.measurement import plan_from_noise
from swapbell.network import (
    SqueezerBank,
    interferometer_unitary,
    prepared_state,
)
from swapbell.params import NoiseConfig

LOSSLESS = NoiseConfig(eta_p=1.0, eta_s=1.0, p_dark_s=0.0, p_dark_p=0.0,
                       sigma_a=0.0, sigma_theta=0.0)


def test_destroy_operator():
    a = destroy(4)
    n_op = a.conj().T @ a
    assert np.allclose(np.diag(n_op), [0, 1, 2, 3])


def test_coherent_vector_moments():
    alpha = 0.4 - 0.3j
    vec = coherent_vector(alpha, 30)
    a = destroy(30)
    assert np.vdot(vec, vec) == pytest.approx(1.0, abs=1e-12)
    assert np.vdot(vec, a @ vec) == pytest.approx(alpha, abs=1e-10)


def test_tmsv_zero_squeezing():
    state = tmsv_fock(0.0, 0.0, 3)
    assert state[0] == pytest.approx(1.0)
    assert np.abs(state[1:]).max() == 0.0


def test_tmsv_photon_number_correlation():
    cutoff = 5
    state = tmsv_fock(0.1, 0.0, cutoff)
    dim = cutoff + 1
    grid = state.reshape(dim, dim)
    # only |n,n> components are populated
    off = grid - np.diag(np.diag(grid))
    assert np.abs(off).max() == 0.0
    # geometric photon-number distribution with ratio tanh(r)^2
    ratio = np.abs(grid[1, 1] / grid[0, 0]) ** 2
    assert ratio == pytest.approx(np.tanh(0.1) ** 2, rel=1e-10)


def test_tmsv_reduced_state_thermal():
    cutoff = 8
    r = 0.3
    state = tmsv_fock(r, 0.0, cutoff)
    dim = cutoff + 1
    rho = np.outer(state, state.conj()).reshape(dim, dim, dim, dim)
    reduced = np.einsum("ikjk->ij", rho)
    mean = np.real(np.trace(np.diag(np.arange(dim)) @ reduced))
    assert mean == pytest.approx(np.sinh(r) ** 2, rel=1e-6)


def test_truncation_error_bound():
    assert tmsv_truncation_error(0.1, 5) < 1e-10
    assert tmsv_truncation_error(0.1, 5) == pytest.approx(np.tanh(0.1) ** 12)


def test_loss_kraus_completeness():
    dim = 6
    kraus = loss_kraus(0.37, dim)
    total = sum(k.conj().T @ k for k in kraus)
    assert np.allclose(total, np.eye(dim), atol=1e-12)


def test_loss_on_coherent_state_scales_amplitude():
    dim = 25
    alpha, eta = 0.5, 0.6
    vec = coherent_vector(alpha, dim)
    rho = np.outer(vec, vec.conj())
    lossy = apply_loss_fock(rho, eta, mode=0, n_modes=1, dim=dim)
    a = destroy(dim)
    assert np.trace(a @ lossy) == pytest.approx(np.sqrt(eta) * alpha, abs=1e-10)


def test_passive_unitary_transforms_annihilators():
    """The Fock-space unitary implements the mode map a -> U a."""
    dim = 4
    u = interferometer_unitary(2)
    big = passive_unitary_fock(u, 2, dim)
    a0 = np.kron(destroy(dim), np.eye(dim))
    a1 = np.kron(np.eye(dim), destroy(dim))
    lhs = big.conj().T @ a0 @ big
    rhs = u[0, 0] * a0 + u[0, 1] * a1
    # equality holds on the subspace whose total photon number stays below
    # the cutoff on both sides of the operator
    totals = np.add.outer(np.arange(dim), np.arange(dim)).reshape(-1)
    keep = totals <= dim - 2
    assert np.allclose(lhs[np.ix_(keep, keep)], rhs[np.ix_(keep, keep)],
                       atol=1e-10)


def test_network_density_validates_arguments():
    with pytest.raises(InvalidArgument):
        FockExperiment(n_parties=4, cutoff=5)
    with pytest.raises(InvalidArgument):
        FockExperiment(n_parties=2, cutoff=2)


def test_network_density_raises_on_coarse_cutoff():
    oracle = FockExperiment(n_parties=2, cutoff=3)
    with pytest.raises(PrecisionError):
        oracle.network_density(SqueezerBank.symmetric(0.8, 2))


def test_herald_operator_forms_agree():
    """The closed-form herald operator equals the photon-resolved Bayesian
    mixture."""
    oracle = FockExperiment(n_parties=2, cutoff=4)
    for p_dark in (0.0, 1e-4, 0.05):
        closed = oracle.herald_operator(p_dark)
        resolved = oracle.herald_operator(p_dark, fock_resolved=True)
        assert np.abs(closed - resolved).max() < 1e-10


def test_herald_probability_monotone_in_dark_counts_at_zero_squeezing():
    from swapbell.exceptions import HeraldImpossibleError

    oracle = FockExperiment(n_parties=2, cutoff=3)
    rho = oracle.network_density(SqueezerBank.symmetric(0.0, 2))
    probs = [oracle.herald(rho, p)[1] for p in (1e-3, 1e-2, 0.1)]
    assert probs == sorted(probs)
    # without dark counts the vacuum can never herald
    with pytest.raises(HeraldImpossibleError):
        oracle.herald(rho, 0.0)


def test_density_operators_stay_psd():
    oracle = FockExperiment(n_parties=2, cutoff=4)
    rho = oracle.network_density(SqueezerBank.symmetric(0.12, 2),
                                 eta_p=0.9, eta_s=0.5)
    rho_c, p_success = oracle.herald(rho, 1e-4)
    for op in (rho, rho_c):
        assert np.abs(op - op.conj().T).max() < 1e-12
        eigs = np.linalg.eigvalsh(op)
        assert eigs.min() > -1e-10
    assert 0.0 < p_success < 1.0
    assert np.real(np.trace(rho_c)) == pytest.approx(1.0, abs=1e-10)


def test_oracle_matches_gaussian_pipeline_spot_check():
    """One lossless point end to end; the full grid runs in the acceptance
    suite."""
    r, m0, m1 = 0.1, 0.59, -0.18
    oracle = FockExperiment(n_parties=2, cutoff=5)
    rho = oracle.network_density(SqueezerBank.symmetric(r, 2))
    rho_c, p_fock = oracle.herald(rho, 0.0)

    heralded = herald_swap(prepared_state(SqueezerBank.symmetric(r, 2),
                                          LOSSLESS), 0.0)
    plan = plan_from_noise(m0, m1, (0.0, 0.0), LOSSLESS)
    assert p_fock == pytest.approx(heralded.p_success, abs=1e-8)
    from swapbell.measurement import correlator_table

    table = correlator_table(heralded, plan)
    for n_idx in range(4):
        settings = (n_idx & 1, (n_idx >> 1) & 1)
        fock_value = oracle.correlator(rho_c, plan, settings)
        assert fock_value == pytest.approx(table[n_idx], abs=1e-8)
