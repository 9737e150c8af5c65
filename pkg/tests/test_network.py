"""Network construction: squeezers, interferometer, loss, detector folding."""

import numpy as np
import pytest

from swapbell.exceptions import InvalidArgument
from swapbell.gauss import is_physical, symplectic_form
from swapbell.measurement import plan_from_noise
from swapbell.network import (
    SqueezerBank,
    apply_loss,
    apply_symplectic,
    build_tmsv_network,
    fold_detector_efficiency,
    interferometer_symplectic,
    interferometer_unitary,
    prepared_state,
    real_embedding,
)
from swapbell.params import TABLE_NOISE, NoiseConfig


def test_tmsv_covariance_entries():
    r, phi = 0.3, 0.7
    state = build_tmsv_network(SqueezerBank(r=r, phases=(phi, phi), n_parties=2))
    v, a = np.cosh(2 * r), np.sinh(2 * r)
    cov = state.cov
    # mode order: all party-side modes first, then all swap-side modes
    assert cov[0, 0] == pytest.approx(v)
    assert cov[1, 1] == pytest.approx(v)
    # cross block between p_1 and s_1 (modes 0 and 2)
    block = cov[0:2, 4:6]
    expected = a * np.array([[np.cos(phi), -np.sin(phi)],
                             [-np.sin(phi), -np.cos(phi)]])
    assert np.allclose(block, expected)
    # independent pairs do not correlate
    assert np.allclose(cov[0:2, 2:4], 0.0)
    assert is_physical(cov)


def test_tmsv_zero_squeezing_is_vacuum():
    state = build_tmsv_network(SqueezerBank.symmetric(0.0, 3))
    assert np.allclose(state.cov, np.eye(12))


def test_interferometer_unitary_structure():
    for n in (2, 3, 4, 6):
        u = interferometer_unitary(n)
        assert np.allclose(u @ u.conj().T, np.eye(n), atol=1e-12)
        # the last row is uniform: the heralding detector sees the
        # symmetric combination of all swap-side modes
        assert np.allclose(u[-1], np.full(n, n ** -0.5))
    u2 = interferometer_unitary(2)
    assert np.allclose(u2, np.array([[1, -1], [1, 1]]) / np.sqrt(2))


def test_real_embedding_is_symplectic_and_orthogonal():
    for n in (2, 3, 5):
        s = real_embedding(interferometer_unitary(n))
        omega = symplectic_form(n)
        assert np.allclose(s @ omega @ s.T, omega, atol=1e-12)
        assert np.allclose(s @ s.T, np.eye(2 * n), atol=1e-12)


def test_apply_symplectic_rejects_non_symplectic():
    state = build_tmsv_network(SqueezerBank.symmetric(0.1, 2))
    bad = np.diag([2.0, 2.0, 1.0, 1.0])
    with pytest.raises(InvalidArgument):
        apply_symplectic(state, bad, modes=[0, 1])


def test_interferometer_preserves_physicality():
    state = build_tmsv_network(SqueezerBank.symmetric(0.2, 3))
    mixed = apply_symplectic(state, interferometer_symplectic(3), modes=[3, 4, 5])
    assert is_physical(mixed.cov)
    # the party-side block is untouched
    assert np.allclose(mixed.cov[:6, :6], state.cov[:6, :6])


def test_loss_map_fixed_point_and_vacuum_limit():
    state = build_tmsv_network(SqueezerBank.symmetric(0.15, 2))
    # unit transmission is the identity
    same = apply_loss(state, 1.0, 1.0)
    assert np.allclose(same.cov, state.cov)
    # zero transmission gives vacuum
    dead = apply_loss(state, 0.0, 0.0)
    assert np.allclose(dead.cov, np.eye(8))
    # intermediate loss keeps the state physical
    lossy = apply_loss(state, 0.9, 0.2)
    assert is_physical(lossy.cov)


def test_loss_interpolates_diagonal():
    r = 0.25
    state = build_tmsv_network(SqueezerBank.symmetric(r, 2))
    eta = 0.6
    lossy = apply_loss(state, eta, 1.0)
    v = np.cosh(2 * r)
    assert lossy.cov[0, 0] == pytest.approx(eta * v + (1 - eta))


def test_detector_efficiency_folding_equivalence():
    """A lossy detector equals an ideal detector behind extra channel loss."""
    from swapbell.bell import evaluate_experiment

    noise_folded = NoiseConfig(eta_p=0.9, eta_s=0.5, eta_d=0.8)
    noise_manual = NoiseConfig(eta_p=0.9 * 0.8, eta_s=0.5 * 0.8, eta_d=1.0)
    bank = SqueezerBank.symmetric(0.15, 2)
    plan_folded = plan_from_noise(0.59, -0.18, (0.0, 0.0), noise_folded)
    plan_manual = plan_from_noise(0.59 * np.sqrt(0.8), -0.18 * np.sqrt(0.8),
                                  (0.0, 0.0), noise_manual)
    res_folded = evaluate_experiment(bank, noise_folded, plan_folded)
    res_manual = evaluate_experiment(bank, noise_manual, plan_manual)
    assert res_folded.bell == pytest.approx(res_manual.bell, abs=1e-10)
    assert res_folded.p_success == pytest.approx(res_manual.p_success, abs=1e-10)
    np.testing.assert_allclose(res_folded.correlators, res_manual.correlators,
                               atol=1e-10)


def test_fold_detector_efficiency_scales_displacements():
    plan = plan_from_noise(0.5, -0.2, (0.0, 0.0), TABLE_NOISE)
    noise = TABLE_NOISE.replace(eta_d=0.64)
    folded_noise, folded_plan = fold_detector_efficiency(noise, plan)
    assert folded_noise.eta_d == 1.0
    assert folded_noise.eta_p == pytest.approx(0.9 * 0.64)
    assert folded_noise.eta_s == pytest.approx(0.2 * 0.64)
    assert np.allclose(folded_plan.disp0, 0.8 * plan.disp0)


def test_prepared_state_is_physical():
    state = prepared_state(SqueezerBank.symmetric(0.2, 4), TABLE_NOISE)
    assert state.n_parties == 4
    assert is_physical(state.cov)
