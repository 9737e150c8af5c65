"""Displacement measurements, correlators, and the linearized jitter model."""

import numpy as np
import pytest

from swapbell.herald import herald_swap
from swapbell.measurement import (
    MeasurementPlan,
    correlator,
    correlator_table,
    noisy_disp_cov,
    plan_from_noise,
    rotation,
    sampled_correlator,
    settings_from_reference,
)
from swapbell.network import SqueezerBank, prepared_state
from swapbell.params import TABLE_NOISE, NoiseConfig


def heralded_at(n, r, noise):
    state = prepared_state(SqueezerBank.symmetric(r, n), noise)
    return herald_swap(state, noise.p_dark_s)


def test_rotation_matrix():
    rot = rotation(np.pi / 2)
    assert np.allclose(rot @ np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.allclose(rotation(0.3) @ rotation(-0.3), np.eye(2))


def test_noisy_disp_cov_axes():
    """Amplitude variance acts along the displacement, phase across it."""
    disp = np.array([0.5, 0.0])
    delta = noisy_disp_cov(disp, v_a=0.09, v_theta=0.01)
    scaled = 2.0 * disp
    assert delta[0, 0] == pytest.approx(1.0 + 0.09 * scaled[0] ** 2)
    assert delta[1, 1] == pytest.approx(1.0 + 0.01 * scaled[0] ** 2)
    assert delta[0, 1] == pytest.approx(0.0)


def test_settings_from_reference_rotates_per_party():
    phases = (0.0, 0.8)
    plan = settings_from_reference(0.5, -0.2, phases)
    assert np.allclose(plan.disp0[0], [0.5, 0.0])
    expected = rotation(-0.8) @ np.array([0.5, 0.0])
    assert np.allclose(plan.disp0[1], expected)


def test_correlator_frozen_values():
    # frozen from this implementation after cross-validation against the
    # exact Fock-space reference
    noise = TABLE_NOISE
    heralded = heralded_at(2, 0.1575, noise)
    plan = plan_from_noise(0.5891, -0.1838, (0.0, 0.0), noise)
    table = correlator_table(heralded, plan)
    expected = [0.419984706324559, -0.575199716349322,
                -0.575199716349322, -0.542870909631235]
    np.testing.assert_allclose(table, expected, rtol=1e-11)


def test_correlator_matches_table_entry():
    noise = TABLE_NOISE
    heralded = heralded_at(2, 0.15, noise)
    plan = plan_from_noise(0.55, -0.2, (0.0, 0.0), noise)
    table = correlator_table(heralded, plan)
    for n_idx in range(4):
        settings = (n_idx & 1, (n_idx >> 1) & 1)
        assert correlator(heralded, plan, settings) == pytest.approx(
            table[n_idx], abs=1e-12)


def test_symmetric_fast_path_matches_general():
    noise = TABLE_NOISE
    for n in (2, 3, 4):
        heralded = heralded_at(n, 0.13, noise)
        plan = plan_from_noise(0.45, -0.19, (0.0,) * n, noise)
        fast = correlator_table(heralded, plan)
        slow = correlator_table(heralded, plan, force_general=True)
        np.testing.assert_allclose(fast, slow, atol=1e-11)


def test_phase_compensation_is_a_gauge():
    """Rotating a squeezer phase while counter-rotating that party's
    displacements leaves every correlator unchanged."""
    noise = TABLE_NOISE
    r, m0, m1 = 0.15, 0.5, -0.2
    base_phases = (0.0, 0.0)
    rotated_phases = (0.0, 1.1)

    plain = correlator_table(
        herald_swap(prepared_state(SqueezerBank(r=r, phases=base_phases,
                                                n_parties=2), noise),
                    noise.p_dark_s),
        plan_from_noise(m0, m1, base_phases, noise))
    compensated = correlator_table(
        herald_swap(prepared_state(SqueezerBank(r=r, phases=rotated_phases,
                                                n_parties=2), noise),
                    noise.p_dark_s),
        plan_from_noise(m0, m1, rotated_phases, noise))
    np.testing.assert_allclose(plain, compensated, atol=1e-10)


def test_correlators_bounded():
    noise = TABLE_NOISE
    for r, m0, m1 in [(0.05, 0.3, -0.1), (0.3, 1.2, 0.8), (0.45, -1.4, 1.4)]:
        heralded = heralded_at(2, r, noise)
        plan = plan_from_noise(m0, m1, (0.0, 0.0), noise)
        table = correlator_table(heralded, plan)
        assert np.all(np.abs(table) <= 1 + 1e-9)


def test_sampled_correlator_agrees_with_linearized():
    """Monte-Carlo jitter sampling agrees with the linearized closed form
    to within 3 standard errors at the standard noise level."""
    noise = TABLE_NOISE
    heralded = heralded_at(2, 0.1575, noise)
    plan = plan_from_noise(0.5891, -0.1838, (0.0, 0.0), noise)
    closed = correlator_table(heralded, plan)
    for n_idx in range(4):
        settings = (n_idx & 1, (n_idx >> 1) & 1)
        mean, stderr = sampled_correlator(heralded, plan, settings,
                                          n_samples=100_000, seed=7)
        assert abs(mean - closed[n_idx]) < 3 * stderr


def test_sampled_correlator_exact_without_jitter():
    noise = NoiseConfig(sigma_a=0.0, sigma_theta=0.0)
    heralded = heralded_at(2, 0.15, noise)
    plan = plan_from_noise(0.5, -0.2, (0.0, 0.0), noise)
    closed = correlator_table(heralded, plan)
    mean, stderr = sampled_correlator(heralded, plan, (0, 0), n_samples=100,
                                      seed=1)
    assert stderr == pytest.approx(0.0, abs=1e-12)
    assert mean == pytest.approx(closed[0], abs=1e-10)


def test_plan_swapped_settings_symmetry():
    plan = settings_from_reference(0.5, -0.2, (0.0, 0.0))
    swapped = plan.swapped_settings()
    assert np.allclose(swapped.disp0, plan.disp1)
    assert np.allclose(swapped.disp1, plan.disp0)
