"""Bell functional and the end-to-end evaluation pipeline."""

import numpy as np
import pytest

from swapbell.bell import bell_value, evaluate_experiment, evaluate_point
from swapbell.exceptions import InvalidArgument
from swapbell.measurement import plan_from_noise
from swapbell.network import SqueezerBank
from swapbell.params import TABLE_NOISE, NoiseConfig

IDEAL = NoiseConfig(eta_p=1.0, eta_s=1.0, p_dark_s=0.0, p_dark_p=0.0,
                    sigma_a=0.0, sigma_theta=0.0)


def test_bell_value_uniform_correlators():
    # all correlators equal to c: only the all-zero transform row survives
    for n in (2, 3):
        corr = np.full(2 ** n, 0.5)
        assert bell_value(corr) == pytest.approx(0.5)


def test_bell_value_chsh_optimum():
    """The two-party functional at the quantum bound: correlators
    (1, 1, 1, -1)/sqrt(2) give sqrt(2)."""
    corr = np.array([1.0, 1.0, 1.0, -1.0]) / np.sqrt(2)
    assert bell_value(corr) == pytest.approx(np.sqrt(2), rel=1e-12)


def test_bell_value_rejects_bad_length():
    with pytest.raises(InvalidArgument):
        bell_value(np.ones(3))
    with pytest.raises(InvalidArgument):
        bell_value(np.ones(1))


def test_bell_value_setting_relabel_invariance():
    rng = np.random.default_rng(3)
    corr = rng.uniform(-1, 1, 8)
    relabeled = corr[[i ^ 0b111 for i in range(8)]]
    assert bell_value(relabeled) == pytest.approx(bell_value(corr), abs=1e-12)


def test_evaluate_point_frozen_two_party_optimum():
    result = evaluate_point(2, 0.1575, 0.5891, -0.1838, TABLE_NOISE)
    assert result.bell == pytest.approx(1.05662752432722, rel=1e-11)
    assert result.p_success == pytest.approx(0.00505123591906653, rel=1e-11)


def test_evaluate_point_frozen_three_party():
    result = evaluate_point(3, 0.12, 0.4693, -0.2034, TABLE_NOISE)
    assert result.bell == pytest.approx(1.12390447617467, rel=1e-11)


def test_no_squeezing_never_violates():
    for m0, m1 in [(0.5, -0.2), (1.0, 1.0), (0.1, -1.2)]:
        result = evaluate_point(2, 0.0, m0, m1, TABLE_NOISE)
        assert result.bell <= 1.0 + 1e-9


def test_bell_below_quantum_bound():
    for n in (2, 3, 4):
        result = evaluate_point(n, 0.15, 0.45, -0.19, TABLE_NOISE)
        assert result.bell <= 2 ** ((n - 1) / 2) + 1e-9


def test_dead_party_channel_never_violates():
    """With zero transmission to the party detectors there are no photons
    left to measure, so no violation is possible."""
    noise = TABLE_NOISE.replace(eta_p=1e-9)
    result = evaluate_point(2, 0.1575, 0.5891, -0.1838, noise)
    assert result.bell <= 1.0 + 1e-9


def test_evaluate_experiment_checks_party_count():
    bank = SqueezerBank.symmetric(0.1, 2)
    plan = plan_from_noise(0.5, -0.2, (0.0, 0.0, 0.0), TABLE_NOISE)
    with pytest.raises(InvalidArgument):
        evaluate_experiment(bank, TABLE_NOISE, plan)


def test_ideal_two_party_violation_grows_at_weak_squeezing():
    """Without any noise the violation increases as r decreases toward the
    single-photon limit."""
    bells = [evaluate_point(2, r, 0.6, -0.2, IDEAL).bell
             for r in (0.3, 0.2, 0.1, 0.05)]
    assert all(b2 > b1 for b1, b2 in zip(bells, bells[1:]))
    assert bells[-1] > 1.2
