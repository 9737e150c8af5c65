"""Simulator for multi-party optical Bell tests based on entanglement swapping.

The package models a network of two-mode squeezers whose outputs are swapped
through an N-port interferometer and heralded by on/off detectors.  The
surviving modes are measured with displacement-based on/off detection, and the
resulting correlations are scored against the full-correlator Bell inequality
for N parties, 2 settings and 2 outcomes (local bound 1).

Everything in the analytic pipeline is exact Gaussian algebra over covariance
matrices; a truncated Fock-space oracle provides an independent brute-force
check at small party numbers.
"""

from .params import NoiseConfig, TABLE_NOISE
from .network import SqueezerBank, GaussianState
from .measurement import MeasurementPlan, settings_from_reference
from .herald import HeraldedState, herald_swap
from .bell import bell_value, evaluate_experiment, evaluate_point

__all__ = [
    "NoiseConfig",
    "TABLE_NOISE",
    "SqueezerBank",
    "GaussianState",
    "MeasurementPlan",
    "settings_from_reference",
    "HeraldedState",
    "herald_swap",
    "bell_value",
    "evaluate_experiment",
    "evaluate_point",
]
