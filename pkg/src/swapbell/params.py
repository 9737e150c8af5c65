"""Noise configuration shared by the network, measurement and CLI layers."""

from dataclasses import dataclass, replace

from .exceptions import InvalidArgument


@dataclass(frozen=True)
class NoiseConfig:
    """Channel, detector and displacement noise parameters.

    ``eta_p`` / ``eta_s`` are the transmissions of the channels feeding the
    party detectors and the swap detectors respectively.  ``eta_d`` is the
    efficiency of every detector.  ``p_dark_s`` / ``p_dark_p`` are per-window
    dark-count probabilities for the swap and party detectors.  ``sigma_a``
    and ``sigma_theta`` are the standard deviations of the relative-amplitude
    and phase perturbations of the displacements.
    """

    eta_p: float = 0.9
    eta_s: float = 0.2
    eta_d: float = 1.0
    p_dark_s: float = 1e-4
    p_dark_p: float = 1e-4
    sigma_a: float = 0.03
    sigma_theta: float = 0.1

    def __post_init__(self):
        for name in ("eta_p", "eta_s"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1], got {val}")
        if not 0.0 < self.eta_d <= 1.0:
            raise InvalidArgument(f"eta_d must lie in (0, 1], got {self.eta_d}")
        for name in ("p_dark_s", "p_dark_p"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1), got {val}")
        for name in ("sigma_a", "sigma_theta"):
            if getattr(self, name) < 0.0:
                raise InvalidArgument(f"{name} must be nonnegative")

    @property
    def v_a(self):
        """Relative-amplitude variance."""
        return self.sigma_a**2

    @property
    def v_theta(self):
        """Phase variance in rad^2."""
        return self.sigma_theta**2

    def replace(self, **kwargs):
        return replace(self, **kwargs)


#: standard noise settings used for all reported results unless overridden
TABLE_NOISE = NoiseConfig()
