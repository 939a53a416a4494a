import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import chirp

from adaptiveGHX.utils.errors import ConfigError


class DisturbanceKind(str, enum.Enum):
    NONE = "none"
    SINUSOID = "sinusoid"
    CHIRP = "chirp"


@dataclass(frozen=True)
class DisturbanceSignal:
    """
    Bounded matched disturbance d(t) injected in input units.

    Every channel carries the same waveform, so |d_i(t)| <= amplitude and
    ||d(t)|| <= amplitude * sqrt(m).
    """

    kind: DisturbanceKind = DisturbanceKind.NONE
    amplitude: float = 0.05
    f0: float = 1e-3
    f1: float = 1e-2
    horizon: float = 5250.0
    m: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        if self.amplitude < 0:
            raise ConfigError("disturbance amplitude must be >= 0", key="amplitude")
        if self.kind is DisturbanceKind.CHIRP and self.horizon <= 0:
            raise ConfigError("chirp needs a positive horizon", key="horizon")

    @property
    def active(self):
        return self.kind is not DisturbanceKind.NONE and self.amplitude > 0

    @property
    def bound(self):
        """d_max such that ||d(t)|| <= d_max for all t."""
        return self.amplitude * np.sqrt(self.m) if self.active else 0.0

    def __call__(self, t):
        """d(t) as an m x 1 column."""
        if not self.active:
            return np.zeros((self.m, 1))
        if self.kind is DisturbanceKind.SINUSOID:
            value = np.sin(2.0 * np.pi * self.f0 * t)
        else:
            # linear sweep f0 -> f1 over the horizon
            value = chirp(t, f0=self.f0, t1=self.horizon, f1=self.f1, method="linear")
        return np.full((self.m, 1), self.amplitude * float(value))
