# Tracking and actuation metrics:
#   MAE  = 1/N sum |e(i)|            ITAE = int t |e(t)| dt
#   CE_l = int ||u(t)||_l dt,  l in {1, 2}
# Integrals use the trapezoidal rule on the sample grid.

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from adaptiveGHX.utils.errors import ConfigError, DimensionError


def _series(values, name):
    series = np.asarray(values, dtype=float)
    if series.ndim == 1:
        series = series[:, None]
    if series.size == 0 or series.shape[0] == 0:
        raise DimensionError(f"{name} series is empty")
    return series


def mae(e_series):
    """Per-state mean absolute error."""
    e = _series(e_series, "error")
    return np.mean(np.abs(e), axis=0)


def itae(e_series, times):
    """Per-state integral of t * |e(t)|."""
    e = _series(e_series, "error")
    times = np.asarray(times, dtype=float)
    if times.shape[0] != e.shape[0]:
        raise DimensionError("times and error series differ in length")
    return trapezoid(times[:, None] * np.abs(e), times, axis=0)


def control_effort(u_series, times, l=2):
    """Integral of the l-norm (1 or 2) of the input."""
    if l not in (1, 2):
        raise ConfigError(f"control effort norm must be 1 or 2, got {l}", key="l")
    u = _series(u_series, "input")
    times = np.asarray(times, dtype=float)
    if times.shape[0] != u.shape[0]:
        raise DimensionError("times and input series differ in length")
    return float(trapezoid(np.linalg.norm(u, ord=l, axis=1), times))


@dataclass
class MetricsSummary:
    mae: np.ndarray
    itae: np.ndarray
    ce_l1: float
    ce_l2: float
    normalized: dict = field(default_factory=dict)

    def normalize(self, baseline):
        """Ratios to a baseline run (the baseline normalised against itself gives 1)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            self.normalized = {
                "mae": (self.mae / baseline.mae).tolist(),
                "itae": (self.itae / baseline.itae).tolist(),
                "ce": {
                    "l1": self.ce_l1 / baseline.ce_l1 if baseline.ce_l1 else float("nan"),
                    "l2": self.ce_l2 / baseline.ce_l2 if baseline.ce_l2 else float("nan"),
                },
            }
        return self

    def to_dict(self):
        return {
            "mae": self.mae.tolist(),
            "itae": self.itae.tolist(),
            "ce": {"l1": self.ce_l1, "l2": self.ce_l2},
            "normalized": self.normalized,
        }


def summarize(e_series, u_series, times):
    return MetricsSummary(
        mae=mae(e_series),
        itae=itae(e_series, times),
        ce_l1=control_effort(u_series, times, l=1),
        ce_l2=control_effort(u_series, times, l=2),
    )
