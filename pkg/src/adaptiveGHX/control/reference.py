import enum
import logging
from dataclasses import dataclass

import numpy as np

from adaptiveGHX.matcore import solve_linear
from adaptiveGHX.plant.model import unperturbed_spec
from adaptiveGHX.plant.simulate import sample_times, simulate
from adaptiveGHX.utils.errors import DimensionError, NumericalError

logger = logging.getLogger(__name__)


class ReferenceSource(str, enum.Enum):
    SYNTHETIC = "synthetic"
    CSV = "csv"
    EQUILIBRIUM = "equilibrium"


@dataclass(frozen=True)
class TargetTrajectory:
    """Piecewise-linear state target through (times, values); values is (N, n)."""

    times: np.ndarray
    values: np.ndarray
    source: ReferenceSource = ReferenceSource.SYNTHETIC

    def __call__(self, times):
        times = np.asarray(times, dtype=float)
        return np.column_stack(
            [np.interp(times, self.times, self.values[:, j]) for j in range(self.values.shape[1])]
        )


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Reference states x_r and inputs u_r on a uniform grid, plus the target they track."""

    times: np.ndarray
    x_r: np.ndarray
    u_r: np.ndarray
    target: np.ndarray
    source: ReferenceSource = ReferenceSource.SYNTHETIC

    def __post_init__(self):
        count = len(self.times)
        if count < 2 or not (len(self.x_r) == len(self.u_r) == len(self.target) == count):
            raise DimensionError("reference arrays must share one time grid")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise DimensionError("reference time grid is not uniform")
        if not (np.all(np.isfinite(self.x_r)) and np.all(np.isfinite(self.u_r))):
            raise NumericalError("reference trajectory is not finite")

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self):
        return float(self.times[-1] - self.times[0])

    def x_col(self, i):
        return self.x_r[i][:, None]

    def u_col(self, i):
        return self.u_r[i][:, None]


def feedforward(model, targets, dt):
    """
    Inputs that make the target a solution of the nominal model:
    u_ff = B^-1 (dx_target/dt - A x_target - D), derivative by finite differences.
    """
    rates = np.gradient(targets, dt, axis=0)
    rhs = rates.T - model.a @ targets.T - model.d
    return solve_linear(model.b, rhs).T


def generate_reference(design, model, target, horizon, dt):
    """
    Run LQR on the nominal model to produce the reference (x_r, u_r).

    u = -K (x - x_target) + u_ff from x(0) = x_target(0); the target sample and its
    feedforward are held over each step.
    Args:
        design: LqrDesign of the nominal model
        model: nominal PlantModel
        target: callable mapping a time array to (N, n) target states
    Returns:
        ReferenceTrajectory
    """
    times = sample_times(horizon, dt)
    targets = np.asarray(target(times), dtype=float)
    if not np.all(np.isfinite(targets)):
        raise NumericalError("target trajectory is not finite on the grid")
    u_ff = feedforward(model, targets, dt)
    k = design.k

    def lqr_tracking(i, t, x):
        return u_ff[i][:, None] - k @ (x - targets[i][:, None])

    record = simulate(
        model, unperturbed_spec(model), lqr_tracking, horizon, dt, x0=targets[0]
    )
    source = getattr(target, "source", ReferenceSource.SYNTHETIC)
    logger.info(
        "reference generated: %d samples, max |x_r - target| = %s",
        len(times), np.round(np.max(np.abs(record.x - targets), axis=0), 6),
    )
    return ReferenceTrajectory(
        times=times, x_r=record.x, u_r=record.u, target=targets, source=source
    )
