import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from adaptiveGHX.plant.model import true_plant_derivative
from adaptiveGHX.utils.errors import ConfigError, DimensionError, NumericalError

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e9
CSV_COLUMNS = ["t", "x0", "x1", "xr0", "xr1", "u0", "u1", "e0", "e1", "V"]


def sample_times(horizon, dt, t0=0.0):
    """Uniform grid t0, t0+dt, ..., t0+horizon (N = horizon/dt + 1 samples)."""
    if dt <= 0:
        raise ConfigError("dt must be positive", key="dt")
    count = int(round(horizon / dt)) + 1
    if count < 2:
        raise ConfigError("horizon/dt must give at least 2 samples", key="horizon")
    return t0 + dt * np.arange(count)


def rk4_step(derivative, x, t, dt):
    """
    One classical 4th-order Runge-Kutta step of dx/dt = derivative(t, x).
    Raises NumericalError if any stage is not finite.
    """
    if dt <= 0:
        raise ConfigError("dt must be positive", key="dt")
    k1 = derivative(t, x)
    k2 = derivative(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = derivative(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = derivative(t + dt, x + dt * k3)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise NumericalError("RK4 step produced non-finite state", t=t, x=x)
    return x_next


def check_divergence(x, t):
    norm = float(np.linalg.norm(x))
    if norm > DIVERGENCE_LIMIT:
        raise NumericalError(
            f"state norm {norm:.3e} exceeded divergence limit at t={t}", t=t, x=x, norm=norm
        )


@dataclass
class TrajectoryRecord:
    """
    Time-indexed samples of one closed-loop run.

    times (N,), x (N, n), u (N, m); x_r / u_r are the trajectory the run is compared
    against, e = x - x_r; v is the Lyapunov diagnostic and theta_hat (N, m, p) the
    parameter snapshots of an adaptive run.
    """

    times: np.ndarray
    x: np.ndarray
    u: np.ndarray
    x_r: np.ndarray = None
    u_r: np.ndarray = None
    e: np.ndarray = None
    v: np.ndarray = None
    theta_hat: np.ndarray = None
    cpu_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def with_reference(self, x_r, u_r=None):
        """Copy whose error is measured against x_r."""
        x_r = np.asarray(x_r, dtype=float)
        return replace(self, x_r=x_r, u_r=u_r, e=self.x - x_r)

    def to_frame(self):
        """Trajectory CSV layout: t,x0,x1,xr0,xr1,u0,u1,e0,e1,V."""
        x_r = self.x_r if self.x_r is not None else self.x
        e = self.e if self.e is not None else np.zeros_like(self.x)
        v = self.v if self.v is not None else np.full(len(self.times), np.nan)
        data = np.column_stack([self.times, self.x, x_r, self.u, e, v])
        return pd.DataFrame(data, columns=CSV_COLUMNS)


def simulate(model, spec, controller, horizon, dt, x0=None, t0=0.0):
    """
    Fixed-step closed loop on the true plant.

    controller(i, t, x) -> u is the control law while sample i is active; it is
    evaluated at every RK4 stage, so state feedback acts continuously while
    whatever the law reads from sample i (reference, feedforward) is held over
    the step.
    Args:
        model, spec: true plant (see apply_uncertainty)
        horizon, dt: seconds; N = horizon/dt + 1 samples
        x0: initial state, defaults to the open-loop equilibrium of model
    Returns:
        TrajectoryRecord with x and u per sample
    """
    times = sample_times(horizon, dt, t0)
    x = model.equilibrium() if x0 is None else np.array(x0, dtype=float).reshape(-1, 1)
    if x.shape[0] != model.n:
        raise DimensionError("x0 needs one entry per state", shape=list(x.shape), n=model.n)
    xs = np.empty((len(times), model.n))
    us = np.empty((len(times), model.m))

    start = time.process_time()
    for i, t in enumerate(times):
        check_divergence(x, t)
        xs[i] = x[:, 0]
        us[i] = controller(i, t, x)[:, 0]
        if i == len(times) - 1:
            break

        def closed_loop(s, y, i=i):
            return true_plant_derivative(model, spec, y, controller(i, s, y), s)

        x = rk4_step(closed_loop, x, t, dt)
    cpu = time.process_time() - start
    logger.debug("simulated %d samples in %.3f CPU s", len(times), cpu)
    return TrajectoryRecord(times=times, x=xs, u=us, cpu_seconds=cpu)
