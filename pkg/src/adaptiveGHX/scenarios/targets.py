# State targets the LQR reference is generated from: a seeded ramp-and-plateau
# profile, an equilibrium hold, or a filtered experiment CSV (header t,x0,x1).

import logging
import os

import numpy as np
import pandas as pd

from adaptiveGHX.analysis.filters import savgol_filter
from adaptiveGHX.control.reference import ReferenceSource, TargetTrajectory, feedforward
from adaptiveGHX.plant.simulate import sample_times
from adaptiveGHX.utils.errors import ConfigError, ReferenceDataError

logger = logging.getLogger(__name__)

MIN_SYNTHETIC_HORIZON = 1000.0
BREAKPOINTS = (0.0, 0.15, 0.30, 0.55, 0.70, 1.0)
# plateau levels (bypass mass flow, GHX heat rate): start, mid, end
PLATEAUS = ((-1.5, 900.0), (-1.3, 1075.0), (-1.5, 900.0))
JITTER = (0.02, 10.0)
REACH_FACTOR = 10.0
CSV_HEADER = ["t", "x0", "x1"]


def _check_reachable(model, target, horizon, dt):
    """The feedforward needed to follow the target stays within REACH_FACTOR of its start."""
    times = sample_times(horizon, dt)
    u_ff = feedforward(model, target(times), dt)
    norms = np.linalg.norm(u_ff, axis=1)
    limit = REACH_FACTOR * norms[0] + 1e-9
    if not np.all(np.isfinite(norms)) or np.max(norms) > limit:
        raise ConfigError(
            "synthetic target is outside the reachable set of the nominal plant",
            key="reference", max_input_norm=float(np.max(norms)), limit=float(limit),
        )


def synthetic_reference_target(horizon, dt, seed, model, profile="ramps"):
    """
    Piecewise-linear target: plateau, ramp, plateau, reverse ramp, plateau.

    Plateau levels are jittered with a seeded generator so the profile is
    reproducible per seed. profile="constant" holds the open-loop equilibrium.
    Args:
        horizon, dt: seconds, horizon >= 1000
        seed: integer seed of the jitter
        model: nominal PlantModel used for the equilibrium and the reachability check
    Returns:
        TargetTrajectory
    """
    if horizon < MIN_SYNTHETIC_HORIZON:
        raise ConfigError(
            f"synthetic target needs a horizon of at least {MIN_SYNTHETIC_HORIZON:g} s",
            key="horizon",
        )
    if profile == "constant":
        level = model.equilibrium()[:, 0]
        target = TargetTrajectory(
            times=np.array([0.0, horizon]), values=np.vstack([level, level]),
            source=ReferenceSource.EQUILIBRIUM,
        )
    elif profile == "ramps":
        rng = np.random.default_rng(seed)
        levels = [
            np.array(p) + rng.uniform(-1.0, 1.0, size=2) * np.array(JITTER) for p in PLATEAUS
        ]
        values = np.vstack([levels[0], levels[0], levels[1], levels[1], levels[2], levels[2]])
        target = TargetTrajectory(
            times=horizon * np.array(BREAKPOINTS), values=values,
            source=ReferenceSource.SYNTHETIC,
        )
    else:
        raise ConfigError(f"unknown target profile '{profile}'", key="profile")
    _check_reachable(model, target, horizon, dt)
    return target


def equilibrium_target(model, value=None):
    """Constant hold at value, the open-loop equilibrium of model by default."""
    level = model.equilibrium()[:, 0] if value is None else np.asarray(value, dtype=float)
    return TargetTrajectory(
        times=np.array([0.0, 1.0]), values=np.vstack([level, level]),
        source=ReferenceSource.EQUILIBRIUM,
    )


def _read_reference_csv(path):
    if not os.path.exists(path):
        raise ReferenceDataError(f"reference file {path} does not exist", row=None, path=str(path))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
        raise ReferenceDataError(f"cannot parse {path}: {err}", row=None, path=str(path)) from err
    if list(frame.columns) != CSV_HEADER:
        raise ReferenceDataError(
            f"header must be {','.join(CSV_HEADER)}, got {','.join(map(str, frame.columns))}",
            row=1, path=str(path),
        )
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(numeric.to_numpy(dtype=float)).all(axis=1)
    if bad.any():
        # file line = data index + 2 (header is line 1)
        row = int(np.argmax(bad)) + 2
        raise ReferenceDataError(f"malformed row at line {row} of {path}", row=row, path=str(path))
    t = numeric["t"].to_numpy()
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 3
        kind = "duplicated" if steps[row - 3] == 0 else "non-monotone"
        raise ReferenceDataError(f"{kind} timestamp at line {row} of {path}", row=row, path=str(path))
    return t, numeric[["x0", "x1"]].to_numpy()


def ingest_csv_reference(path, window=501, poly_order=2, dt=None, resample_points=None):
    """
    Load an experiment trajectory as a target.

    Rows are linearly resampled to a uniform grid (spacing dt, the mean spacing
    of the file by default, or resample_points equally spaced points) and then
    smoothed with a Savitzky-Golay filter.
    Returns:
        TargetTrajectory starting at the first timestamp of the file
    """
    t, values = _read_reference_csv(path)
    if len(t) < 2:
        raise ReferenceDataError(f"{path} needs at least two data rows", row=len(t) + 1)
    if resample_points is not None:
        grid = np.linspace(t[0], t[-1], int(resample_points))
    else:
        step = (t[-1] - t[0]) / (len(t) - 1) if dt is None else float(dt)
        grid = sample_times(t[-1] - t[0], step, t0=t[0])
    resampled = np.column_stack([np.interp(grid, t, values[:, j]) for j in range(values.shape[1])])
    if len(grid) < window:
        raise ReferenceDataError(
            f"{path} has {len(grid)} samples after resampling, fewer than the window {window}",
            row=len(t) + 1, path=str(path),
        )
    filtered = savgol_filter(resampled, window, poly_order)
    logger.info(
        "ingested %s: %d rows -> %d samples, window %d, order %d",
        path, len(t), len(grid), window, poly_order,
    )
    return TargetTrajectory(times=grid - grid[0], values=filtered, source=ReferenceSource.CSV)


def write_target_csv(path, target, times):
    """Sample a target on times and write it in the t,x0,x1 layout ingest_csv_reference reads."""
    frame = pd.DataFrame(np.column_stack([times, target(times)]), columns=CSV_HEADER)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
