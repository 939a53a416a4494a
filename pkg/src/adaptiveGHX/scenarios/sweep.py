# Multiplier sweep: run_scenario at each uncertainty multiplier, once without and
# once with the matched sin(x) nonlinearity, tabulating CE and MAE normalised to run a.

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
import pandas as pd

from adaptiveGHX.scenarios.artifacts import replace_atomically, write_json
from adaptiveGHX.scenarios.run_scenario import RUN_NAMES, run_scenario
from adaptiveGHX.utils.errors import AdaptiveGHXError, ConfigError

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "setting", "multiplier", "run", "status",
    "mae0", "mae1", "itae0", "itae1", "ce_l1", "ce_l2",
]


def parse_sweep(text):
    """'a:b:step' -> ascending multipliers from a to b inclusive."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError as err:
        raise ConfigError(f"sweep must look like a:b:step, got '{text}'", key="sweep") from err
    if step <= 0 or stop < start:
        raise ConfigError("sweep needs step > 0 and b >= a", key="sweep")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def sweep_settings(config):
    """
    Overrides of the two sweep settings. The clean setting drops the matched
    nonlinearity and any d(t); the disturbed one keeps a configured nonzero theta_lr
    preset (identity otherwise) and the configured d(t).
    """
    disturbed = config.theta_lr_preset if config.theta_lr_preset != "zero" else "identity"
    return {
        "no_disturbance": {
            "theta_lr_preset": "zero",
            "disturbance": replace(config.disturbance, kind="none"),
        },
        "disturbance": {"theta_lr_preset": disturbed, "disturbance": config.disturbance},
    }


def _sweep_point(config, setting, multiplier):
    """One sweep point; failures come back as records so the sweep carries on."""
    try:
        artifacts = run_scenario(config)
    except AdaptiveGHXError as err:
        logger.warning("sweep point %s x%.3f failed: %s", setting, multiplier, err.message)
        return [dict(setting=setting, multiplier=multiplier, run=None, status="failed",
                     failure=err.to_record())]
    rows = []
    for run in artifacts.summary["runs"]:
        normalized = run["normalized"]
        rows.append(
            dict(
                setting=setting,
                multiplier=multiplier,
                run=run["name"],
                status="ok",
                mae0=normalized["mae"][0],
                mae1=normalized["mae"][1],
                itae0=normalized["itae"][0],
                itae1=normalized["itae"][1],
                ce_l1=normalized["ce"]["l1"],
                ce_l2=normalized["ce"]["l2"],
            )
        )
    return rows


def run_multiplier_sweep(config, multipliers, out_dir=None, workers=1):
    """
    Run the scenario over ascending multipliers for both disturbance settings.
    Args:
        config: ScenarioConfig used at every point (multiplier, theta_lr and d(t) replaced)
        multipliers: ascending values >= 1
        out_dir: receives <name>_sweep.csv and <name>_sweep.json when given
        workers: > 1 runs points in a process pool
    Returns:
        pandas DataFrame with one row per (setting, multiplier, run); failed points
        have status "failed" and no metrics
    """
    multipliers = [float(value) for value in multipliers]
    if not multipliers or any(value < 1.0 for value in multipliers):
        raise ConfigError("sweep multipliers must all be >= 1", key="multipliers")
    if any(b < a for a, b in zip(multipliers, multipliers[1:])):
        raise ConfigError("sweep multipliers must be ascending", key="multipliers")

    points = [
        (replace(config, multiplier=multiplier, name=f"{config.name}_{setting}_x{multiplier:g}",
                 **overrides), setting, multiplier)
        for setting, overrides in sweep_settings(config).items()
        for multiplier in multipliers
    ]
    logger.info("sweep over %d points with %d worker(s)", len(points), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, *zip(*points)))
    else:
        results = [_sweep_point(*point) for point in points]

    rows = [row for result in results for row in result]
    failures = [row for row in rows if row["status"] == "failed"]
    table = pd.DataFrame([{key: row.get(key) for key in SWEEP_COLUMNS} for row in rows],
                         columns=SWEEP_COLUMNS)
    table = table.sort_values(["setting", "multiplier"], kind="stable", ignore_index=True)

    if out_dir is not None:
        csv_path = os.path.join(out_dir, f"{config.name}_sweep.csv")
        replace_atomically(
            lambda handle: table.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n"),
            csv_path,
        )
        write_json(
            {"config": config.to_dict(), "multipliers": multipliers,
             "runs": list(RUN_NAMES.values()), "rows": table.to_dict(orient="records"),
             "failures": failures},
            os.path.join(out_dir, f"{config.name}_sweep.json"),
        )
        logger.info("sweep table written to %s", csv_path)
    return table
