import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

FLOAT_FORMAT = "%.17g"


def replace_atomically(write, path):
    """Write through a temporary file in the target directory, then rename over path."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            write(handle)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def write_trajectory_csv(record, path):
    """Trajectory as t,x0,x1,xr0,xr1,u0,u1,e0,e1,V with 17 significant digits."""
    frame = record.to_frame()
    return replace_atomically(
        lambda handle: frame.to_csv(
            handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        ), path
    )


def json_safe(value):
    """Plain JSON types; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(document, path):
    return replace_atomically(
        lambda handle: handle.write(json.dumps(json_safe(document), indent=2) + "\n"), path
    )


@dataclass
class RunArtifacts:
    """Files written by one scenario: per-run trajectory CSVs, the summary and the log."""

    trajectories: dict = field(default_factory=dict)
    summary_path: str = None
    log_path: str = None
    summary: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)
