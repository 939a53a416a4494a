# this code does the basic checks
# like if the scenario config exists and only carries keys ScenarioConfig knows about
# and if the output directory exists or can be created

import os

import yaml

from adaptiveGHX.utils.errors import ConfigError

REQUIRED_KEYS = ["name"]
NESTED_KEYS = {
    "lqr": {"q_scale", "r_scale"},
    "adaptive": {"gamma_scale", "q_lyap_scale", "init"},
    "disturbance": {"kind", "amplitude", "f0", "f1"},
    "savgol": {"window", "poly_order", "resample_points"},
}


def load_yaml(path):
    if not os.path.exists(path):
        raise ConfigError(f"The config file {path} does not exist", key="config")
    with open(path, "r") as f:
        try:
            loaded = yaml.safe_load(f)
        except yaml.YAMLError as err:
            raise ConfigError(f"The config file {path} is not valid YAML: {err}", key="config") from err
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"The config file {path} must hold a mapping", key="config")
    return loaded


def check_config(config, known_keys, require_all=False):
    """
    This function checks that the config only has keys ScenarioConfig understands
    Args:
        config: Either path to the config file (str) or loaded config dict
        known_keys: top-level field names of ScenarioConfig
        require_all: also insist on the REQUIRED_KEYS
    Returns:
        the loaded config dict
    """
    # If config is a string (file path), load it
    if isinstance(config, (str, os.PathLike)):
        config = load_yaml(config)

    unknown = sorted(set(config) - set(known_keys))
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}", key=unknown[0])
    if require_all:
        missing = [key for key in REQUIRED_KEYS if key not in config]
        if missing:
            raise ConfigError(f"Missing config keys: {', '.join(missing)}", key=missing[0])

    for block, allowed in NESTED_KEYS.items():
        value = config.get(block)
        if value is None:
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"'{block}' must be a mapping", key=block)
        extra = sorted(set(value) - allowed)
        if extra:
            raise ConfigError(f"Unknown keys in '{block}': {', '.join(extra)}", key=f"{block}.{extra[0]}")
    return config


def check_output_directory(out_dir):
    """
    This function creates the output directory if it doesn't exist
    Args:
        out_dir: directory that receives trajectories, summaries and logs
    Returns:
        the absolute path of the directory
    """
    if os.path.exists(out_dir) and not os.path.isdir(out_dir):
        raise ConfigError(f"The output path {out_dir} is not a directory", key="out_dir")
    os.makedirs(out_dir, exist_ok=True)
    return os.path.abspath(out_dir)
