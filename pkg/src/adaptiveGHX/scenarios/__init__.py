"""Scenario configs, reference targets, the four-run scenario and the multiplier sweep."""
from adaptiveGHX.scenarios.artifacts import RunArtifacts
from adaptiveGHX.scenarios.config import PRESETS, ScenarioConfig, preset, resolve_config
from adaptiveGHX.scenarios.run_scenario import RUN_NAMES, run_scenario
from adaptiveGHX.scenarios.sweep import parse_sweep, run_multiplier_sweep
from adaptiveGHX.scenarios.targets import ingest_csv_reference, synthetic_reference_target
