import json
import os

import numpy as np
import pandas as pd
import pytest
import yaml
from scipy.integrate import trapezoid

from conftest import SHORT_HORIZON, short_config

from adaptiveGHX.control.reference import generate_reference
from adaptiveGHX.matcore import solve_linear
from adaptiveGHX.scenarios.config import PRESETS, ScenarioConfig, preset, resolve_config
from adaptiveGHX.scenarios.run_scenario import RUN_NAMES, run_scenario
from adaptiveGHX.scenarios.sweep import parse_sweep, run_multiplier_sweep, sweep_settings
from adaptiveGHX.scenarios.targets import (
    ingest_csv_reference,
    synthetic_reference_target,
    write_target_csv,
)
from adaptiveGHX.utils.errors import ConfigError, ReferenceDataError

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config")


# ---------- configuration ----------

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_resolve(name):
    config = preset(name)
    assert config.name == name
    assert config.multiplier >= 1.0


def test_theory_preset():
    config = preset("theory")
    assert config.lambda_mode == "theory"
    assert config.reference == "equilibrium"
    assert config.adaptive.init == "partial"
    assert config.adaptive.gamma_scale == 1e-4
    assert config.x0_offset == (0.01, 0.1)


def test_presets_separate_uncertainty_nonlinearity_and_disturbance():
    for name in ("perturbed_no_ac", "perturbed_ac", "perturbed_ac_explicit_d"):
        config = preset(name)
        assert config.theta_lr_preset == "zero"
        assert config.disturbance.kind == "none"
    for name in ("disturbed_no_ac", "disturbed_ac", "disturbed_ac_explicit_d"):
        config = preset(name)
        assert config.theta_lr_preset == "identity"
        assert config.disturbance.kind == "none"
        assert config.adaptive.init == "partial"
    bounded = preset("disturbed_sigma")
    assert bounded.disturbance.kind == "chirp"
    assert bounded.disturbance.amplitude == 0.05
    assert bounded.sigma == 1e-3


def test_unknown_keys_and_values_are_rejected(tmp_path):
    with pytest.raises(ConfigError):
        resolve_config(scenario="no_such_scenario")
    path = tmp_path / "bad.yaml"
    path.write_text("name: x\ncolour: red\n")
    with pytest.raises(ConfigError) as info:
        resolve_config(config_path=str(path))
    assert info.value.key == "colour"
    path.write_text("adaptive:\n  gain: 1.0\n")
    with pytest.raises(ConfigError):
        resolve_config(config_path=str(path))
    with pytest.raises(ConfigError):
        ScenarioConfig(multiplier=0.5)
    with pytest.raises(ConfigError):
        ScenarioConfig(theta_lr_preset="huge")


def test_precedence_preset_file_flags(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump({"multiplier": 1.25, "seed": 7, "adaptive": {"init": "true"}}))
    config = resolve_config("disturbed_ac", str(path), {"multiplier": 1.8, "seed": None})
    assert config.name == "disturbed_ac"
    assert config.theta_lr_preset == "identity"
    assert config.seed == 7
    assert config.multiplier == 1.8
    assert config.adaptive.init == "true"
    assert config.adaptive.gamma_scale == 1e-2


def test_shipped_configs_load():
    for path in ("scenario.yaml", "sweep.yaml"):
        config = resolve_config(config_path=os.path.join(CONFIG_DIR, path))
        assert config.horizon == 5250.0


# ---------- targets and references ----------

def test_synthetic_target_is_deterministic(ghx):
    times = np.arange(0.0, SHORT_HORIZON + 1.0)
    first = synthetic_reference_target(SHORT_HORIZON, 1.0, 3, ghx)(times)
    second = synthetic_reference_target(SHORT_HORIZON, 1.0, 3, ghx)(times)
    assert first.tobytes() == second.tobytes()
    other = synthetic_reference_target(SHORT_HORIZON, 1.0, 4, ghx)(times)
    assert not np.array_equal(first, other)


def test_synthetic_target_shape(ghx, short_target):
    values = short_target(np.arange(0.0, SHORT_HORIZON + 1.0))
    assert values[0, 0] == pytest.approx(-1.5, abs=0.02)
    assert values[0, 1] == pytest.approx(900.0, abs=10.0)
    mid = short_target(np.array([0.4 * SHORT_HORIZON]))[0]
    assert mid[1] == pytest.approx(1075.0, abs=10.0)
    assert values[-1, 1] == pytest.approx(900.0, abs=10.0)


def test_synthetic_target_needs_long_horizon(ghx):
    with pytest.raises(ConfigError):
        synthetic_reference_target(500.0, 1.0, 0, ghx)


def test_constant_profile_holds_equilibrium(ghx, design):
    target = synthetic_reference_target(SHORT_HORIZON, 1.0, 0, ghx, profile="constant")
    ref = generate_reference(design, ghx, target, SHORT_HORIZON, 1.0)
    x_eq = ghx.equilibrium()[:, 0]
    np.testing.assert_allclose(ref.x_r, np.tile(x_eq, (len(ref.times), 1)), rtol=1e-9, atol=1e-9)
    u_hold = solve_linear(ghx.b, -ghx.a @ x_eq[:, None] - ghx.d)[:, 0]
    np.testing.assert_allclose(ref.u_r, np.tile(u_hold, (len(ref.times), 1)), atol=1e-9)


def test_nominal_lqr_tracks_synthetic_target(short_reference):
    span = np.ptp(short_reference.target, axis=0)
    settled = short_reference.times > 100.0
    error = np.abs(short_reference.x_r - short_reference.target)[settled]
    assert np.all(np.max(error, axis=0) <= 0.05 * span)


def test_ingest_quadratic_csv(tmp_path):
    t = np.arange(0.0, 100.0)
    frame = pd.DataFrame({"t": t, "x0": 1e-3 * t**2, "x1": 2.0 + 0.5 * t - 0.01 * t**2})
    path = tmp_path / "quad.csv"
    frame.to_csv(path, index=False)
    target = ingest_csv_reference(str(path), window=11, poly_order=2)
    np.testing.assert_allclose(target.values, frame[["x0", "x1"]].to_numpy(), atol=1e-9)
    resampled = ingest_csv_reference(str(path), window=11, poly_order=2, resample_points=50)
    assert len(resampled.times) == 50


@pytest.mark.parametrize(
    "body, row",
    [
        ("t,x0,x1\n0,1,2\n1,1,2\n1,1,2\n2,1,2\n", 4),
        ("t,x0,x1\n0,1,2\n1,abc,2\n2,1,2\n", 3),
        ("t,x0,x1\n0,1,2\n2,1,2\n1,1,2\n", 4),
        ("time,a,b\n0,1,2\n", 1),
    ],
)
def test_ingest_reports_bad_rows(tmp_path, body, row):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ReferenceDataError) as info:
        ingest_csv_reference(str(path), window=3, poly_order=2)
    assert info.value.row == row
    assert info.value.exit_code == 2


def test_ingest_needs_enough_samples(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("t,x0,x1\n0,1,2\n1,1,2\n2,1,2\n")
    with pytest.raises(ReferenceDataError):
        ingest_csv_reference(str(path), window=501, poly_order=2)
    with pytest.raises(ReferenceDataError):
        ingest_csv_reference(str(tmp_path / "missing.csv"))


# ---------- scenario runs ----------

def test_short_scenario_writes_artifacts(tmp_path):
    config = short_config(name="artifacts")
    artifacts = run_scenario(config, out_dir=str(tmp_path))
    assert set(artifacts.trajectories) == set(RUN_NAMES)
    summary = json.loads(open(artifacts.summary_path).read())
    assert [run["name"] for run in summary["runs"]] == list(RUN_NAMES.values())
    assert summary["timing"]["steps"] == int(SHORT_HORIZON)
    assert summary["config"]["name"] == "artifacts"
    baseline = summary["runs"][0]["normalized"]
    assert baseline["mae"] == [1.0, 1.0]
    assert baseline["ce"] == {"l1": 1.0, "l2": 1.0}

    times = None
    for run, (key, path) in zip(summary["runs"], sorted(artifacts.trajectories.items())):
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["t", "x0", "x1", "xr0", "xr1", "u0", "u1", "e0", "e1", "V"]
        assert len(frame) == int(SHORT_HORIZON) + 1
        times = frame["t"].to_numpy()
        e = frame[["e0", "e1"]].to_numpy()
        np.testing.assert_allclose(e, frame[["x0", "x1"]].to_numpy() - frame[["xr0", "xr1"]].to_numpy(),
                                   atol=1e-9)
        np.testing.assert_allclose(np.mean(np.abs(e), axis=0), run["mae"], rtol=1e-9, atol=1e-12)
        u_norm = np.linalg.norm(frame[["u0", "u1"]].to_numpy(), axis=1)
        assert trapezoid(u_norm, times) == pytest.approx(run["ce"]["l2"], rel=1e-9)


def test_unit_multiplier_runs_reproduce_baseline():
    config = short_config(multiplier=1.0, theta_lr_preset="zero", adaptive={"init": "true"})
    records = run_scenario(config).records
    for key in ("b", "c", "d"):
        np.testing.assert_allclose(records[key].x, records["a"].x, atol=1e-6, rtol=0)


def test_explicit_offset_with_true_init_matches_baseline():
    config = short_config(adaptive={"init": "true"})
    summary = run_scenario(config).summary
    explicit = summary["runs"][3]["normalized"]
    np.testing.assert_allclose(explicit["mae"], [1.0, 1.0], rtol=1e-6)
    lqr_only = summary["runs"][1]["normalized"]
    assert lqr_only["mae"][1] > explicit["mae"][1]


def test_csv_round_trip_reproduces_metrics(tmp_path, short_reference, short_target):
    config = short_config(name="synthetic")
    direct = run_scenario(config).summary
    path = write_target_csv(str(tmp_path / "target.csv"), short_target, short_reference.times)
    replay = run_scenario(
        short_config(name="replay", reference=path, savgol={"window": 3, "poly_order": 2})
    ).summary
    for first, second in zip(direct["runs"], replay["runs"]):
        np.testing.assert_allclose(second["mae"], first["mae"], rtol=1e-9)
        np.testing.assert_allclose(second["itae"], first["itae"], rtol=1e-9)
        assert second["ce"]["l2"] == pytest.approx(first["ce"]["l2"], rel=1e-9)


def test_chirp_spans_the_csv_horizon(tmp_path, short_reference, short_target):
    path = write_target_csv(str(tmp_path / "target.csv"), short_target, short_reference.times)
    config = short_config(
        name="chirp_csv",
        horizon=2 * SHORT_HORIZON,
        reference=path,
        savgol={"window": 3, "poly_order": 2},
        disturbance={"kind": "chirp", "amplitude": 0.05},
    )
    assert config.perturbation().disturbance.horizon == 2 * SHORT_HORIZON
    assert config.perturbation(horizon=SHORT_HORIZON).disturbance.horizon == SHORT_HORIZON
    summary = run_scenario(config).summary
    assert summary["timing"]["steps"] == int(SHORT_HORIZON)
    assert summary["diagnostics"]["disturbance"]["kind"] == "chirp"
    assert summary["diagnostics"]["disturbance"]["horizon"] == pytest.approx(SHORT_HORIZON)


@pytest.mark.slow
def test_theory_mode_lyapunov_certificate():
    config = preset("theory")
    artifacts = run_scenario(config)
    record = artifacts.records["c"]
    v = record.v
    assert np.all(np.diff(v) <= 1e-9 * max(1.0, v[0]))
    report = artifacts.summary["diagnostics"]["barbalat"]["c"]
    assert report["tail_to_head"] <= 0.05


@pytest.mark.slow
def test_sigma_modification_keeps_signals_bounded():
    artifacts = run_scenario(preset("disturbed_sigma"))
    for key in ("c", "d"):
        record = artifacts.records[key]
        error = np.linalg.norm(record.e, axis=1)
        theta = np.linalg.norm(record.theta_hat, axis=(1, 2))
        assert np.all(np.isfinite(error)) and np.all(np.isfinite(theta))
        tail = error[int(0.8 * len(error)):]
        assert np.max(tail) <= np.max(error)
    assert artifacts.summary["diagnostics"]["sigma_error_bound"] > 0


@pytest.mark.slow
def test_full_scenario_throughput():
    artifacts = run_scenario(preset("perturbed_ac"))
    assert len(artifacts.records["c"]) == 5251
    assert artifacts.records["c"].cpu_seconds < 5.0


@pytest.mark.slow
def test_unit_multiplier_full_horizon_equivalence():
    config = resolve_config(
        "nominal", overrides={"adaptive": {"init": "true"}}
    )
    records = run_scenario(config).records
    for key in ("b", "c", "d"):
        assert np.max(np.abs(records[key].x - records["a"].x)) <= 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("name", ["perturbed_ac", "disturbed_ac"])
def test_adaptive_correction_beats_lqr_at_fifty_percent(name):
    config = preset(name)
    assert config.adaptive.init == "partial"
    summary = run_scenario(config).summary
    runs = {run["name"]: run for run in summary["runs"]}
    lqr, ac, explicit = runs["lqr_perturbed"], runs["ac"], runs["ac_explicit_d"]
    assert ac["mae"][0] <= 0.7 * lqr["mae"][0]
    assert ac["itae"][0] <= 0.7 * lqr["itae"][0]
    assert explicit["mae"][0] < lqr["mae"][0]
    assert explicit["mae"][1] <= ac["mae"][1]
    assert summary["timing"]["cpu_seconds"] <= 20.0


# ---------- multiplier sweep ----------

def test_parse_sweep():
    assert parse_sweep("1.0:1.8:0.1") == [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8]
    assert parse_sweep("1:1:0.5") == [1.0]
    with pytest.raises(ConfigError):
        parse_sweep("1.0-1.8")
    with pytest.raises(ConfigError):
        parse_sweep("1.8:1.0:0.1")


def test_sweep_at_unit_multiplier_is_self_normalised(tmp_path):
    config = short_config(name="unit", theta_lr_preset="zero", adaptive={"init": "true"})
    table = run_multiplier_sweep(config, [1.0], out_dir=str(tmp_path))
    clean = table[table["setting"] == "no_disturbance"]
    assert len(clean) == len(RUN_NAMES)
    np.testing.assert_allclose(clean["ce_l2"], 1.0, rtol=1e-6)
    np.testing.assert_allclose(clean[["mae0", "mae1"]].to_numpy(), 1.0, rtol=1e-6)
    assert (tmp_path / "unit_sweep.csv").exists()
    assert (tmp_path / "unit_sweep.json").exists()


def test_sweep_settings_toggle_the_matched_nonlinearity():
    config = resolve_config(config_path=os.path.join(CONFIG_DIR, "sweep.yaml"))
    assert config.adaptive.init == "partial"
    settings = sweep_settings(config)
    assert settings["no_disturbance"]["theta_lr_preset"] == "zero"
    assert settings["disturbance"]["theta_lr_preset"] == "identity"
    for overrides in settings.values():
        assert overrides["disturbance"].kind == "none"
    scaled = sweep_settings(short_config(theta_lr_preset="scalar_1_5"))
    assert scaled["disturbance"]["theta_lr_preset"] == "scalar_1_5"


def test_sweep_rejects_bad_multipliers():
    with pytest.raises(ConfigError):
        run_multiplier_sweep(short_config(), [0.5, 1.0])
    with pytest.raises(ConfigError):
        run_multiplier_sweep(short_config(), [1.5, 1.0])


def test_sweep_records_point_failures(monkeypatch):
    from adaptiveGHX.scenarios import sweep
    from adaptiveGHX.utils.errors import NumericalError

    def explode(config):
        raise NumericalError("diverged", t=12.0)

    monkeypatch.setattr(sweep, "run_scenario", explode)
    table = run_multiplier_sweep(short_config(), [1.0, 1.5])
    assert list(table["status"]) == ["failed"] * 4


@pytest.mark.slow
def test_sweep_control_effort_grows_with_uncertainty():
    config = resolve_config(config_path=os.path.join(CONFIG_DIR, "sweep.yaml"))
    table = run_multiplier_sweep(config, parse_sweep("1.0:1.8:0.2"))
    clean = table[(table["setting"] == "no_disturbance") & (table["run"] == "ac_explicit_d")]
    ce = clean.sort_values("multiplier")["ce_l2"].to_numpy()
    assert np.all(np.diff(ce) >= -1e-9)


@pytest.mark.slow
def test_disturbance_costs_more_effort_at_fifty_percent():
    config = resolve_config(config_path=os.path.join(CONFIG_DIR, "sweep.yaml"))
    assert config.adaptive.init == "partial"
    table = run_multiplier_sweep(config, [1.5])
    ac = table[table["run"] == "ac_explicit_d"].set_index("setting")
    assert ac.loc["disturbance", "ce_l2"] > ac.loc["no_disturbance", "ce_l2"]
