# This code runs one scenario as four linked closed-loop runs sharing one reference:
#   a  LQR on the nominal plant (the reference x_r itself)
#   b  the same LQR law on the perturbed plant
#   c  b plus the adaptive correction
#   d  c with the affine offset error estimated on a constant regressor
# and writes the per-run trajectories plus a combined metric summary.

import logging
import os
import time

import numpy as np

from adaptiveGHX.analysis.lyapunov import barbalat_check, sigma_error_bound
from adaptiveGHX.analysis.metrics import summarize
from adaptiveGHX.control.adaptive import (
    build_adaptive_controller,
    controller_basis,
    initial_theta,
    matched_nonlinearity_gain,
    run_adaptive_tracking,
    true_theta,
)
from adaptiveGHX.control.lqr import care_residual, design_lqr
from adaptiveGHX.control.reference import generate_reference
from adaptiveGHX.plant.model import apply_uncertainty, nominal_ghx_model
from adaptiveGHX.plant.simulate import TrajectoryRecord, simulate
from adaptiveGHX.scenarios.artifacts import RunArtifacts, write_json, write_trajectory_csv
from adaptiveGHX.scenarios.targets import (
    equilibrium_target,
    ingest_csv_reference,
    synthetic_reference_target,
)

logger = logging.getLogger(__name__)

RUN_NAMES = {
    "a": "lqr_nominal",
    "b": "lqr_perturbed",
    "c": "ac",
    "d": "ac_explicit_d",
}


def build_nominal_model(config):
    model = nominal_ghx_model(config.basis)
    if config.lambda_mode == "theory":
        # theory mode works on deviations from the open-loop equilibrium
        model = model.deviation_model()
    return model


def build_target(config, model):
    """Target and the horizon it supports (a CSV may be shorter than the configured horizon)."""
    horizon = config.horizon
    if config.reference == "synthetic":
        target = synthetic_reference_target(config.horizon, config.dt, config.seed, model)
    elif config.reference == "equilibrium":
        target = equilibrium_target(model)
    else:
        s = config.savgol
        target = ingest_csv_reference(
            config.reference, s.window, s.poly_order, dt=config.dt,
            resample_points=s.resample_points,
        )
        span = float(target.times[-1])
        if span < horizon:
            logger.warning("reference %s covers %.1f s, horizon cut from %.1f s", config.reference, span, horizon)
            horizon = span
    return target, horizon


def lqr_tracking_law(ref, k):
    """u = u_r + K (x_r - x) with the reference sample held over the step."""

    def law(i, t, x):
        return ref.u_col(i) + k @ (ref.x_col(i) - x)

    return law


def adaptive_run(config, design, nominal, model_true, echo, ref, explicit_d, x0):
    basis = controller_basis(nominal.basis, explicit_d)
    theta = true_theta(model_true, echo, design.a_h, nominal.b, basis)
    theta0 = initial_theta(
        config.adaptive.init,
        design.theta_star_r,
        nominal.m,
        basis.dim,
        lam=echo.lam,
        theta_lr=matched_nonlinearity_gain(echo, basis, nominal.b),
        theta=theta,
    )
    ctrl = build_adaptive_controller(
        design,
        nominal,
        basis,
        gamma_scale=config.adaptive.gamma_scale,
        q_lyap_scale=config.adaptive.q_lyap_scale,
        sigma=config.sigma,
        theta0=theta0,
    )
    record = run_adaptive_tracking(
        model_true, echo, ref, ctrl, explicit_d, true_theta=theta, x0=x0
    )
    return record, ctrl


def run_scenario(config, out_dir=None, log_path=None):
    """
    Execute runs a-d of one scenario.
    Args:
        config: ScenarioConfig
        out_dir: where CSVs and the summary go; nothing is written when None
        log_path: log file of this run, echoed into the artifacts
    Returns:
        RunArtifacts with the summary document and the in-memory records
    """
    logger.info("scenario %s: multiplier %.3f, reference %s", config.name, config.multiplier, config.reference)
    nominal = build_nominal_model(config)
    design = design_lqr(nominal, q_scale=config.lqr.q_scale, r_scale=config.lqr.r_scale)
    target, horizon = build_target(config, nominal)

    start = time.process_time()
    ref = generate_reference(design, nominal, target, horizon, config.dt)
    reference_cpu = time.process_time() - start

    model_true, echo = apply_uncertainty(
        nominal, config.perturbation(nominal.m, nominal.n, horizon=horizon)
    )
    x0 = ref.x_r[0] + np.array(config.x0_offset)

    records = {
        "a": TrajectoryRecord(
            times=ref.times, x=ref.x_r, u=ref.u_r, cpu_seconds=reference_cpu
        ),
        "b": simulate(
            model_true, echo, lqr_tracking_law(ref, design.k), horizon, config.dt, x0=x0
        ),
    }
    records["c"], ctrl = adaptive_run(config, design, nominal, model_true, echo, ref, False, x0)
    records["d"], _ = adaptive_run(config, design, nominal, model_true, echo, ref, True, x0)

    summaries = {}
    for key in RUN_NAMES:
        # every run is scored against the target the reference was generated from
        records[key] = records[key].with_reference(ref.target, ref.u_r)
        records[key].meta["run"] = RUN_NAMES[key]
        summaries[key] = summarize(records[key].e, records[key].u, ref.times)
    for key in RUN_NAMES:
        summaries[key].normalize(summaries["a"])

    cpu = sum(record.cpu_seconds for record in records.values())
    summary = {
        "config": config.to_dict(),
        "primary_run": config.primary_run,
        "runs": [dict(name=RUN_NAMES[key], **summaries[key].to_dict()) for key in RUN_NAMES],
        "timing": {
            "cpu_seconds": cpu,
            "steps": len(ref.times) - 1,
            "cpu_per_physical_second": cpu / (len(RUN_NAMES) * ref.horizon),
        },
        "diagnostics": _diagnostics(design, nominal, echo, records, ctrl),
    }
    logger.info(
        "scenario %s done in %.3f CPU s; normalized MAE c %s, d %s",
        config.name, cpu, summaries["c"].normalized["mae"], summaries["d"].normalized["mae"],
    )

    artifacts = RunArtifacts(summary=summary, records=records, log_path=log_path)
    if out_dir is not None:
        for key, name in RUN_NAMES.items():
            path = os.path.join(out_dir, f"{config.name}_{key}_{name}.csv")
            artifacts.trajectories[key] = write_trajectory_csv(records[key], path)
        artifacts.summary_path = write_json(summary, os.path.join(out_dir, f"{config.name}_summary.json"))
        logger.info("wrote %d trajectories and %s", len(artifacts.trajectories), artifacts.summary_path)
    return artifacts


def _diagnostics(design, nominal, echo, records, ctrl):
    diagnostics = {
        "care_residual": care_residual(nominal.a, nominal.b, design.q, design.r, design.p_care),
        "closed_loop_eigenvalues": np.linalg.eigvals(design.a_h).real.tolist(),
        "implied_lambda": echo.lam.tolist(),
        "barbalat": {
            key: barbalat_check(records[key].times, records[key].v, records[key].e)
            for key in ("c", "d")
        },
    }
    if echo.disturbance.active:
        diagnostics["disturbance"] = {
            "kind": echo.disturbance.kind.value,
            "bound": echo.disturbance.bound,
            "horizon": echo.disturbance.horizon,
        }
        diagnostics["sigma_error_bound"] = sigma_error_bound(
            ctrl.p_lyap, nominal.b, echo.disturbance.bound, ctrl.q_lyap
        )
    return diagnostics
