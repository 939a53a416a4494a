# Lyapunov diagnostics for adaptive runs:
#   V(e, theta_tilde) = e^T P e + tr(theta_tilde^T (Lambda^T Gamma^-1) theta_tilde)

import numpy as np

from adaptiveGHX.matcore import solve_linear
from adaptiveGHX.utils.errors import DimensionError


def parameter_weight(lam, gamma):
    """Lambda^T S with S = Gamma^-1."""
    return lam.T @ solve_linear(gamma, np.eye(gamma.shape[0]))


def lyapunov_trace(record, p, true_theta=None, lam=None, gamma=None):
    """
    V(t) along a recorded run.

    With true_theta (plus Lambda and Gamma) the parameter term is included, otherwise
    only e^T P e.
    """
    if record.e is None:
        raise DimensionError("record carries no tracking error")
    values = np.einsum("ti,ij,tj->t", record.e, p, record.e)
    if true_theta is not None:
        if record.theta_hat is None:
            raise DimensionError("record carries no parameter snapshots")
        weight = parameter_weight(lam, gamma)
        tilde = record.theta_hat - true_theta[None, :, :]
        values = values + np.einsum("tki,kl,tli->t", tilde, weight, tilde)
    return values


def barbalat_check(times, v, e, fraction=0.1):
    """
    Numerical stand-in for Barbalat's argument on a sampled run.
    Returns:
        dict with the largest per-step increase of V, V(0), the finite-difference
        dV/dt over the last `fraction` of the run, and the ratio of the mean ||e||
        over the last and first `fraction` of the run
    """
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(np.asarray(e, dtype=float), axis=1)
    span = max(1, int(round(fraction * len(times))))
    head = float(np.mean(norms[:span]))
    tail = float(np.mean(norms[-span:]))
    v_dot = np.gradient(v, times)
    return {
        "v0": float(v[0]),
        "max_increase": float(np.max(np.diff(v))) if len(v) > 1 else 0.0,
        "tail_max_abs_v_dot": float(np.max(np.abs(v_dot[-span:]))),
        "head_mean_error": head,
        "tail_mean_error": tail,
        "tail_to_head": tail / head if head > 0 else 0.0,
    }


def sigma_error_bound(p, b_r, d_max, q_lyap):
    """
    Radius bounding ||e|| under the sigma-modified law with ||d(t)|| <= d_max:
    2 ||P B_r|| d_max / lambda_min(Q_lyap).
    """
    return 2.0 * np.linalg.norm(p @ b_r, 2) * d_max / float(np.min(np.linalg.eigvalsh(q_lyap)))
