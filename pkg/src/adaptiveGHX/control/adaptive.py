# Model-reference adaptive inner loop around the LQR reference.
#
#   Phi   = [u_r - theta*_r x_r + f1r(x_r); phi(x); x]
#   u     = theta_hat Phi
#   theta_hat' = -Gamma B_r^T P e Phi^T - sigma theta_hat,   e = x - x_r
#
# theta_hat is one m x (m + k + n) block [Lambda^-1 | -Lambda^-1 theta_lr | theta*].

import enum
import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from adaptiveGHX.analysis.lyapunov import lyapunov_trace
from adaptiveGHX.control.lqr import lyapunov_residual, solve_lyapunov
from adaptiveGHX.matcore import frobenius_norm, mat_mul, solve_linear
from adaptiveGHX.plant.model import BasisKind, true_plant_derivative
from adaptiveGHX.plant.simulate import TrajectoryRecord, check_divergence, rk4_step
from adaptiveGHX.utils.errors import (
    ConfigError,
    DimensionError,
    MatchingConditionError,
    NumericalError,
)

logger = logging.getLogger(__name__)

MATCHING_TOL = 1e-8
LYAPUNOV_TOL = 1e-10
GAMMA_SCALE = 1e-4
Q_LYAP_SCALE = 1e-6


class InitMode(str, enum.Enum):
    PARTIAL = "partial"
    TRUE = "true"
    NOMINAL = "nominal"


@dataclass(frozen=True)
class AdaptiveController:
    theta_hat: np.ndarray
    gamma: np.ndarray
    sigma: float
    p_lyap: np.ndarray
    q_lyap: np.ndarray
    basis: object
    b_r: np.ndarray
    theta_star_r: np.ndarray

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0", key="sigma")
        expected = (self.m, self.m + self.basis.dim + self.n)
        if self.theta_hat.shape != expected:
            raise DimensionError(
                "theta_hat blocks must have widths (m, k, n)",
                shape=list(self.theta_hat.shape), expected=list(expected),
            )

    @property
    def n(self):
        return self.b_r.shape[0]

    @property
    def m(self):
        return self.b_r.shape[1]

    @property
    def k(self):
        return self.basis.dim

    def blocks(self):
        """theta_hat split into its (Lambda^-1, -Lambda^-1 theta_lr, theta*) blocks."""
        return np.split(self.theta_hat, [self.m, self.m + self.k], axis=1)


def build_theta_star(a_true, b_true, a_h):
    """
    theta* with A_true + B_true theta* = A_h.

    Square B is solved directly; a tall B uses the normal equations
    (B^T B)^-1 B^T (A_h - A).
    Raises:
        MatchingConditionError if A_h - A_true is not in the span of B_true
    """
    gap = a_h - a_true
    if b_true.shape[0] == b_true.shape[1]:
        theta_star = solve_linear(b_true, gap)
    else:
        theta_star = solve_linear(b_true.T @ b_true, b_true.T @ gap)
    residual = frobenius_norm(a_true + b_true @ theta_star - a_h)
    if residual > MATCHING_TOL:
        raise MatchingConditionError(
            "matching condition A + B theta* = A_h has no solution", residual=residual
        )
    return theta_star


def controller_basis(model_basis, explicit_d):
    """The constant regressor is appended when the affine offset error is estimated online."""
    if explicit_d:
        return replace(model_basis, kind=BasisKind.SINE_PLUS_CONSTANT)
    return model_basis


def matched_nonlinearity_gain(spec, basis, b_r):
    """
    theta_lr as the controller sees it, m x k for the controller basis: the plant's
    sin(x) gains followed, for the constant regressor, by B_r^-1 D_tilde.
    """
    m = b_r.shape[1]
    gain = np.zeros((m, basis.dim))
    if basis.kind is BasisKind.NONE:
        return gain
    if spec.theta_lr is not None and spec.theta_lr.size:
        width = min(spec.theta_lr.shape[1], basis.n)
        gain[:, :width] = spec.theta_lr[:, :width]
    if basis.kind is BasisKind.SINE_PLUS_CONSTANT and spec.d_tilde is not None:
        gain[:, -1] = solve_linear(b_r, spec.d_tilde)[:, 0]
    return gain


def true_theta(model_true, spec, a_h, b_r, basis):
    """
    The ideal parameter block [Lambda^-1 | -Lambda^-1 theta_lr | theta*] of the true
    plant; used by the harness for initialisation and V(t), never by the control law.
    """
    lam_inv = spec.lam_inv
    theta_lr = matched_nonlinearity_gain(spec, basis, b_r)
    theta_star = build_theta_star(model_true.a, model_true.b, a_h)
    return np.hstack([lam_inv, -lam_inv @ theta_lr, theta_star])


def initial_theta(mode, theta_star_r, m, k, lam=None, theta_lr=None, theta=None):
    """
    theta_hat(0):
        partial  Lambda_0 = 0.8 Lambda, theta*_0 = theta*_r, (theta_lr)_0 = 0.75 theta_lr
        true     theta_hat(0) = theta
        nominal  [I | 0 | theta*_r]
    """
    mode = InitMode(mode)
    if mode is InitMode.TRUE:
        if theta is None:
            raise ConfigError("init 'true' needs the true parameter block", key="init")
        return np.array(theta, dtype=float)
    if mode is InitMode.NOMINAL:
        return np.hstack([np.eye(m), np.zeros((m, k)), theta_star_r])
    if lam is None or theta_lr is None:
        raise ConfigError("init 'partial' needs Lambda and theta_lr", key="init")
    lam0_inv = solve_linear(0.8 * lam, np.eye(m))
    return np.hstack([lam0_inv, -lam0_inv @ (0.75 * theta_lr), theta_star_r])


def build_adaptive_controller(
    design, model, basis, gamma_scale=GAMMA_SCALE, q_lyap_scale=Q_LYAP_SCALE, sigma=0.0, theta0=None
):
    """
    Gains from scaled identities (Gamma = gamma_scale I, Q_lyap = q_lyap_scale I) and
    P from the Lyapunov equation of the LQR closed loop A_h.
    Args:
        design: LqrDesign on the nominal model
        model: nominal PlantModel (supplies B_r)
        basis: regressor basis of the controller
        theta0: initial theta_hat, nominal initialisation when None
    """
    n, m = model.b.shape
    q_lyap = q_lyap_scale * np.eye(n)
    p_lyap = solve_lyapunov(design.a_h, q_lyap)
    residual = lyapunov_residual(design.a_h, q_lyap, p_lyap)
    if residual > LYAPUNOV_TOL:
        raise NumericalError("Lyapunov residual above tolerance", residual=residual)
    if theta0 is None:
        theta0 = initial_theta(InitMode.NOMINAL, design.theta_star_r, m, basis.dim)
    return AdaptiveController(
        theta_hat=np.array(theta0, dtype=float),
        gamma=gamma_scale * np.eye(m),
        sigma=float(sigma),
        p_lyap=p_lyap,
        q_lyap=q_lyap,
        basis=basis,
        b_r=model.b,
        theta_star_r=design.theta_star_r,
    )


def build_regressor(ref, i, x, basis, theta_star_r, f1r=None):
    """Phi at reference sample i and state x, an (m + k + n) x 1 column."""
    x_r = ref.x_col(i)
    if x.shape != x_r.shape:
        raise DimensionError("state does not match the reference", x=list(x.shape), x_r=list(x_r.shape))
    feedforward = ref.u_col(i) - mat_mul(theta_star_r, x_r)
    if f1r is not None:
        shift = np.asarray(f1r(x_r), dtype=float)
        if shift.shape != feedforward.shape:
            raise DimensionError(
                "f1r must return one entry per input",
                shape=list(shift.shape), expected=list(feedforward.shape),
            )
        feedforward = feedforward + shift
    return np.vstack([feedforward, basis(x), x])


def adaptive_control_input(ctrl, phi):
    if phi.shape[0] != ctrl.theta_hat.shape[1]:
        raise DimensionError(
            "regressor length does not match theta_hat",
            phi=phi.shape[0], theta_hat=ctrl.theta_hat.shape[1],
        )
    return mat_mul(ctrl.theta_hat, phi)


def adaptive_update(ctrl, e, phi, dt):
    """One explicit Euler step of the (sigma-modified) adaptive law."""
    if dt <= 0:
        raise ConfigError("dt must be positive", key="dt")
    drive = -mat_mul(mat_mul(ctrl.gamma @ ctrl.b_r.T @ ctrl.p_lyap, e), phi.T)
    theta_hat = ctrl.theta_hat + dt * (drive - ctrl.sigma * ctrl.theta_hat)
    if not np.all(np.isfinite(theta_hat)):
        raise NumericalError(
            "adaptive update produced non-finite parameters",
            error_norm=float(np.linalg.norm(e)),
            regressor_norm=float(np.linalg.norm(phi)),
        )
    return replace(ctrl, theta_hat=theta_hat)


def run_adaptive_tracking(
    model_true, spec, ref, ctrl0, explicit_d, true_theta=None, adapt=True, f1r=None, x0=None
):
    """
    Closed loop of the true plant under the adaptive law along ref.

    theta_hat and the reference sample are held over each step while the regressor
    follows the state through the RK4 stages; theta_hat then takes one Euler step
    from the sampled e and Phi.
    Args:
        model_true, spec: true plant and its echo from apply_uncertainty
        ref: ReferenceTrajectory from generate_reference
        ctrl0: initial AdaptiveController
        explicit_d: the controller estimates B_r^-1 D_tilde on a constant regressor
        true_theta: ideal parameter block, only used for the V(t) diagnostic
        adapt: False freezes theta_hat at ctrl0.theta_hat
        x0: initial state, x_r(0) by default
    Returns:
        TrajectoryRecord with e = x - x_r, theta_hat snapshots and V when true_theta is set
    """
    if explicit_d and ctrl0.basis.kind is not BasisKind.SINE_PLUS_CONSTANT:
        raise ConfigError(
            "explicit_d needs the sine_plus_constant regressor basis", key="explicit_d"
        )
    times, dt = ref.times, ref.dt
    count = len(times)
    x = ref.x_col(0) if x0 is None else np.array(x0, dtype=float).reshape(-1, 1)
    if x.shape[0] != model_true.n:
        raise DimensionError("x0 needs one entry per state", shape=list(x.shape), n=model_true.n)
    xs = np.empty((count, model_true.n))
    us = np.empty((count, model_true.m))
    es = np.empty((count, model_true.n))
    thetas = np.empty((count,) + ctrl0.theta_hat.shape)

    ctrl = ctrl0
    start = time.process_time()
    for i, t in enumerate(times):
        check_divergence(x, t)
        phi = build_regressor(ref, i, x, ctrl.basis, ctrl.theta_star_r, f1r)
        u = adaptive_control_input(ctrl, phi)
        e = x - ref.x_col(i)
        xs[i], us[i], es[i] = x[:, 0], u[:, 0], e[:, 0]
        thetas[i] = ctrl.theta_hat
        if i == count - 1:
            break

        def closed_loop(s, y, i=i, ctrl=ctrl):
            law = adaptive_control_input(
                ctrl, build_regressor(ref, i, y, ctrl.basis, ctrl.theta_star_r, f1r)
            )
            return true_plant_derivative(model_true, spec, y, law, s)

        x = rk4_step(closed_loop, x, t, dt)
        if adapt:
            ctrl = adaptive_update(ctrl, e, phi, dt)
    cpu = time.process_time() - start

    record = TrajectoryRecord(
        times=times, x=xs, u=us, x_r=ref.x_r, u_r=ref.u_r, e=es,
        theta_hat=thetas, cpu_seconds=cpu,
        meta={"explicit_d": bool(explicit_d), "adapt": bool(adapt)},
    )
    if true_theta is not None:
        record.v = lyapunov_trace(record, ctrl0.p_lyap, true_theta, spec.lam, ctrl0.gamma)
    else:
        record.v = lyapunov_trace(record, ctrl0.p_lyap)
    logger.info(
        "adaptive run finished: %d samples, %.3f CPU s, final ||e|| %.3e",
        count, cpu, float(np.linalg.norm(es[-1])),
    )
    return record
