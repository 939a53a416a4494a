# LQR outer loop: Lyapunov and Riccati solvers and the GHX gain design.
#
#   Lyapunov:  P A_h + A_h^T P = -Q            (Kronecker vectorisation)
#   CARE:      A^T P + P A - P B R^-1 B^T P + Q = 0   (Newton-Kleinman)

import logging
from dataclasses import dataclass

import numpy as np

from adaptiveGHX.analysis.controllability import controllability_report
from adaptiveGHX.matcore import frobenius_norm, is_hurwitz, kron, solve_linear
from adaptiveGHX.utils.errors import ConvergenceError, StabilityError

logger = logging.getLogger(__name__)

CARE_TOL = 1e-10
CARE_ACCEPT = 1e-8
CARE_MAX_ITER = 100


def solve_lyapunov(a_h, q_lyap, require_definite=True):
    """
    Solve P A_h + A_h^T P = -Q for symmetric P.

    (I kron A_h^T + A_h^T kron I) vec(P) = -vec(Q), column-major vec, then symmetrised.
    Args:
        a_h: Hurwitz n x n matrix
        q_lyap: symmetric n x n weight (positive definite unless require_definite=False)
    Returns:
        P (n x n)
    Raises:
        StabilityError if a_h is not Hurwitz or P comes out indefinite
    """
    if not is_hurwitz(a_h):
        raise StabilityError("Lyapunov equation needs a Hurwitz matrix", a_h=a_h)
    n = a_h.shape[0]
    identity = np.eye(n)
    operator = kron(identity, a_h.T) + kron(a_h.T, identity)
    vec_q = q_lyap.reshape((-1, 1), order="F")
    p = solve_linear(operator, -vec_q).reshape((n, n), order="F")
    p = 0.5 * (p + p.T)
    if require_definite and np.min(np.linalg.eigvalsh(p)) <= 0.0:
        raise StabilityError("Lyapunov solution is not positive definite", p=p)
    logger.debug("Lyapunov residual %.3e", lyapunov_residual(a_h, q_lyap, p))
    return p


def lyapunov_residual(a_h, q_lyap, p):
    return frobenius_norm(p @ a_h + a_h.T @ p + q_lyap)


def care_residual(a, b, q, r, p):
    return frobenius_norm(a.T @ p + p @ a - p @ b @ solve_linear(r, b.T) @ p + q)


def solve_care(a, b, q, r, k0=None, tol=CARE_TOL, max_iter=CARE_MAX_ITER):
    """
    Stabilising solution of the continuous algebraic Riccati equation.

    Newton-Kleinman: with K_k stabilising, solve
        (A - B K_k)^T P + P (A - B K_k) = -(Q + K_k^T R K_k),  K_{k+1} = R^-1 B^T P.
    K_0 = 0 when A is Hurwitz, otherwise k0 must be a stabilising gain.
    """
    n, m = b.shape
    gain_map = solve_linear(r, b.T)
    if k0 is None:
        if not is_hurwitz(a):
            raise StabilityError("A is not Hurwitz and no stabilising initial gain was given")
        k = np.zeros((m, n))
    else:
        k = np.array(k0, dtype=float)
        if not is_hurwitz(a - b @ k):
            raise StabilityError("initial gain does not stabilise (A, B)", k0=k)

    p = None
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        p_next = solve_lyapunov(a - b @ k, q + k.T @ r @ k, require_definite=False)
        residual = care_residual(a, b, q, r, p_next)
        change = np.inf if p is None else frobenius_norm(p_next - p)
        p = p_next
        k = gain_map @ p
        logger.debug("Newton-Kleinman iteration %d: residual %.3e", iteration, residual)
        if residual <= tol:
            break
        if change <= 1e-14 * max(1.0, frobenius_norm(p)):
            # fixed point reached at working precision
            break
    if residual > CARE_ACCEPT:
        raise ConvergenceError(
            "Newton-Kleinman stalled before reaching the Riccati tolerance",
            iterations=iteration,
            residual=residual,
        )
    logger.debug("CARE solved in %d iterations, residual %.3e", iteration, residual)
    return p


@dataclass(frozen=True)
class LqrDesign:
    q: np.ndarray
    r: np.ndarray
    p_care: np.ndarray
    k: np.ndarray
    a_h: np.ndarray

    @property
    def theta_star_r(self):
        """Nominal matching gain: A_r + B_r theta*_r = A_h gives theta*_r = -K."""
        return -self.k


def design_lqr(model, q_scale=10.0, r_scale=1000.0):
    """
    LQR on the nominal model with Q = q_scale I and R = r_scale I.
    Returns:
        LqrDesign with K = R^-1 B^T P and A_h = A - B K
    """
    report = controllability_report(model.a, model.b)
    if report.rank < model.n:
        raise StabilityError(
            "(A, B) is not controllable", rank=report.rank, singular_values=report.singular_values
        )
    q = q_scale * np.eye(model.n)
    r = r_scale * np.eye(model.m)
    p_care = solve_care(model.a, model.b, q, r)
    k = solve_linear(r, model.b.T @ p_care)
    a_h = model.a - model.b @ k
    if not is_hurwitz(a_h):
        raise StabilityError("LQR closed loop is not Hurwitz", a_h=a_h)
    logger.info(
        "LQR design: Q=%g I, R=%g I, CARE residual %.2e, closed-loop eigenvalues %s",
        q_scale, r_scale, care_residual(model.a, model.b, q, r, p_care),
        np.round(np.linalg.eigvals(a_h), 6),
    )
    return LqrDesign(q=q, r=r, p_care=p_care, k=k, a_h=a_h)
