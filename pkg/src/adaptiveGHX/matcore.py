# Small dense real matrix kernel for the n <= 8 control problems of the GHX laboratory.
# A "Mat" is a 2-D float64 numpy array with finite entries; as_mat is the only place
# where that is enforced, every other function assumes it.

import logging
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from adaptiveGHX.utils.errors import (
    ConvergenceError,
    DimensionError,
    NumericalError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

# LU pivots below this fraction of max|entry| are treated as singular
PIVOT_RTOL = 1e-13
SVD_TOL = 1e-12
SVD_MAX_SWEEPS = 60


def as_mat(values, name="matrix"):
    """
    Validate and convert input to a Mat (2-D float64 array, finite, non-empty).
    Args:
        values: nested sequence or array
        name: label used in error messages
    Returns:
        np.ndarray of shape (rows, cols)
    """
    mat = np.array(values, dtype=float)
    if mat.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {mat.ndim}-D", shape=list(mat.shape))
    if mat.shape[0] < 1 or mat.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty", shape=list(mat.shape))
    if not np.all(np.isfinite(mat)):
        raise NumericalError(f"{name} has non-finite entries", matrix=mat)
    return mat


def mat_mul(a, b):
    """
    Standard matrix product a @ b.
    Raises DimensionError when a.cols != b.rows and NumericalError on overflow.
    """
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}",
            left=list(a.shape),
            right=list(b.shape),
        )
    product = a @ b
    if not np.all(np.isfinite(product)):
        raise NumericalError("matrix product overflowed", left=a, right=b)
    return product


def solve_linear(a, b):
    """
    Solve a @ x = b by LU with partial pivoting.
    Args:
        a: square Mat
        b: Mat with b.rows == a.rows
    Returns:
        x with the same shape as b
    Raises:
        SingularMatrixError naming the first pivot below PIVOT_RTOL * max|a|
    """
    rows, cols = a.shape
    if rows != cols:
        raise DimensionError(f"solve_linear needs a square matrix, got {rows}x{cols}")
    if b.shape[0] != rows:
        raise DimensionError(
            f"right-hand side has {b.shape[0]} rows, expected {rows}",
            left=list(a.shape),
            right=list(b.shape),
        )
    scale = np.max(np.abs(a))
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero", pivot=0)
    with warnings.catch_warnings():
        # exact zero pivots are reported below with their index
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a)
    pivots = np.abs(np.diag(lu))
    small = np.flatnonzero(pivots < PIVOT_RTOL * scale)
    if small.size:
        index = int(small[0])
        raise SingularMatrixError(
            f"matrix is singular to working precision at pivot {index}",
            pivot=index,
            pivot_value=float(pivots[index]),
        )
    return lu_solve((lu, piv), b)


def svd_values(a, tol=SVD_TOL, max_sweeps=SVD_MAX_SWEEPS):
    """
    Singular values of a, descending, by one-sided (Hestenes) Jacobi rotations.

    Columns are rotated pairwise until every pair is orthogonal to `tol` relative to
    the product of their norms; the singular values are then the column norms.
    Wide matrices are transposed first, which leaves the singular values unchanged.
    """
    work = np.array(a.T if a.shape[1] > a.shape[0] else a, dtype=float)
    n_cols = work.shape[1]
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n_cols - 1):
            for j in range(i + 1, n_cols):
                alpha = work[:, i] @ work[:, i]
                beta = work[:, j] @ work[:, j]
                gamma = work[:, i] @ work[:, j]
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                left = work[:, i].copy()
                work[:, i] = c * left - s * work[:, j]
                work[:, j] = s * left + c * work[:, j]
        if not rotated:
            logger.debug("Jacobi SVD converged after %d sweeps", sweep + 1)
            return np.sort(np.linalg.norm(work, axis=0))[::-1]
    raise ConvergenceError(
        f"Jacobi SVD did not converge in {max_sweeps} sweeps", iterations=max_sweeps
    )


def kron(a, b):
    """Kronecker product, (a.rows*b.rows) x (a.cols*b.cols)."""
    return np.kron(a, b)


def frobenius_norm(a):
    return float(np.sqrt(np.sum(a * a)))


def spectral_norm(a):
    """Largest singular value."""
    return float(svd_values(a)[0])


def is_hurwitz(a):
    """True when every eigenvalue of a has a strictly negative real part."""
    if a.shape == (2, 2):
        return bool(np.trace(a) < 0.0 and np.linalg.det(a) > 0.0)
    return bool(np.all(np.linalg.eigvals(a).real < 0.0))


def is_symmetric(a, tol=1e-12):
    return a.shape[0] == a.shape[1] and bool(
        np.max(np.abs(a - a.T)) <= tol * max(1.0, np.max(np.abs(a)))
    )
