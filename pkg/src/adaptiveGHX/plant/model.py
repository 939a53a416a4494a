# Glycol heat exchanger (GHX) plant: the identified two-actuator affine model
#   dx/dt = A x + B u + D,  x = (m_dot_bypass, Q_ghx),  u = (PV006, m_dot_pump_out)
# and the machinery that turns it into the "true" uncertain plant.

import enum
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from adaptiveGHX.matcore import as_mat, is_symmetric, mat_mul, solve_linear, spectral_norm, svd_values
from adaptiveGHX.plant.disturbance import DisturbanceSignal
from adaptiveGHX.utils.errors import ConfigError, DimensionError, NumericalError, SingularMatrixError

logger = logging.getLogger(__name__)

A_GHX = [[-1.27006037e-03, 0.0], [-1.67511974e00, -4.89615042e-03]]
B_GHX = [[-0.00083076, 0.00462962], [0.51405729, 0.57604899]]
D_GHX = [[-0.0022987], [0.68611759]]

# entries that carry most of the identification uncertainty
UNCERTAIN_A = ((1, 0),)
UNCERTAIN_B = ((1, 0), (1, 1))
UNCERTAIN_D = ((1, 0),)

B_MIN_SINGULAR_VALUE = 1e-12


class BasisKind(str, enum.Enum):
    NONE = "none"
    SINE = "sine"
    SINE_PLUS_CONSTANT = "sine_plus_constant"


@dataclass(frozen=True)
class NonlinearBasis:
    """Known regressor phi(x): nothing, sin(x) elementwise, or sin(x) followed by 1."""

    kind: BasisKind = BasisKind.NONE
    n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))

    @property
    def dim(self):
        if self.kind is BasisKind.NONE:
            return 0
        if self.kind is BasisKind.SINE:
            return self.n
        return self.n + 1

    def __call__(self, x):
        """phi(x) as a k x 1 column (k = 0 gives an empty column)."""
        if self.kind is BasisKind.NONE:
            return np.zeros((0, 1))
        phi = np.sin(x)
        if self.kind is BasisKind.SINE_PLUS_CONSTANT:
            phi = np.vstack([phi, [[1.0]]])
        return phi


@dataclass(frozen=True)
class PlantModel:
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    basis: NonlinearBasis = field(default_factory=lambda: NonlinearBasis(BasisKind.SINE))

    def __post_init__(self):
        a = as_mat(self.a, "A")
        b = as_mat(self.b, "B")
        d = as_mat(self.d, "D")
        n = a.shape[0]
        if a.shape != (n, n) or b.shape[0] != n or d.shape != (n, 1):
            raise DimensionError(
                "inconsistent plant dimensions",
                a=list(a.shape), b=list(b.shape), d=list(d.shape),
            )
        if svd_values(b)[-1] <= B_MIN_SINGULAR_VALUE:
            raise SingularMatrixError("input matrix B is not invertible", pivot=None, b=b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.b.shape[1]

    def equilibrium(self, u=None):
        """Steady state -A^{-1}(B u + D) for a constant input (u = 0 by default)."""
        rhs = self.d if u is None else self.b @ u + self.d
        return -solve_linear(self.a, rhs)

    def deviation_model(self):
        """Same dynamics about the open-loop equilibrium (affine offset removed)."""
        return replace(self, d=np.zeros_like(self.d))


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Uncertainty that turns the nominal model into the true plant.

    multiplier: uncertainty level (1.5 is 50%) applied to the uncertain entries
    lam: control-effectiveness matrix Lambda; None means "implied by the multiplier"
    theta_lr: matched-nonlinearity gain in B_r coordinates, m x k of the plant basis
    d_tilde: extra affine offset error added on top of the multiplier recipe
    symmetric_lambda: enforce the symmetric, ||Lambda|| <= 1 reading of Lambda
    """

    multiplier: float = 1.0
    lam: np.ndarray = None
    theta_lr: np.ndarray = None
    d_tilde: np.ndarray = None
    disturbance: DisturbanceSignal = field(default_factory=DisturbanceSignal)
    symmetric_lambda: bool = False

    def __post_init__(self):
        if self.multiplier < 1.0:
            raise ConfigError("multiplier must be >= 1", key="multiplier")
        if self.lam is not None:
            lam = as_mat(self.lam, "Lambda")
            if self.symmetric_lambda:
                if not is_symmetric(lam):
                    raise ConfigError("Lambda must be symmetric", key="lam")
                if spectral_norm(lam) > 1.0 + 1e-12 or np.min(np.linalg.eigvalsh(lam)) <= 0:
                    raise ConfigError(
                        "Lambda must be positive definite with ||Lambda|| <= 1", key="lam"
                    )
            object.__setattr__(self, "lam", lam)
        if self.theta_lr is not None:
            object.__setattr__(self, "theta_lr", np.array(self.theta_lr, dtype=float))
        if self.d_tilde is not None:
            object.__setattr__(self, "d_tilde", as_mat(self.d_tilde, "D_tilde"))

    @cached_property
    def lam_inv(self):
        return solve_linear(self.lam, np.eye(self.lam.shape[0]))

    @cached_property
    def has_nonlinearity(self):
        return self.theta_lr is not None and bool(np.any(self.theta_lr))


def nominal_ghx_model(basis=BasisKind.SINE):
    """The identified GHX matrices (A_ghx, B_ghx, D_ghx)."""
    return PlantModel(
        a=np.array(A_GHX), b=np.array(B_GHX), d=np.array(D_GHX),
        basis=NonlinearBasis(basis, n=2),
    )


def unperturbed_spec(model):
    """multiplier 1, Lambda = I, theta_lr = 0, no disturbance."""
    return PerturbationSpec(
        multiplier=1.0,
        lam=np.eye(model.m),
        theta_lr=np.zeros((model.m, model.basis.dim)),
        d_tilde=np.zeros((model.n, 1)),
        disturbance=DisturbanceSignal(m=model.m),
    )


def apply_uncertainty(nominal, spec):
    """
    Build the true plant from the nominal one.

    A[1,0] and B[1,0], B[1,1] are divided by the multiplier and D[1] is multiplied by
    it. An explicit spec.lam further scales the input matrix (B_true = B_pert Lambda).

    Returns:
        (perturbed PlantModel, spec echo with lam = B_r^{-1} B_true and
         d_tilde = D_true - D_nominal)
    """
    mult = spec.multiplier
    a = nominal.a.copy()
    b = nominal.b.copy()
    d = nominal.d.copy()
    for i, j in UNCERTAIN_A:
        a[i, j] /= mult
    for i, j in UNCERTAIN_B:
        b[i, j] /= mult
    for i, j in UNCERTAIN_D:
        d[i, j] *= mult
    if spec.lam is not None:
        b = b @ spec.lam
    if spec.d_tilde is not None:
        d = d + spec.d_tilde

    try:
        perturbed = PlantModel(a=a, b=b, d=d, basis=nominal.basis)
    except SingularMatrixError as err:
        raise SingularMatrixError(
            f"perturbed input matrix is singular at multiplier {mult}", pivot=err.pivot
        ) from err

    lam = solve_linear(nominal.b, perturbed.b)
    if not is_symmetric(lam, tol=1e-9):
        logger.debug("implied Lambda at multiplier %.3f is not symmetric", mult)
    theta_lr = spec.theta_lr if spec.theta_lr is not None else np.zeros((nominal.m, nominal.basis.dim))
    echo = replace(
        spec,
        lam=lam,
        theta_lr=theta_lr,
        d_tilde=perturbed.d - nominal.d,
        symmetric_lambda=spec.symmetric_lambda and is_symmetric(lam),
    )
    return perturbed, echo


def true_plant_derivative(model, spec, x, u, t):
    """
    dx/dt of the true plant:
        A x + B_r Lambda (u + Lambda^{-1} theta_lr phi(x) + Lambda^{-1} d(t)) + D_true
    with B_r Lambda = model.b (the perturbed input matrix) and D_true = model.d.
    """
    dxdt = mat_mul(model.a, x) + mat_mul(model.b, u) + model.d
    if spec.has_nonlinearity or spec.disturbance.active:
        matched = spec.disturbance(t)
        if spec.has_nonlinearity:
            matched = matched + spec.theta_lr @ model.basis(x)
        dxdt = dxdt + model.b @ (spec.lam_inv @ matched)
    if not np.all(np.isfinite(dxdt)):
        raise NumericalError("plant derivative is not finite", t=t, x=x, u=u)
    return dxdt
