"""GHX plant model, uncertainty injection and fixed-step simulation."""
from adaptiveGHX.plant.disturbance import DisturbanceKind, DisturbanceSignal
from adaptiveGHX.plant.model import (
    BasisKind,
    NonlinearBasis,
    PerturbationSpec,
    PlantModel,
    apply_uncertainty,
    nominal_ghx_model,
    true_plant_derivative,
    unperturbed_spec,
)
from adaptiveGHX.plant.simulate import TrajectoryRecord, rk4_step, sample_times, simulate
