import os
import sys

import numpy as np
import pytest

# src layout: make the package importable without installing it
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from adaptiveGHX.control.lqr import design_lqr
from adaptiveGHX.control.reference import generate_reference
from adaptiveGHX.plant.model import nominal_ghx_model
from adaptiveGHX.scenarios.config import ScenarioConfig, config_from_dict
from adaptiveGHX.scenarios.targets import synthetic_reference_target

SHORT_HORIZON = 1200.0


@pytest.fixture(scope="session")
def ghx():
    return nominal_ghx_model()


@pytest.fixture(scope="session")
def design(ghx):
    return design_lqr(ghx)


@pytest.fixture(scope="session")
def short_target(ghx):
    return synthetic_reference_target(SHORT_HORIZON, 1.0, 0, ghx)


@pytest.fixture(scope="session")
def short_reference(ghx, design, short_target):
    return generate_reference(design, ghx, short_target, SHORT_HORIZON, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def short_config(**overrides):
    """Scenario config on the short synthetic horizon."""
    data = {"name": "short", "horizon": SHORT_HORIZON}
    data.update(overrides)
    return config_from_dict(data, base=ScenarioConfig())
