"""Shared fixtures."""
import pytest

from src.config import resolve_config
from src.models.gaussian_oracle import GaussianScenario, default_grid
from src.models.quantum_state import (
    GaussianStateSpec,
    PhysicalConstants,
    make_gaussian_state,
    to_probability_fields,
)
from src.numerics.grid import Grid


@pytest.fixture
def constants():
    return PhysicalConstants(hbar=1.0, mass=1.0)


@pytest.fixture
def grid():
    """[-10, 10] with 4096 points."""
    return Grid.centered(0.0, 10.0, 4096)


@pytest.fixture
def moving_packet(constants, grid):
    """alpha = 1, k = 1 Gaussian packet."""
    return make_gaussian_state(GaussianStateSpec(0.0, 1.0, 1.0), constants, grid)


@pytest.fixture
def moving_fields(moving_packet):
    return to_probability_fields(moving_packet)


@pytest.fixture
def scenario_factory(constants):
    def build(alpha=1.0, sigma=0.0, lambda_=0.0, k=0.0, x0=0.0):
        scenario = GaussianScenario(x0, alpha, k, sigma, lambda_, constants)
        return scenario, default_grid(scenario)
    return build


@pytest.fixture
def run_config(tmp_path):
    """Defaults with outputs under a temporary directory."""
    def build(**flags):
        flags.setdefault("out", str(tmp_path / "out"))
        return resolve_config(None, flags, environ={})
    return build
