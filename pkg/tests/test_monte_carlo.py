"""Tests for factual-record sampling."""
import numpy as np
import pytest

from src.errors import SamplingError, ValidationError
from src.models.measurement import MeasurementSpec, transform
from src.models.monte_carlo import (
    RecordSimulator,
    SampleSet,
    fr_error_indicators,
    fr_statistics,
    momentum_density,
    sample_momentum,
    sample_position,
)
from src.models.observables import Reading, momentum, parameters, position
from src.models.quantum_state import reconstruct_wavefunction
from src.numerics.grid import Grid


@pytest.fixture
def recorded(moving_fields):
    """alpha = 1, sigma = lambda = 0.5, k = 1."""
    fields_pr = transform(moving_fields, MeasurementSpec.gaussian(0.5, 0.5))
    return fields_pr, reconstruct_wavefunction(fields_pr)


def test_sample_set_needs_two_values():
    """Test sample sets hold at least two finite values."""
    with pytest.raises(ValidationError):
        SampleSet("x", [1.0])
    with pytest.raises(ValidationError):
        SampleSet("x", [1.0, np.nan])


def test_sampling_rejects_single_draw(recorded):
    """Test n = 1 campaigns are rejected."""
    fields_pr, _ = recorded
    with pytest.raises(SamplingError):
        sample_position(fields_pr, 1, seed=42)


def test_sampling_is_deterministic(recorded):
    """Test equal seeds give identical records."""
    fields_pr, _ = recorded
    first = sample_position(fields_pr, 1000, seed=7)
    second = sample_position(fields_pr, 1000, seed=7)
    assert np.array_equal(first.values, second.values)
    assert first.seed == 7


def test_position_records_converge(recorded):
    """Test FR mean and spread of x within 4 standard errors of the prognosis."""
    fields_pr, _ = recorded
    n = 100000
    stats = fr_statistics([sample_position(fields_pr, n, seed=42)])
    expected = np.sqrt(1.25)
    assert abs(stats.means["x"]) < 4.0 * expected / np.sqrt(n)
    assert abs(stats.stddevs["x"] - expected) < 4.0 * expected / np.sqrt(2.0 * n)
    assert stats.reading == Reading.FR


def test_momentum_records_converge(recorded):
    """Test FR mean and spread of p within 4 standard errors of the prognosis."""
    _, psi_pr = recorded
    n = 100000
    stats = fr_statistics([sample_momentum(psi_pr, n, seed=43)])
    expected = np.sqrt(0.2)
    assert abs(stats.means["p"] - 1.0) < 4.0 * expected / np.sqrt(n)
    assert abs(stats.stddevs["p"] - expected) < 4.0 * expected / np.sqrt(2.0 * n)


@pytest.mark.slow
def test_million_position_records(recorded):
    """Test FR convergence at n = 10^6."""
    fields_pr, _ = recorded
    n = 1000000
    stats = fr_statistics([sample_position(fields_pr, n, seed=42)])
    expected = np.sqrt(1.25)
    assert abs(stats.means["x"]) < 4.0 * expected / np.sqrt(n)
    assert abs(stats.stddevs["x"] - expected) < 4.0 * expected / np.sqrt(2.0 * n)


def test_momentum_density_is_normalized(moving_packet):
    """Test the spectral marginal of the packet peaks at hbar k."""
    momenta, weights = momentum_density(moving_packet)
    dp = momenta[1] - momenta[0]
    assert weights.sum() * dp == pytest.approx(1.0)
    assert momenta[np.argmax(weights)] == pytest.approx(1.0, abs=dp)


def test_momentum_density_detects_aliasing(constants):
    """Test a phase too fast for the grid spacing is rejected."""
    from src.models.quantum_state import GaussianStateSpec, make_gaussian_state

    grid = Grid.centered(0.0, 10.0, 256)
    psi = make_gaussian_state(GaussianStateSpec(0.0, 1.0, 38.0), constants, grid)
    with pytest.raises(SamplingError):
        momentum_density(psi)


def test_fr_statistics_population_variance():
    """Test FR statistics use divisor n."""
    stats = fr_statistics([SampleSet("x", [1.0, 3.0])])
    assert stats.means["x"] == 2.0
    assert stats.stddevs["x"] == pytest.approx(1.0)


def test_paired_statistics_include_cross_correlations():
    """Test paired records produce real cross correlations."""
    x = SampleSet("x", [0.0, 1.0, 2.0, 3.0])
    y = SampleSet("y", [0.0, 2.0, 4.0, 6.0])
    stats = fr_statistics([x, y], paired=True)
    assert stats.correlation("x", "y") == pytest.approx(2.5)
    assert stats.correlation("x", "y").imag == 0.0


def test_unpaired_statistics_skip_cross_correlations():
    """Test separate campaigns carry only diagonal correlations."""
    stats = fr_statistics([SampleSet("x", [0.0, 1.0]), SampleSet("p", [1.0, 2.0, 3.0])])
    assert set(stats.correlations) == {("x", "x"), ("p", "p")}


def test_fr_indicators_against_intrinsic(moving_packet, grid, constants, recorded):
    """Test FR indicators compare records to the intrinsic parameters."""
    fields_pr, psi_pr = recorded
    intrinsic = parameters(moving_packet, [position(grid), momentum(constants)])
    simulator = RecordSimulator({"samples": 50000, "seed": 42})
    fr = fr_statistics(simulator.run_campaign(fields_pr, psi_pr))
    ind = fr_error_indicators(fr, intrinsic)
    assert ind.reading == Reading.FR
    assert ind.stddev_errors["x"] == pytest.approx(np.sqrt(1.25) - 1.0, abs=0.02)


def test_convergence_trials_summary(recorded):
    """Test seeded trials mostly land inside the 4-sigma band."""
    fields_pr, _ = recorded
    simulator = RecordSimulator({"seed": 42})
    trials, summary = simulator.convergence_trials(
        fields_pr, 0.0, np.sqrt(1.25), n=2000, trials=20
    )
    assert len(trials) == 20
    assert list(trials["seed"]) == list(range(42, 62))
    assert summary["within_band_pct"] >= 90.0


def test_convergence_trials_use_configured_sizes(recorded):
    """Test trials and trial_samples from the sampling settings are the defaults."""
    fields_pr, _ = recorded
    simulator = RecordSimulator({"seed": 7, "trials": 4, "trial_samples": 300})
    trials, summary = simulator.convergence_trials(fields_pr, 0.0, np.sqrt(1.25))
    assert list(trials["seed"]) == [7, 8, 9, 10]
    assert summary["n"] == 300
    assert summary["trials"] == 4
