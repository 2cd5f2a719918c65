"""Tests for observables and their numerical parameters."""
import numpy as np
import pytest

from src.errors import ValidationError
from src.models.measurement import MeasurementSpec, transform
from src.models.observables import (
    Observable,
    ParameterSet,
    Reading,
    Term,
    expectation_direct,
    expectation_substitution,
    harmonic_hamiltonian,
    kinetic,
    momentum,
    momentum_squared,
    parameters,
    phase_resolved,
    position,
    position_power,
    potential,
    pr_parameters,
    robertson_bound,
    uncertainty_product,
)
from src.models.quantum_state import (
    GaussianStateSpec,
    WaveFunction,
    make_gaussian_state,
    reconstruct_wavefunction,
    to_probability_fields,
)
from src.numerics.grid import Grid


def test_third_order_term_rejected():
    """Test derivative orders above two have no substitution path."""
    with pytest.raises(ValidationError, match="wave-function path"):
        Term(1.0, 3)


def test_duplicate_labels_rejected(moving_packet, grid):
    """Test parameter sets need distinct observable labels."""
    with pytest.raises(ValidationError):
        parameters(moving_packet, [position(grid), position(grid)])


def test_gaussian_in_parameters(moving_packet, grid, constants):
    """Test means, spreads and C(x, p) of the alpha = 1, k = 1 packet."""
    params = parameters(moving_packet, [position(grid), momentum(constants)])
    assert params.reading == Reading.IN
    assert params.means["x"] == pytest.approx(0.0, abs=1e-10)
    assert params.means["p"] == pytest.approx(1.0, abs=1e-9)
    assert params.stddevs["x"] == pytest.approx(1.0, abs=1e-9)
    assert params.stddevs["p"] == pytest.approx(0.5, abs=1e-8)
    assert params.correlation("x", "p") == pytest.approx(0.5j, abs=1e-8)
    assert params.correlation("p", "x") == pytest.approx(-0.5j, abs=1e-8)


def test_correlation_is_hermitian(moving_packet, grid, constants):
    """Test C(B, A) is the conjugate of C(A, B)."""
    params = parameters(moving_packet, [position(grid), momentum(constants)])
    assert params.correlation("p", "x") == pytest.approx(
        np.conj(params.correlation("x", "p")), abs=1e-12
    )


def test_shifted_packet_mean(constants):
    """Test <x> follows the packet centre."""
    grid = Grid.centered(2.0, 12.0, 4096)
    psi = make_gaussian_state(GaussianStateSpec(2.0, 1.0, 0.0), constants, grid)
    params = parameters(psi, [position(grid), position_power(grid, 2)])
    assert params.means["x"] == pytest.approx(2.0, abs=1e-9)
    assert params.means["x^2"] == pytest.approx(5.0, abs=1e-8)


def test_kinetic_energy_of_gaussian(moving_packet, constants):
    """Test <T> = (hbar^2 / 2m)(k^2 + 1 / 4 alpha^2)."""
    params = parameters(moving_packet, [kinetic(constants)])
    assert params.means["T"] == pytest.approx(0.5 * (1.0 + 0.25), rel=1e-8)


def test_oscillator_ground_state_is_an_eigenstate(constants):
    """Test <H> = hbar omega / 2 with vanishing spread."""
    alpha = np.sqrt(0.5)
    grid = Grid.centered(0.0, 10.0 * alpha, 4096)
    psi = make_gaussian_state(GaussianStateSpec(0.0, alpha, 0.0), constants, grid)
    params = parameters(psi, [harmonic_hamiltonian(constants, 1.0, grid)])
    assert params.means["H"] == pytest.approx(0.5, rel=1e-9)
    assert params.stddevs["H"] < 1e-8


def test_hamiltonian_needs_positive_frequency(constants, grid):
    """Test omega validation."""
    with pytest.raises(ValidationError):
        harmonic_hamiltonian(constants, 0.0, grid)


def test_observables_compose(grid, constants, moving_packet):
    """Test sums and scalar multiples of observables."""
    combined = position(grid) + 2.0 * momentum(constants)
    params = parameters(moving_packet, [combined])
    assert params.means[combined.label] == pytest.approx(2.0, abs=1e-8)


def test_substitution_path_matches_wavefunction_path(moving_packet, moving_fields, grid, constants):
    """Test <x>, <p>, <p^2> and <H> agree across both computation paths."""
    observables = [
        position(grid), momentum(constants), momentum_squared(constants),
        harmonic_hamiltonian(constants, 1.0, grid),
    ]
    means = parameters(moving_packet, observables).means
    for obs in observables:
        assert expectation_substitution(moving_fields, obs).real == pytest.approx(
            means[obs.label], abs=1e-6
        )


def test_substitution_of_momentum_squared(moving_fields, constants):
    """Test <p^2> = hbar^2 (k^2 + 1 / 4 alpha^2) from (rho, J) alone."""
    value = expectation_substitution(moving_fields, momentum_squared(constants))
    assert value.real == pytest.approx(1.25, rel=1e-8)
    assert abs(value.imag) < 1e-8


def test_pr_parameters_momentum_spread(moving_fields, grid, constants):
    """Test Delta_PR p = sqrt(0.2) at alpha = 1, sigma = lambda = 0.5, k = 1."""
    recorded = transform(moving_fields, MeasurementSpec.gaussian(0.5, 0.5))
    params = pr_parameters(recorded, [position(grid), momentum(constants)])
    assert params.reading == Reading.PR
    assert params.stddevs["x"] == pytest.approx(np.sqrt(1.25), rel=1e-6)
    assert params.stddevs["p"] == pytest.approx(np.sqrt(0.2), rel=1e-6)
    assert max(params.path_residuals.values()) < 1e-6
    assert not params.warnings


def test_pr_parameters_reuses_reconstruction(moving_fields, grid, constants):
    """Test an already reconstructed state gives the same result."""
    recorded = transform(moving_fields, MeasurementSpec.gaussian(0.5, 0.0))
    psi_pr = reconstruct_wavefunction(recorded)
    observables = [position(grid), momentum(constants)]
    first = pr_parameters(recorded, observables)
    second = pr_parameters(recorded, observables, psi_pr)
    assert first.stddevs == pytest.approx(second.stddevs)


def test_uncertainty_relation_and_robertson_bound(moving_packet, grid, constants):
    """Test Delta x Delta p >= |Im C(x, p)| = hbar / 2 with equality for a Gaussian."""
    params = parameters(moving_packet, [position(grid), momentum(constants)])
    assert robertson_bound(params, "x", "p") == pytest.approx(0.5, abs=1e-8)
    assert uncertainty_product(params, "x", "p") == pytest.approx(0.5, abs=1e-8)


def test_parameter_frame_layout(moving_packet, grid, constants):
    """Test the long table has one row per quantity."""
    params = parameters(moving_packet, [position(grid), momentum(constants)])
    df = params.to_frame()
    assert list(df.columns) == ["reading", "quantity", "real", "imag"]
    assert len(df) == 2 + 2 + 4
    assert set(df["reading"]) == {"IN"}


def test_empty_observable_rejected():
    """Test observables need at least one term."""
    with pytest.raises(ValidationError):
        Observable((), "empty")


def test_parameter_set_defaults():
    """Test an empty parameter set carries no labels."""
    assert ParameterSet(reading=Reading.FR).labels == []


def _four_observables(grid, constants):
    return [
        position(grid), momentum(constants), momentum_squared(constants),
        harmonic_hamiltonian(constants, 1.0, grid),
    ]


def test_direct_path_matches_substitution_path(moving_packet, moving_fields, grid, constants):
    """Test (psi, A psi) by differencing psi agrees with the (rho, J) expansion."""
    assert phase_resolved(moving_packet)
    for obs in _four_observables(grid, constants):
        direct = expectation_direct(moving_packet, obs)
        substituted = expectation_substitution(moving_fields, obs)
        assert direct.real == pytest.approx(substituted.real, abs=1e-6)
        assert abs(direct.imag) < 1e-8


def test_direct_path_on_recorded_state(moving_fields, grid, constants):
    """Test the reconstructed recorded state passes through the direct path too."""
    recorded = transform(moving_fields, MeasurementSpec.gaussian(0.5, 0.5))
    psi_pr = reconstruct_wavefunction(recorded)
    assert phase_resolved(psi_pr)
    assert expectation_direct(psi_pr, momentum_squared(constants)).real == pytest.approx(
        1.0 + 0.2, rel=1e-6
    )
    for obs in _four_observables(grid, constants):
        assert expectation_direct(psi_pr, obs).real == pytest.approx(
            expectation_substitution(recorded, obs).real, abs=1e-6
        )


def test_fast_phase_is_not_resolved(constants, grid):
    """Test a phase advancing 0.1 rad per cell is flagged as unresolved."""
    k = 0.1 / grid.dx
    psi = make_gaussian_state(GaussianStateSpec(0.0, 1.0, k), constants, grid)
    assert not phase_resolved(psi)
    assert phase_resolved(psi, limit=0.2)


def test_parameters_ignore_phase_anchor(moving_packet, grid, constants):
    """Test a constant phase offset changes no mean, correlation or spread."""
    shifted = WaveFunction(
        modulus=moving_packet.modulus,
        phase=moving_packet.phase + 1.3,
        constants=constants,
        phase_gradient=moving_packet.phase_gradient,
    )
    observables = _four_observables(grid, constants)
    before = parameters(moving_packet, observables)
    after = parameters(shifted, observables)
    assert after.means == pytest.approx(before.means, abs=1e-12)
    assert after.stddevs == pytest.approx(before.stddevs, abs=1e-12)
    for key, value in before.correlations.items():
        assert after.correlations[key] == pytest.approx(value, abs=1e-12)
    assert expectation_direct(shifted, momentum(constants)) == pytest.approx(
        expectation_direct(moving_packet, momentum(constants)), abs=1e-10
    )


def test_potential_observable(grid, constants):
    """Test V = x^2 / 2 on a resting alpha = 1 packet: <V> = 0.5, Delta V = sqrt(0.5)."""
    psi = make_gaussian_state(GaussianStateSpec(0.0, 1.0, 0.0), constants, grid)
    obs = potential(grid.sample(lambda x: 0.5 * x**2))
    params = parameters(psi, [obs])
    assert obs.label == "V"
    assert params.means["V"] == pytest.approx(0.5, abs=1e-9)
    assert params.stddevs["V"] == pytest.approx(np.sqrt(0.5), abs=1e-8)
    fields = to_probability_fields(psi)
    assert expectation_substitution(fields, obs).real == pytest.approx(0.5, abs=1e-9)
