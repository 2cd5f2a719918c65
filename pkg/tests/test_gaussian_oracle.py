"""Tests for the Gaussian closed forms."""
import numpy as np
import pytest

from src.errors import DomainError, ValidationError
from src.models.gaussian_oracle import (
    GaussianScenario,
    OscillatorScenario,
    closed_form_entropy,
    closed_form_fields,
    closed_form_indicators,
    closed_form_parameters,
    default_grid,
    oscillator_closed_forms,
)
from src.numerics.calculus import integrate
from src.numerics.grid import Grid


def test_scenario_validation():
    """Test widths and alpha are validated."""
    with pytest.raises(ValidationError):
        GaussianScenario(alpha=0.0)
    with pytest.raises(ValidationError):
        GaussianScenario(sigma=-1.0)


def test_domain_condition():
    """Test alpha^2 + 2 sigma^2 must exceed lambda^2."""
    assert GaussianScenario(alpha=1.0, sigma=0.3, lambda_=1.0).domain_valid
    assert not GaussianScenario(alpha=1.0, sigma=0.0, lambda_=1.0).domain_valid
    with pytest.raises(DomainError, match="momentum spread undefined"):
        closed_form_parameters(GaussianScenario(alpha=1.0, lambda_=1.5, k=1.0))


def test_ideal_fields_coincide():
    """Test sigma = lambda = 0 gives PR curves equal to IN curves."""
    exact = closed_form_fields(GaussianScenario(alpha=1.0, k=2.0))
    x = np.linspace(-5.0, 5.0, 101)
    assert np.allclose(exact.density_pr(x), exact.density_in(x))
    assert np.allclose(exact.current_pr(x), exact.current_in(x))


def test_recorded_density_variance():
    """Test rho_PR has variance alpha^2 + sigma^2 = 1.25."""
    exact = closed_form_fields(GaussianScenario(alpha=1.0, sigma=0.5))
    grid = Grid.centered(0.0, 15.0, 4001)
    density = grid.sample(exact.density_pr)
    assert integrate(density) == pytest.approx(1.0, abs=1e-10)
    variance = integrate(grid.sample(lambda x: x**2 * exact.density_pr(x)))
    assert variance == pytest.approx(1.25, abs=1e-10)


def test_recorded_current_integral():
    """Test the integral of J_PR is hbar k / m = 1."""
    exact = closed_form_fields(GaussianScenario(alpha=1.0, lambda_=0.5, k=1.0))
    grid = Grid.centered(0.0, 15.0, 4001)
    assert integrate(grid.sample(exact.current_pr)) == pytest.approx(1.0, abs=1e-10)


def test_parameters_means_and_position_spread():
    """Test <x> = x0, <p> = hbar k in both readings and Delta_PR x."""
    params_in, params_pr = closed_form_parameters(
        GaussianScenario(x0=0.7, alpha=1.0, k=2.0, sigma=0.5)
    )
    for params in (params_in, params_pr):
        assert params.means["x"] == 0.7
        assert params.means["p"] == 2.0
        assert params.correlation("x", "p") == 0.5j
    assert params_pr.stddevs["x"] == pytest.approx(np.sqrt(1.25))
    assert params_in.stddevs["p"] == pytest.approx(0.5)


def test_momentum_spread_spot_value():
    """Test Delta_PR p = sqrt(0.2) at alpha = 1, sigma = lambda = 0.5, k = 1."""
    _, params_pr = closed_form_parameters(
        GaussianScenario(alpha=1.0, k=1.0, sigma=0.5, lambda_=0.5)
    )
    assert params_pr.stddevs["p"] == pytest.approx(0.447214, abs=1e-6)


def test_indicators_spot_values():
    """Test delta H = 0.5 ln 2 at alpha = sigma = 1."""
    indicators, entropy = closed_form_indicators(GaussianScenario(alpha=1.0, sigma=1.0))
    assert entropy.delta_H == pytest.approx(0.346574, abs=1e-6)
    assert indicators.mean_errors == {"x": 0.0, "p": 0.0}
    assert indicators.stddev_errors["x"] == pytest.approx(np.sqrt(2.0) - 1.0)


def test_motional_entropy_gain_outside_momentum_domain():
    """Test delta tau = ln 2 at alpha = lambda = 1, k = 2 without a momentum spread."""
    entropy = closed_form_entropy(GaussianScenario(alpha=1.0, lambda_=1.0, k=2.0))
    assert entropy.delta_tau == pytest.approx(0.693147, abs=1e-6)
    assert entropy.motional_defined


def test_signed_momentum_indicator_can_be_negative():
    """Test Delta_PR p falls below Delta_IN p when sigma = lambda and k = 0."""
    indicators, _ = closed_form_indicators(
        GaussianScenario(alpha=1.0, k=0.0, sigma=0.5, lambda_=0.5)
    )
    assert indicators.signed_stddev_errors["p"] < 0
    assert indicators.stddev_errors["p"] == pytest.approx(-indicators.signed_stddev_errors["p"])


def test_ideal_indicators_vanish():
    """Test sigma = lambda = 0 gives all indicators 0."""
    indicators, entropy = closed_form_indicators(GaussianScenario(alpha=1.0, k=1.0))
    assert indicators.max_value() == pytest.approx(0.0, abs=1e-15)
    assert entropy.delta_H == 0.0
    assert entropy.delta_tau == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_closed_forms_are_monotone(alpha):
    """Test delta(Delta x) and delta H increase with sigma, delta tau with lambda."""
    widths = [0.0, 0.3, 0.6, 1.0]
    dx = [closed_form_indicators(GaussianScenario(alpha=alpha, sigma=s))[0].stddev_errors["x"]
          for s in widths]
    dH = [closed_form_entropy(GaussianScenario(alpha=alpha, sigma=s)).delta_H for s in widths]
    dtau = [closed_form_entropy(GaussianScenario(alpha=alpha, lambda_=l, k=1.0)).delta_tau
            for l in widths]
    for series in (dx, dH, dtau):
        assert all(b > a for a, b in zip(series, series[1:]))


def test_oscillator_ideal_limit():
    """Test <H>_PR = 0.5 and Delta_PR H = 0 at sigma = 0."""
    forms = oscillator_closed_forms(OscillatorScenario(omega=1.0, sigma=0.0))
    assert forms.mean_in == 0.5
    assert forms.mean_pr == pytest.approx(0.5)
    assert forms.stddev_pr == 0.0


def test_oscillator_spot_values():
    """Test <H>_PR = 0.625 and Delta_PR H = 0.530330 at sigma^2 = 0.5."""
    forms = oscillator_closed_forms(OscillatorScenario(omega=1.0, sigma=np.sqrt(0.5)))
    assert forms.mean_pr == pytest.approx(0.625)
    assert forms.mean_error == pytest.approx(0.125)
    assert forms.stddev_pr == pytest.approx(0.530330, abs=1e-6)


def test_oscillator_validation():
    """Test omega must be positive."""
    with pytest.raises(ValidationError):
        OscillatorScenario(omega=0.0)


def test_oscillator_restriction():
    """Test the oscillator maps to x0 = 0, k = 0 and alpha = sqrt(hbar / 2 m omega)."""
    scenario = GaussianScenario.from_oscillator(2.0, sigma=0.1)
    assert scenario.alpha == pytest.approx(0.5)
    assert scenario.k == 0.0 and scenario.x0 == 0.0
    assert scenario.lambda_ == 0.0


def test_default_grid_rule():
    """Test the half-span is 10 sqrt(alpha^2 + sigma^2 + lambda^2) for k = 0."""
    grid = default_grid(GaussianScenario(x0=1.0, alpha=1.0, sigma=0.5, lambda_=0.5))
    assert grid.n_points == 4096
    assert grid.x_min == pytest.approx(1.0 - 10.0 * np.sqrt(1.5))
    assert grid.x_max == pytest.approx(1.0 + 10.0 * np.sqrt(1.5))


def test_default_grid_widens_near_domain_edge():
    """Test moving packets near the domain edge get a wider grid."""
    scenario = GaussianScenario(alpha=1.0, sigma=0.3, lambda_=1.0, k=1.0)
    grid = default_grid(scenario)
    assert grid.x_max == pytest.approx(10.0 * np.sqrt(scenario.phase_gradient_variance))
    assert grid.x_max > 10.0 * np.sqrt(1.0 + 0.09 + 1.0)
