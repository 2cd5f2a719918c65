"""Closed forms for a Gaussian packet seen through Gaussian device kernels."""
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
from scipy.stats import norm

from src.errors import DomainError, ValidationError
from src.models.indicators import EntropyReport, ErrorIndicators
from src.models.observables import ParameterSet, Reading
from src.models.quantum_state import GaussianStateSpec, PhysicalConstants
from src.numerics.grid import Grid

Curve = Callable[[np.ndarray], np.ndarray]

DEFAULT_SPAN_MULT = 10.0
DEFAULT_POINTS = 4096


@dataclass(frozen=True)
class GaussianScenario:
    """Packet (x0, alpha, k) measured with density width sigma and current width lambda_."""

    x0: float = 0.0
    alpha: float = 1.0
    k: float = 0.0
    sigma: float = 0.0
    lambda_: float = 0.0
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if self.sigma < 0 or self.lambda_ < 0:
            raise ValidationError(
                f"kernel widths must be nonnegative, got sigma={self.sigma}, lambda={self.lambda_}"
            )

    @property
    def state(self) -> GaussianStateSpec:
        return GaussianStateSpec(self.x0, self.alpha, self.k)

    @property
    def density_variance(self) -> float:
        return self.alpha**2 + self.sigma**2

    @property
    def current_variance(self) -> float:
        return self.alpha**2 + self.lambda_**2

    @property
    def domain_valid(self) -> bool:
        return self.alpha**2 + 2.0 * self.sigma**2 > self.lambda_**2

    def check_domain(self) -> None:
        if not self.domain_valid:
            raise DomainError(
                "momentum spread undefined for these widths: alpha^2 + 2 sigma^2 must "
                f"exceed lambda^2 (alpha={self.alpha}, sigma={self.sigma}, "
                f"lambda={self.lambda_})"
            )

    @property
    def phase_gradient_variance(self) -> float:
        """Variance of the Gaussian rho_PR (dPhi_PR/dx)^2, finite inside the domain."""
        A, B = self.density_variance, self.current_variance
        return A * B / (2.0 * A - B)

    @property
    def drift(self) -> float:
        """hbar k / m, the integral of the current."""
        return self.constants.hbar * self.k / self.constants.mass

    @classmethod
    def from_oscillator(
        cls,
        omega: float,
        sigma: float = 0.0,
        constants: PhysicalConstants = None,
    ) -> "GaussianScenario":
        return OscillatorScenario(omega, sigma, constants or PhysicalConstants()).to_gaussian()


@dataclass(frozen=True)
class OscillatorScenario:
    """Oscillator ground state (x0 = 0, k = 0, alpha = sqrt(hbar / 2 m omega))."""

    omega: float = 1.0
    sigma: float = 0.0
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError(f"oscillator frequency must be positive, got {self.omega}")
        if self.sigma < 0:
            raise ValidationError(f"kernel width must be nonnegative, got {self.sigma}")

    @property
    def alpha(self) -> float:
        return float(np.sqrt(self.constants.hbar / (2.0 * self.constants.mass * self.omega)))

    def to_gaussian(self) -> GaussianScenario:
        return GaussianScenario(
            x0=0.0, alpha=self.alpha, k=0.0, sigma=self.sigma, lambda_=0.0,
            constants=self.constants,
        )


@dataclass(frozen=True)
class ClosedFormFields:
    density_in: Curve
    current_in: Curve
    density_pr: Curve
    current_pr: Curve


def closed_form_fields(s: GaussianScenario) -> ClosedFormFields:
    """rho and J before and after the Gaussian kernels, as callables of x."""
    width_in = s.alpha
    width_rho = np.sqrt(s.density_variance)
    width_j = np.sqrt(s.current_variance)
    return ClosedFormFields(
        density_in=lambda x: norm.pdf(x, loc=s.x0, scale=width_in),
        current_in=lambda x: s.drift * norm.pdf(x, loc=s.x0, scale=width_in),
        density_pr=lambda x: norm.pdf(x, loc=s.x0, scale=width_rho),
        current_pr=lambda x: s.drift * norm.pdf(x, loc=s.x0, scale=width_j),
    )


def momentum_spread_pr(s: GaussianScenario) -> float:
    """Delta_PR p of the reconstructed recorded state."""
    s.check_domain()
    hbar, k = s.constants.hbar, s.k
    A = s.density_variance
    radicand = s.alpha**4 - s.lambda_**4 + 2.0 * s.sigma**2 * (s.alpha**2 + s.lambda_**2)
    value = k**2 * A / np.sqrt(radicand) - k**2 + 1.0 / (4.0 * A)
    return float(hbar * np.sqrt(value))


def _parameter_set(reading: Reading, x0, p0, dx, dp, hbar) -> ParameterSet:
    return ParameterSet(
        reading=reading,
        means={"x": x0, "p": p0},
        correlations={
            ("x", "x"): complex(dx**2, 0.0),
            ("x", "p"): complex(0.0, hbar / 2.0),
            ("p", "x"): complex(0.0, -hbar / 2.0),
            ("p", "p"): complex(dp**2, 0.0),
        },
        stddevs={"x": dx, "p": dp},
    )


def closed_form_parameters(s: GaussianScenario) -> Tuple[ParameterSet, ParameterSet]:
    """
    Exact IN and PR parameters of x and p.

    Args:
        s: Scenario inside the momentum-spread domain

    Returns:
        Tuple of (IN ParameterSet, PR ParameterSet)
    """
    s.check_domain()
    hbar = s.constants.hbar
    p0 = hbar * s.k
    params_in = _parameter_set(Reading.IN, s.x0, p0, s.alpha, hbar / (2.0 * s.alpha), hbar)
    params_pr = _parameter_set(
        Reading.PR, s.x0, p0, float(np.sqrt(s.density_variance)), momentum_spread_pr(s), hbar
    )
    return params_in, params_pr


def _shannon_gaussian(scale: float, variance: float) -> float:
    """-integral f ln f for f = scale * N(variance)."""
    return -scale * np.log(scale) + 0.5 * scale * np.log(2.0 * np.pi * np.e * variance)


def closed_form_entropy(s: GaussianScenario) -> EntropyReport:
    """
    Exact positional and motional entropies in both readings.

    Defined for every valid scenario, including widths outside the
    momentum-spread domain.
    """
    H_in = 0.5 * np.log(2.0 * np.pi * np.e * s.alpha**2)
    H_pr = 0.5 * np.log(2.0 * np.pi * np.e * s.density_variance)
    drift = abs(s.drift)
    defined = drift > 0
    tau_in = _shannon_gaussian(drift, s.alpha**2) if defined else 0.0
    tau_pr = _shannon_gaussian(drift, s.current_variance) if defined else 0.0
    return EntropyReport(
        positional={"IN": float(H_in), "PR": float(H_pr)},
        motional={"IN": float(tau_in), "PR": float(tau_pr)},
        delta_H=float(0.5 * np.log1p(s.sigma**2 / s.alpha**2)),
        delta_tau=float(0.5 * drift * np.log1p(s.lambda_**2 / s.alpha**2)) if defined else 0.0,
        motional_defined=defined,
    )


def closed_form_indicators(s: GaussianScenario) -> Tuple[ErrorIndicators, EntropyReport]:
    """
    Exact PR error indicators and entropic indicators.

    Args:
        s: Scenario inside the momentum-spread domain

    Returns:
        Tuple of (ErrorIndicators in the PR reading, EntropyReport)
    """
    params_in, params_pr = closed_form_parameters(s)
    signed = {label: params_pr.stddevs[label] - params_in.stddevs[label] for label in ("x", "p")}
    indicators = ErrorIndicators(
        reading=Reading.PR,
        mean_errors={"x": 0.0, "p": 0.0},
        correlation_errors={pair: 0.0 for pair in params_in.correlations},
        stddev_errors={label: abs(value) for label, value in signed.items()},
        signed_stddev_errors=signed,
    )
    return indicators, closed_form_entropy(s)


@dataclass(frozen=True)
class OscillatorClosedForms:
    """Energy mean and spread in both readings plus their PR indicators."""

    mean_in: float
    stddev_in: float
    mean_pr: float
    stddev_pr: float
    mean_error: float
    stddev_error: float


def oscillator_closed_forms(s: OscillatorScenario) -> OscillatorClosedForms:
    """Exact energy parameters of the oscillator ground state seen through sigma."""
    hbar, m, w = s.constants.hbar, s.constants.mass, s.omega
    blur = hbar + 2.0 * m * w * s.sigma**2
    mean_in = hbar * w / 2.0
    mean_pr = w * (hbar**2 + blur**2) / (4.0 * blur)
    stddev_pr = np.sqrt(2.0) * m * w**2 * s.sigma**2 * (hbar + m * w * s.sigma**2) / blur
    return OscillatorClosedForms(
        mean_in=float(mean_in),
        stddev_in=0.0,
        mean_pr=float(mean_pr),
        stddev_pr=float(stddev_pr),
        mean_error=float(mean_pr - mean_in),
        stddev_error=float(stddev_pr),
    )


def default_grid(
    s: GaussianScenario,
    span_mult: float = DEFAULT_SPAN_MULT,
    n_points: int = DEFAULT_POINTS,
) -> Grid:
    """
    Grid centred on x0 with half-span span_mult * max(w, v).

    w = sqrt(alpha^2 + sigma^2 + lambda^2) holds every density and current
    tail. For k != 0 the integrand rho_PR (dPhi_PR/dx)^2 is wider than the
    fields near the momentum-spread domain edge, so its width v widens the grid.

    Args:
        s: Scenario
        span_mult: Half-span in units of the widest relevant width
        n_points: Number of samples

    Returns:
        Grid
    """
    if not span_mult > 0:
        raise ValidationError(f"span multiplier must be positive, got {span_mult}")
    width = float(np.sqrt(s.alpha**2 + s.sigma**2 + s.lambda_**2))
    if s.k != 0 and s.domain_valid:
        width = max(width, float(np.sqrt(s.phase_gradient_variance)))
    return Grid.centered(s.x0, span_mult * width, int(n_points))
