"""Wave functions and their probability density / current fields."""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from src.errors import ValidationError
from src.numerics.calculus import cumulative_integral, derivative, integrate
from src.numerics.grid import ComplexGridFunction, Grid, GridFunction

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-6
# Densities below this fraction of the peak count as empty (0 ln 0, realizability checks).
DENSITY_CUTOFF = 1e-12
# Densities below this fraction of the peak make J/rho unresolvable in double precision.
RATIO_FLOOR = 1e-280
TAIL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PhysicalConstants:
    """Reduced Planck constant and particle mass (natural units by default)."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValidationError(
                f"hbar and mass must be positive, got hbar={self.hbar}, mass={self.mass}"
            )


@dataclass(frozen=True)
class GaussianStateSpec:
    """Gaussian packet centred at x0 with width alpha and phase wavenumber k."""

    x0: float = 0.0
    alpha: float = 1.0
    k: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")


def _check_normalized(density: GridFunction, what: str) -> float:
    total = integrate(density)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ValidationError(f"{what} integrates to {total:.9f}, expected 1")
    return total


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """
    Psi = modulus * exp(i * phase).

    phase_gradient, when present, is the exact dPhi/dx; operators use it in
    place of differentiating the phase samples.
    """

    modulus: GridFunction
    phase: GridFunction
    constants: PhysicalConstants
    phase_gradient: Optional[GridFunction] = None
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.modulus.grid != self.phase.grid:
            raise ValidationError("modulus and phase are sampled on different grids")
        if np.any(self.modulus.values < 0):
            raise ValidationError("wave-function modulus must be nonnegative")
        _check_normalized(self.density, "wave function |psi|^2")

    @property
    def grid(self) -> Grid:
        return self.modulus.grid

    @property
    def density(self) -> GridFunction:
        return GridFunction(self.grid, self.modulus.values**2)

    def gradient(self) -> GridFunction:
        if self.phase_gradient is not None:
            return self.phase_gradient
        return derivative(self.phase, 1)

    def as_complex(self) -> ComplexGridFunction:
        return ComplexGridFunction(
            self.grid, self.modulus.values * np.exp(1j * self.phase.values)
        )


@dataclass(frozen=True, eq=False)
class ProbabilityFields:
    """Probability density rho and probability current J."""

    density: GridFunction
    current: GridFunction
    constants: PhysicalConstants
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.density.grid != self.current.grid:
            raise ValidationError("density and current are sampled on different grids")
        if np.any(self.density.values < 0):
            raise ValidationError("probability density must be nonnegative")
        _check_normalized(self.density, "probability density")

    @property
    def grid(self) -> Grid:
        return self.density.grid

    def with_warnings(self, notes: Iterable[str]) -> "ProbabilityFields":
        return ProbabilityFields(
            self.density, self.current, self.constants, self.warnings + tuple(notes)
        )


def gaussian_modulus(x: np.ndarray, x0: float, alpha: float) -> np.ndarray:
    return (alpha * np.sqrt(2.0 * np.pi)) ** -0.5 * np.exp(-((x - x0) ** 2) / (4.0 * alpha**2))


def make_gaussian_state(
    spec: GaussianStateSpec,
    constants: PhysicalConstants,
    grid: Grid,
) -> WaveFunction:
    """
    Gaussian packet with modulus (alpha sqrt(2 pi))^(-1/2) exp(-(x-x0)^2 / 4 alpha^2)
    and phase k x.

    Args:
        spec: Packet centre, width and wavenumber
        constants: Physical constants carried by the state
        grid: Sample grid; must hold the packet's tails

    Returns:
        Normalized WaveFunction
    """
    modulus = gaussian_modulus(grid.x, spec.x0, spec.alpha)
    edge = max(modulus[0], modulus[-1])
    if edge >= TAIL_TOLERANCE * modulus.max():
        raise ValidationError(
            f"grid [{grid.x_min:.4g}, {grid.x_max:.4g}] truncates the packet: "
            f"edge modulus is {edge / modulus.max():.2e} of the peak"
        )
    return WaveFunction(
        modulus=GridFunction(grid, modulus),
        phase=GridFunction(grid, spec.k * grid.x),
        constants=constants,
        phase_gradient=GridFunction(grid, np.full(grid.n_points, float(spec.k))),
    )


def to_probability_fields(psi: WaveFunction) -> ProbabilityFields:
    """rho = |psi|^2, J = (hbar/m) |psi|^2 dPhi/dx."""
    density = psi.density
    scale = psi.constants.hbar / psi.constants.mass
    current = GridFunction(psi.grid, scale * density.values * psi.gradient().values)
    return ProbabilityFields(density, current, psi.constants, psi.warnings)


def velocity_ratio(fields: ProbabilityFields, floor: float = RATIO_FLOOR) -> np.ndarray:
    """J/rho wherever the quotient is resolvable, 0 elsewhere."""
    rho = fields.density.values
    resolvable = rho > floor * rho.max()
    ratio = np.zeros_like(rho)
    ratio[resolvable] = fields.current.values[resolvable] / rho[resolvable]
    return ratio


def reconstruct_wavefunction(fields: ProbabilityFields) -> WaveFunction:
    """
    Build the pure state consistent with a (rho, J) pair.

    The modulus is sqrt(rho); the phase integrates (m/hbar) J/rho from the grid
    centre, where it is anchored to zero.

    Args:
        fields: Normalized density and current

    Returns:
        WaveFunction, flagged when the current reaches beyond the density support
    """
    constants = fields.constants
    rho = fields.density.values
    grid = fields.grid

    gradient = GridFunction(grid, constants.mass / constants.hbar * velocity_ratio(fields))
    phase = cumulative_integral(gradient, anchor_index=grid.center_index)

    notes = list(fields.warnings)
    empty = rho < DENSITY_CUTOFF * rho.max()
    current_scale = np.max(np.abs(fields.current.values))
    if current_scale > 0 and np.any(empty):
        stray = np.max(np.abs(fields.current.values[empty])) / current_scale
        if stray > DENSITY_CUTOFF:
            note = (
                f"current reaches {stray:.2e} of its peak where the density is "
                "negligible; pure-state realizability is not guaranteed"
            )
            logger.warning(note)
            notes.append(note)

    return WaveFunction(
        modulus=GridFunction(grid, np.sqrt(rho)),
        phase=phase,
        constants=constants,
        phase_gradient=gradient,
        warnings=tuple(notes),
    )


def make_mixture_fields(
    components: Sequence[Tuple[float, float, float]],
    constants: PhysicalConstants,
    grid: Grid,
    k: float = 0.0,
) -> ProbabilityFields:
    """
    Density that is a weighted mix of Gaussians, with a uniform drift current.

    Args:
        components: (weight, centre, width) triples; weights are renormalized
        constants: Physical constants
        grid: Sample grid
        k: Wavenumber setting J = (hbar k / m) rho

    Returns:
        ProbabilityFields for the mixture
    """
    weights = np.array([c[0] for c in components], dtype=float)
    if weights.size == 0 or np.any(weights <= 0):
        raise ValidationError("mixture needs at least one component with positive weight")
    weights = weights / weights.sum()
    rho = np.zeros(grid.n_points)
    for weight, (_, centre, width) in zip(weights, components):
        rho += weight * norm.pdf(grid.x, loc=centre, scale=width)
    rho /= integrate(GridFunction(grid, rho))
    current = constants.hbar * k / constants.mass * rho
    return ProbabilityFields(GridFunction(grid, rho), GridFunction(grid, current), constants)
