"""Observables and their probabilistic numerical parameters (mean, correlation, spread)."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import ValidationError
from src.models.quantum_state import (
    PhysicalConstants,
    ProbabilityFields,
    RATIO_FLOOR,
    WaveFunction,
    reconstruct_wavefunction,
)
from src.numerics.calculus import derivative, integrate
from src.numerics.grid import ComplexGridFunction, Grid, GridFunction

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-9
PATH_AGREEMENT_TOLERANCE = 1e-6
MAX_ORDER = 2
# Largest phase advance per cell (radians) that finite differences on psi resolve.
PHASE_STEP_LIMIT = 0.05
# Share of rho (1 + g^2) allowed in cells advancing faster than PHASE_STEP_LIMIT.
UNRESOLVED_WEIGHT = 1e-12

Coefficient = Union[complex, float, GridFunction]


class Reading(str, Enum):
    """Which posture a parameter set describes."""

    IN = "IN"
    PR = "PR"
    FR = "FR"


@dataclass(frozen=True, eq=False)
class Term:
    """coefficient(x) * (d/dx)^order."""

    coefficient: Coefficient
    order: int

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ValidationError(
                f"derivative order {self.order} exceeds {MAX_ORDER}; substitution path "
                "unavailable, use the wave-function path"
            )
        if isinstance(self.coefficient, GridFunction):
            return
        if not np.isfinite(complex(self.coefficient)):
            raise ValidationError("term coefficient must be finite")

    def coefficient_values(self, grid: Grid) -> Union[complex, np.ndarray]:
        if isinstance(self.coefficient, GridFunction):
            if self.coefficient.grid != grid:
                raise ValidationError("observable coefficient sampled on a different grid")
            return self.coefficient.values
        return complex(self.coefficient)


@dataclass(frozen=True, eq=False)
class Observable:
    """Sum of coefficient(x) (d/dx)^n terms with n <= 2."""

    terms: Tuple[Term, ...]
    label: str

    def __post_init__(self):
        if not self.terms:
            raise ValidationError(f"observable '{self.label}' has no terms")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def max_order(self) -> int:
        return max(term.order for term in self.terms)

    def __add__(self, other: "Observable") -> "Observable":
        return Observable(self.terms + other.terms, f"{self.label}+{other.label}")

    def __mul__(self, factor: float) -> "Observable":
        factor = float(factor)
        scaled = tuple(Term(term.coefficient * factor, term.order) for term in self.terms)
        return Observable(scaled, f"{factor:g}*{self.label}")

    __rmul__ = __mul__


def position(grid: Grid, label: str = "x") -> Observable:
    return Observable((Term(GridFunction(grid, grid.x), 0),), label)


def position_power(grid: Grid, power: int, label: str = None) -> Observable:
    return Observable((Term(GridFunction(grid, grid.x**power), 0),), label or f"x^{power}")


def momentum(constants: PhysicalConstants, label: str = "p") -> Observable:
    return Observable((Term(-1j * constants.hbar, 1),), label)


def momentum_squared(constants: PhysicalConstants, label: str = "p^2") -> Observable:
    return Observable((Term(-(constants.hbar**2), 2),), label)


def potential(values: GridFunction, label: str = "V") -> Observable:
    return Observable((Term(values, 0),), label)


def kinetic(constants: PhysicalConstants, label: str = "T") -> Observable:
    return Observable((Term(-(constants.hbar**2) / (2.0 * constants.mass), 2),), label)


def harmonic_hamiltonian(
    constants: PhysicalConstants,
    omega: float,
    grid: Grid,
    label: str = "H",
) -> Observable:
    """H = p^2 / 2m + m omega^2 x^2 / 2 as a two-term observable."""
    if not omega > 0:
        raise ValidationError(f"oscillator frequency must be positive, got {omega}")
    spring = GridFunction(grid, 0.5 * constants.mass * omega**2 * grid.x**2)
    return Observable(
        (Term(-(constants.hbar**2) / (2.0 * constants.mass), 2), Term(spring, 0)),
        label,
    )


def apply_envelope(obs: Observable, psi: WaveFunction) -> ComplexGridFunction:
    """
    Image A psi expressed on the co-moving envelope: returns E with A psi = exp(i Phi) E.

    With psi = R exp(i Phi) and g = dPhi/dx:
      psi'  = exp(i Phi) (R' + i g R)
      psi'' = exp(i Phi) (R'' - g^2 R + i (2 g R' + g' R))
    """
    grid = psi.grid
    R = psi.modulus.values
    g = psi.gradient().values
    pieces = {0: R.astype(complex)}
    if obs.max_order >= 1:
        dR = derivative(psi.modulus, 1).values
        pieces[1] = dR + 1j * g * R
    if obs.max_order >= 2:
        d2R = derivative(psi.modulus, 2).values
        dg = derivative(psi.gradient(), 1).values
        pieces[2] = d2R - g**2 * R + 1j * (2.0 * g * dR + dg * R)
    envelope = np.zeros(grid.n_points, dtype=complex)
    for term in obs.terms:
        envelope += term.coefficient_values(grid) * pieces[term.order]
    return ComplexGridFunction(grid, envelope)


def expectation_substitution(fields: ProbabilityFields, obs: Observable) -> complex:
    """
    <A> computed from (rho, J) alone, without a wave function.

      order 0: A rho
      order 1: A (rho'/2 + i (m/hbar) J)
      order 2: A (sqrt(rho) sqrt(rho)'' + i (m/hbar) J' - (m/hbar)^2 J^2 / rho)

    Args:
        fields: Normalized density and current
        obs: Observable with derivative orders <= 2

    Returns:
        Complex expectation value
    """
    if obs.max_order > MAX_ORDER:
        raise ValidationError(
            f"observable '{obs.label}' has order {obs.max_order}; substitution path "
            "unavailable, use the wave-function path"
        )
    grid = fields.grid
    rho = fields.density
    J = fields.current.values
    m_over_hbar = fields.constants.mass / fields.constants.hbar

    integrands = {0: rho.values.astype(complex)}
    if obs.max_order >= 1:
        integrands[1] = 0.5 * derivative(rho, 1).values + 1j * m_over_hbar * J
    if obs.max_order >= 2:
        root = GridFunction(grid, np.sqrt(rho.values))
        resolvable = rho.values > RATIO_FLOOR * rho.values.max()
        flux_term = np.zeros(grid.n_points)
        flux_term[resolvable] = J[resolvable] ** 2 / rho.values[resolvable]
        integrands[2] = (
            root.values * derivative(root, 2).values
            + 1j * m_over_hbar * derivative(fields.current, 1).values
            - m_over_hbar**2 * flux_term
        )

    total = np.zeros(grid.n_points, dtype=complex)
    for term in obs.terms:
        total += term.coefficient_values(grid) * integrands[term.order]
    return integrate(ComplexGridFunction(grid, total))


def expectation_direct(psi: WaveFunction, obs: Observable) -> complex:
    """
    (psi, A psi) with A applied to the complex samples of psi by finite differences.

    Uses neither the envelope decomposition nor the fields, so it only agrees
    with the other paths where the grid resolves the phase (see phase_resolved).
    """
    grid = psi.grid
    wave = psi.as_complex()
    images = {0: wave.values}
    for order in range(1, obs.max_order + 1):
        images[order] = derivative(wave, order).values
    image = np.zeros(grid.n_points, dtype=complex)
    for term in obs.terms:
        image += term.coefficient_values(grid) * images[term.order]
    return integrate(ComplexGridFunction(grid, np.conj(wave.values) * image))


def phase_resolved(psi: WaveFunction, limit: float = PHASE_STEP_LIMIT) -> bool:
    """True when cells advancing the phase by more than `limit` carry negligible rho (1 + g^2)."""
    g = psi.gradient().values
    weight = psi.density.values * (1.0 + g**2)
    fast = np.abs(g) * psi.grid.dx > limit
    return bool(weight[fast].sum() <= UNRESOLVED_WEIGHT * weight.sum())


@dataclass
class ParameterSet:
    """Means, correlations and standard deviations of a list of observables."""

    reading: Reading
    means: Dict[str, float] = field(default_factory=dict)
    correlations: Dict[Tuple[str, str], complex] = field(default_factory=dict)
    stddevs: Dict[str, float] = field(default_factory=dict)
    path_residuals: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def labels(self) -> List[str]:
        return list(self.means)

    def correlation(self, a: str, b: str) -> complex:
        return self.correlations[(a, b)]

    def to_frame(self) -> pd.DataFrame:
        """Long table: one row per quantity with real and imaginary parts."""
        rows = []
        for label, value in self.means.items():
            rows.append({"reading": self.reading.value, "quantity": f"<{label}>",
                         "real": value, "imag": 0.0})
        for label, value in self.stddevs.items():
            rows.append({"reading": self.reading.value, "quantity": f"Delta {label}",
                         "real": value, "imag": 0.0})
        for (a, b), value in self.correlations.items():
            rows.append({"reading": self.reading.value, "quantity": f"C({a},{b})",
                         "real": value.real, "imag": value.imag})
        return pd.DataFrame(rows, columns=["reading", "quantity", "real", "imag"])


def parameters(
    psi: WaveFunction,
    observables: Sequence[Observable],
    reading: Reading = Reading.IN,
) -> ParameterSet:
    """
    Mean (psi, A psi), correlation (dA psi, dB psi) and spread sqrt(Re C(A, A)).

    dA = A - <A>. Higher powers of A are never formed: the spread is the norm
    of dA psi.

    Args:
        psi: Normalized wave function
        observables: Observables with distinct labels
        reading: IN for intrinsic states, PR for reconstructed recorded states

    Returns:
        ParameterSet
    """
    labels = [obs.label for obs in observables]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"observable labels must be distinct, got {labels}")

    grid = psi.grid
    R = psi.modulus.values
    result = ParameterSet(reading=Reading(reading), warnings=list(psi.warnings))
    deviations = {}
    for obs in observables:
        envelope = apply_envelope(obs, psi).values
        mean = integrate(ComplexGridFunction(grid, R * envelope))
        scale = max(1.0, abs(mean.real))
        if abs(mean.imag) > HERMITIAN_TOLERANCE * scale:
            note = (
                f"<{obs.label}> has imaginary residual {mean.imag:.2e}; "
                "observable may not be hermitian on this state"
            )
            logger.warning(note)
            result.warnings.append(note)
        result.means[obs.label] = float(mean.real)
        deviations[obs.label] = envelope - mean.real * R

    for a, b in product(labels, repeat=2):
        value = integrate(ComplexGridFunction(grid, np.conj(deviations[a]) * deviations[b]))
        result.correlations[(a, b)] = complex(value)
    for label in labels:
        result.stddevs[label] = float(np.sqrt(max(result.correlations[(label, label)].real, 0.0)))
    return result


def pr_parameters(
    fields_pr: ProbabilityFields,
    observables: Sequence[Observable],
    psi_pr: Optional[WaveFunction] = None,
) -> ParameterSet:
    """
    Recorded-reading parameters through the reconstructed state.

    Means are cross-checked against the substitution path; disagreements above
    PATH_AGREEMENT_TOLERANCE are flagged in the warnings.

    Args:
        fields_pr: Recorded density and current
        observables: Observables of order <= 2
        psi_pr: Already reconstructed state for fields_pr, if available

    Returns:
        ParameterSet in the PR reading
    """
    if psi_pr is None:
        psi_pr = reconstruct_wavefunction(fields_pr)
    params = parameters(psi_pr, observables, Reading.PR)
    for obs in observables:
        substituted = expectation_substitution(fields_pr, obs).real
        residual = abs(substituted - params.means[obs.label])
        params.path_residuals[obs.label] = residual
        if residual > PATH_AGREEMENT_TOLERANCE * max(1.0, abs(substituted)):
            note = (
                f"<{obs.label}> differs between substitution and wave-function "
                f"paths by {residual:.2e}"
            )
            logger.warning(note)
            params.warnings.append(note)
    return params


def robertson_bound(params: ParameterSet, a: str, b: str) -> float:
    """Half the magnitude of <[A, B]>, i.e. |Im C(A, B)|."""
    return abs(params.correlation(a, b).imag)


def uncertainty_product(params: ParameterSet, a: str, b: str) -> float:
    return params.stddevs[a] * params.stddevs[b]
