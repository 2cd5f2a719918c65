"""Uncertainty (error) indicators and Shannon-type entropic indicators."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy.special import xlogy

from src.errors import ValidationError
from src.models.observables import ParameterSet, Reading
from src.models.quantum_state import DENSITY_CUTOFF, NORMALIZATION_TOLERANCE, ProbabilityFields
from src.numerics.calculus import integrate
from src.numerics.grid import GridFunction

logger = logging.getLogger(__name__)

ENTROPY_GAIN_TOLERANCE = 1e-9
ZERO_CURRENT_MASS = 1e-12
UNITS_NOTE = "natural logarithm; densities in inverse length units of the grid"


@dataclass
class ErrorIndicators:
    """Absolute differences between a recorded reading (FR or PR) and the intrinsic one."""

    reading: Reading
    mean_errors: Dict[str, float] = field(default_factory=dict)
    correlation_errors: Dict[Tuple[str, str], float] = field(default_factory=dict)
    stddev_errors: Dict[str, float] = field(default_factory=dict)
    signed_stddev_errors: Dict[str, float] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for label, value in self.mean_errors.items():
            rows.append({"reading": self.reading.value, "indicator": f"delta(<{label}>)",
                         "value": value})
        for (a, b), value in self.correlation_errors.items():
            rows.append({"reading": self.reading.value, "indicator": f"delta(C({a},{b}))",
                         "value": value})
        for label, value in self.stddev_errors.items():
            rows.append({"reading": self.reading.value, "indicator": f"delta(Delta {label})",
                         "value": value})
        return pd.DataFrame(rows, columns=["reading", "indicator", "value"])

    def max_value(self) -> float:
        values = (
            list(self.mean_errors.values())
            + list(self.correlation_errors.values())
            + list(self.stddev_errors.values())
        )
        return max(values) if values else 0.0


def compare_parameters(
    recorded: ParameterSet,
    intrinsic: ParameterSet,
    strict: bool = True,
) -> ErrorIndicators:
    """Elementwise |recorded - intrinsic|; strict demands identical label sets."""
    recorded_labels = set(recorded.means)
    intrinsic_labels = set(intrinsic.means)
    mismatch = recorded_labels != intrinsic_labels if strict else not recorded_labels <= intrinsic_labels
    if mismatch:
        raise ValidationError(
            f"parameter labels do not match: {sorted(recorded_labels)} vs "
            f"{sorted(intrinsic_labels)}"
        )
    if strict and set(recorded.correlations) != set(intrinsic.correlations):
        raise ValidationError("parameter sets cover different correlation pairs")

    result = ErrorIndicators(reading=recorded.reading)
    for label, value in recorded.means.items():
        result.mean_errors[label] = abs(value - intrinsic.means[label])
    for pair, value in recorded.correlations.items():
        if pair not in intrinsic.correlations:
            raise ValidationError(f"intrinsic parameters lack correlation {pair}")
        result.correlation_errors[pair] = abs(value - intrinsic.correlations[pair])
    for label, value in recorded.stddevs.items():
        signed = value - intrinsic.stddevs[label]
        result.signed_stddev_errors[label] = signed
        result.stddev_errors[label] = abs(signed)
    return result


def pr_error_indicators(in_params: ParameterSet, pr_params: ParameterSet) -> ErrorIndicators:
    """
    PR-type indicators |PR - IN| for means, correlations (complex modulus) and spreads.

    Args:
        in_params: Intrinsic parameters
        pr_params: Recorded-prognosis parameters over the same labels

    Returns:
        ErrorIndicators in the PR reading
    """
    return compare_parameters(pr_params, in_params, strict=True)


def _check_density(density: GridFunction) -> None:
    if np.any(density.values < 0):
        raise ValidationError("entropy needs a nonnegative density")
    total = integrate(density)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ValidationError(f"entropy needs a normalized density, integral is {total:.9f}")


def _shannon(values: np.ndarray, grid) -> float:
    values = np.abs(values)
    kept = np.where(values >= DENSITY_CUTOFF * values.max(), values, 0.0)
    return -integrate(GridFunction(grid, xlogy(kept, kept)))


def positional_entropy(density: GridFunction) -> float:
    """H = -integral rho ln rho dx, with 0 ln 0 = 0."""
    _check_density(density)
    return _shannon(density.values, density.grid)


@dataclass(frozen=True)
class MotionalEntropy:
    value: float
    defined: bool


def motional_entropy(current: GridFunction) -> MotionalEntropy:
    """tau = -integral |J| ln |J| dx; undefined (reported as 0) when J vanishes."""
    if integrate(GridFunction(current.grid, np.abs(current.values))) < ZERO_CURRENT_MASS:
        return MotionalEntropy(0.0, False)
    return MotionalEntropy(_shannon(current.values, current.grid), True)


@dataclass
class EntropyReport:
    """Positional (H) and motional (tau) entropies per reading and their PR - IN gains."""

    positional: Dict[str, float]
    motional: Dict[str, float]
    delta_H: float
    delta_tau: float
    motional_defined: bool
    units: str = UNITS_NOTE
    warnings: List[str] = field(default_factory=list)


def entropy_indicators(fields_in: ProbabilityFields, fields_pr: ProbabilityFields) -> EntropyReport:
    """
    Entropic indicators delta H = H_PR - H_IN and delta tau = tau_PR - tau_IN.

    Args:
        fields_in: Intrinsic fields
        fields_pr: Recorded-prognosis fields

    Returns:
        EntropyReport; delta_tau is 0 with motional_defined False when either
        current vanishes
    """
    H_in = positional_entropy(fields_in.density)
    H_pr = positional_entropy(fields_pr.density)
    tau_in = motional_entropy(fields_in.current)
    tau_pr = motional_entropy(fields_pr.current)
    defined = tau_in.defined and tau_pr.defined

    report = EntropyReport(
        positional={"IN": H_in, "PR": H_pr},
        motional={"IN": tau_in.value, "PR": tau_pr.value},
        delta_H=H_pr - H_in,
        delta_tau=tau_pr.value - tau_in.value if defined else 0.0,
        motional_defined=defined,
    )
    if report.delta_H < -ENTROPY_GAIN_TOLERANCE:
        note = f"positional entropy decreased under measurement (delta H = {report.delta_H:.3e})"
        logger.warning(note)
        report.warnings.append(note)
    if not defined:
        report.warnings.append("motional entropy undefined: probability current vanishes")
    return report
