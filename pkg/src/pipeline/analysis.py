"""End-to-end pipeline: state, fields, device transform, reconstruction, parameters, indicators."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import RunConfig
from src.data_sources.tables import KernelTable
from src.errors import QMSError, ValidationError
from src.models.gaussian_oracle import (
    GaussianScenario,
    OscillatorScenario,
    closed_form_fields,
    closed_form_indicators,
    closed_form_parameters,
    default_grid,
    oscillator_closed_forms,
)
from src.models.indicators import (
    EntropyReport,
    ErrorIndicators,
    entropy_indicators,
    pr_error_indicators,
)
from src.models.measurement import KernelReport, KernelSpec, MeasurementSpec, transform, validate_kernel
from src.models.monte_carlo import (
    RecordSimulator,
    SampleSet,
    fr_error_indicators,
    fr_statistics,
)
from src.models.observables import (
    Observable,
    ParameterSet,
    Reading,
    harmonic_hamiltonian,
    momentum,
    parameters,
    position,
    pr_parameters,
)
from src.models.quantum_state import (
    ProbabilityFields,
    WaveFunction,
    make_gaussian_state,
    reconstruct_wavefunction,
    to_probability_fields,
)
from src.numerics.grid import Grid

logger = logging.getLogger(__name__)

ZERO_ABS_TOLERANCE = 1e-8
RELATIVE_TOLERANCE = 1e-5
STAGES = 6


@dataclass
class AnalysisResult:
    """Everything one run computes, before it is rendered into a report."""

    config: RunConfig
    grid: Grid
    measurement: MeasurementSpec
    kernel_reports: Dict[str, KernelReport]
    psi_in: WaveFunction
    fields_in: ProbabilityFields
    fields_pr: ProbabilityFields
    psi_pr: WaveFunction
    params_in: ParameterSet
    params_pr: ParameterSet
    pr_indicators: ErrorIndicators
    entropy: EntropyReport
    oracle_residuals: Optional[pd.DataFrame] = None
    fr_params: Optional[ParameterSet] = None
    fr_indicators: Optional[ErrorIndicators] = None
    fr_convergence: Optional[pd.DataFrame] = None
    fr_trials: Optional[Dict[str, float]] = None
    samples: List[SampleSet] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def max_oracle_residual(self) -> float:
        if self.oracle_residuals is None or self.oracle_residuals.empty:
            return float("nan")
        return float(self.oracle_residuals["abs_error"].max())

    def oracle_passed(self) -> bool:
        if self.oracle_residuals is None:
            return True
        return bool(self.oracle_residuals["passed"].all())


def build_grid(config: RunConfig) -> Grid:
    """Default grid of the scenario, or one sharing the spacing of tabulated kernels."""
    grid = default_grid(config.scenario(), config.span_mult, config.n_points)
    if not config.has_tabulated_kernels:
        return grid
    spacings = {
        KernelTable(path).load().table.grid.dx
        for path in (config.density_kernel_file, config.current_kernel_file)
        if path is not None
    }
    if len(spacings) > 1:
        raise ValidationError(f"tabulated kernels use different spacings: {sorted(spacings)}")
    dx = spacings.pop()
    half_cells = int(np.ceil(0.5 * grid.span / dx))
    center = config.scenario().x0
    logger.info("Grid spacing set to %.6g by the tabulated kernels", dx)
    return Grid(x_min=center - half_cells * dx, dx=dx, n_points=2 * half_cells + 1)


def build_measurement(config: RunConfig, grid: Grid) -> MeasurementSpec:
    density = (
        KernelTable(config.density_kernel_file).load(grid)
        if config.density_kernel_file
        else KernelSpec.gaussian(config.sigma)
    )
    current = (
        KernelTable(config.current_kernel_file).load(grid)
        if config.current_kernel_file
        else KernelSpec.gaussian(config.lambda_)
    )
    return MeasurementSpec(density, current)


def build_observables(config: RunConfig, grid: Grid) -> List[Observable]:
    """x and p, plus the oscillator Hamiltonian H for oscillator runs."""
    observables = [position(grid), momentum(config.constants)]
    if config.is_oscillator:
        observables.append(harmonic_hamiltonian(config.constants, config.omega, grid))
    return observables


def _residual_row(quantity: str, numerical: float, closed: float) -> Dict:
    error = abs(numerical - closed)
    if closed == 0:
        relative = float("nan")
        passed = error <= ZERO_ABS_TOLERANCE
    else:
        relative = error / abs(closed)
        passed = relative <= RELATIVE_TOLERANCE or error <= ZERO_ABS_TOLERANCE
    return {
        "quantity": quantity,
        "numerical": float(numerical),
        "closed_form": float(closed),
        "abs_error": float(error),
        "rel_error": float(relative),
        "passed": bool(passed),
    }


def _parameter_rows(numerical: ParameterSet, closed: ParameterSet) -> List[Dict]:
    tag = numerical.reading.value
    rows = []
    for label, value in closed.means.items():
        rows.append(_residual_row(f"<{label}>_{tag}", numerical.means[label], value))
    for label, value in closed.stddevs.items():
        rows.append(_residual_row(f"Delta_{tag} {label}", numerical.stddevs[label], value))
    for (a, b), value in closed.correlations.items():
        got = numerical.correlations[(a, b)]
        rows.append(_residual_row(f"Re C_{tag}({a},{b})", got.real, value.real))
        rows.append(_residual_row(f"Im C_{tag}({a},{b})", got.imag, value.imag))
    return rows


def oracle_residuals(
    scenario: GaussianScenario,
    params_in: ParameterSet,
    params_pr: ParameterSet,
    indicators: ErrorIndicators,
    entropy: EntropyReport,
    omega: Optional[float] = None,
) -> pd.DataFrame:
    """
    Engine-vs-closed-form residuals for a Gaussian (or oscillator) run.

    Args:
        scenario: Scenario the run was built from
        params_in: Numerical IN parameters
        params_pr: Numerical PR parameters
        indicators: Numerical PR error indicators
        entropy: Numerical entropy report
        omega: Oscillator frequency, adds the energy rows when given

    Returns:
        DataFrame with one row per compared quantity
    """
    closed_in, closed_pr = closed_form_parameters(scenario)
    closed_ind, closed_entropy = closed_form_indicators(scenario)
    rows = _parameter_rows(params_in, closed_in) + _parameter_rows(params_pr, closed_pr)
    for label, value in closed_ind.stddev_errors.items():
        rows.append(_residual_row(f"delta(Delta {label})", indicators.stddev_errors[label], value))
    for label, value in closed_ind.mean_errors.items():
        rows.append(_residual_row(f"delta(<{label}>)", indicators.mean_errors[label], value))
    rows.append(_residual_row(
        "delta(C(x,p))", indicators.correlation_errors[("x", "p")], 0.0
    ))
    rows.append(_residual_row("delta H", entropy.delta_H, closed_entropy.delta_H))
    if closed_entropy.motional_defined:
        rows.append(_residual_row("delta tau", entropy.delta_tau, closed_entropy.delta_tau))

    if omega is not None:
        energy = oscillator_closed_forms(
            OscillatorScenario(omega, scenario.sigma, scenario.constants)
        )
        rows.extend([
            _residual_row("<H>_IN", params_in.means["H"], energy.mean_in),
            _residual_row("Delta_IN H", params_in.stddevs["H"], energy.stddev_in),
            _residual_row("<H>_PR", params_pr.means["H"], energy.mean_pr),
            _residual_row("Delta_PR H", params_pr.stddevs["H"], energy.stddev_pr),
            _residual_row("delta(<H>)", indicators.mean_errors["H"], energy.mean_error),
            _residual_row("delta(Delta H)", indicators.stddev_errors["H"], energy.stddev_error),
        ])
    return pd.DataFrame(rows)


def run_analysis(config: RunConfig) -> AnalysisResult:
    """
    Build the state, transform its fields, reconstruct the recorded state and
    compute parameters, indicators and entropies.

    Args:
        config: Resolved run configuration

    Returns:
        AnalysisResult; oracle residuals attached when the run is Gaussian
    """
    scenario = config.scenario()
    if config.is_gaussian:
        scenario.check_domain()

    logger.info("[1/%d] Building grid and intrinsic state...", STAGES)
    grid = build_grid(config)
    psi_in = make_gaussian_state(scenario.state, config.constants, grid)
    fields_in = to_probability_fields(psi_in)

    logger.info("[2/%d] Validating kernels and transforming fields...", STAGES)
    measurement = build_measurement(config, grid)
    kernel_reports = {
        "density": validate_kernel(measurement.density_kernel, grid),
        "current": validate_kernel(measurement.current_kernel, grid),
    }
    fields_pr = transform(fields_in, measurement)

    logger.info("[3/%d] Reconstructing the recorded state...", STAGES)
    psi_pr = reconstruct_wavefunction(fields_pr)

    logger.info("[4/%d] Computing IN and PR parameters...", STAGES)
    observables = build_observables(config, grid)
    params_in = parameters(psi_in, observables, Reading.IN)
    params_pr = pr_parameters(fields_pr, observables, psi_pr)

    logger.info("[5/%d] Computing error and entropic indicators...", STAGES)
    indicators = pr_error_indicators(params_in, params_pr)
    entropy = entropy_indicators(fields_in, fields_pr)

    residuals = None
    if config.is_gaussian:
        logger.info("[6/%d] Comparing against the closed forms...", STAGES)
        residuals = oracle_residuals(
            scenario, params_in, params_pr, indicators, entropy, config.omega
        )
        failed = residuals[~residuals["passed"]]
        if not failed.empty:
            logger.warning(
                "%d quantities miss their closed form (worst %s)",
                len(failed), failed.sort_values("abs_error").iloc[-1]["quantity"],
            )
    else:
        logger.info("[6/%d] Tabulated kernels: no closed form to compare", STAGES)

    warnings = _unique(
        list(fields_pr.warnings) + params_in.warnings + params_pr.warnings + entropy.warnings
    )
    return AnalysisResult(
        config=config,
        grid=grid,
        measurement=measurement,
        kernel_reports=kernel_reports,
        psi_in=psi_in,
        fields_in=fields_in,
        fields_pr=fields_pr,
        psi_pr=psi_pr,
        params_in=params_in,
        params_pr=params_pr,
        pr_indicators=indicators,
        entropy=entropy,
        oracle_residuals=residuals,
        warnings=warnings,
    )


def _unique(notes: Sequence[str]) -> List[str]:
    return list(dict.fromkeys(notes))


def run_sampling(result: AnalysisResult, seed: Optional[int] = None) -> AnalysisResult:
    """
    Add factual-record statistics to an analysis.

    Position and momentum campaigns are separate (seeds seed and seed + 1), so
    only means, spreads and diagonal correlations are recorded. The configured
    number of repeated position campaigns (trial_samples records each) then
    measures how often <x>_FR lands within 4 standard errors of <x>_PR.

    Args:
        result: Completed analysis
        seed: Base seed (defaults to the configured one)

    Returns:
        The same AnalysisResult with its FR fields filled in
    """
    config = result.config
    simulator = RecordSimulator({
        "samples": config.samples,
        "seed": config.seed if seed is None else int(seed),
        "trials": config.trials,
        "trial_samples": config.trial_samples,
    })
    samples = simulator.run_campaign(result.fields_pr, result.psi_pr)
    fr = fr_statistics(samples)
    result.samples = samples
    result.fr_params = fr
    result.fr_indicators = fr_error_indicators(fr, result.params_in)

    rows = []
    for s in samples:
        predicted_mean = result.params_pr.means[s.label]
        predicted_stddev = result.params_pr.stddevs[s.label]
        mean_stderr = predicted_stddev / np.sqrt(s.n)
        stddev_stderr = predicted_stddev / np.sqrt(2.0 * s.n)
        rows.append({
            "label": s.label,
            "n": s.n,
            "seed": s.seed,
            "fr_mean": fr.means[s.label],
            "pr_mean": predicted_mean,
            "mean_stderr": mean_stderr,
            "fr_stddev": fr.stddevs[s.label],
            "pr_stddev": predicted_stddev,
            "stddev_stderr": stddev_stderr,
            "within_band": bool(
                abs(fr.means[s.label] - predicted_mean) <= 4.0 * mean_stderr
                and abs(fr.stddevs[s.label] - predicted_stddev) <= 4.0 * stddev_stderr
            ),
        })
    result.fr_convergence = pd.DataFrame(rows)
    if not result.fr_convergence["within_band"].all():
        note = "factual records fall outside the 4-sigma band of the prognosis"
        logger.warning(note)
        result.warnings.append(note)

    _, summary = simulator.convergence_trials(
        result.fields_pr, result.params_pr.means["x"], result.params_pr.stddevs["x"]
    )
    result.fr_trials = summary
    if summary["within_band_pct"] < 95.0:
        note = (
            f"only {summary['within_band_pct']:.0f}% of {config.trials} repeated position "
            "campaigns fall within the 4-sigma band"
        )
        logger.warning(note)
        result.warnings.append(note)
    return result


def _flatten(result: AnalysisResult) -> Dict:
    """One sweep row: parameters, indicators, entropies and the worst oracle residual."""
    row = {}
    for params in (result.params_in, result.params_pr):
        tag = params.reading.value
        for label in params.labels:
            row[f"mean_{label}_{tag}"] = params.means[label]
            row[f"std_{label}_{tag}"] = params.stddevs[label]
        row[f"im_C_xp_{tag}"] = params.correlations[("x", "p")].imag
    ind = result.pr_indicators
    for label in ind.mean_errors:
        row[f"delta_mean_{label}"] = ind.mean_errors[label]
        row[f"delta_std_{label}"] = ind.stddev_errors[label]
        row[f"signed_delta_std_{label}"] = ind.signed_stddev_errors[label]
    row["delta_C_xp"] = ind.correlation_errors[("x", "p")]
    row["delta_H"] = result.entropy.delta_H
    row["delta_tau"] = result.entropy.delta_tau if result.entropy.motional_defined else np.nan
    row["motional_defined"] = result.entropy.motional_defined
    row["max_oracle_residual"] = result.max_oracle_residual()
    row["oracle_passed"] = result.oracle_passed()
    if result.fr_params is not None:
        for label in result.fr_params.labels:
            row[f"mean_{label}_FR"] = result.fr_params.means[label]
            row[f"std_{label}_FR"] = result.fr_params.stddevs[label]
            row[f"fr_delta_mean_{label}"] = result.fr_indicators.mean_errors[label]
            row[f"fr_delta_std_{label}"] = result.fr_indicators.stddev_errors[label]
    row["warnings"] = " | ".join(result.warnings)
    return row


def point_config(config: RunConfig, axis: str, value: float) -> RunConfig:
    """Copy of config with one sweep axis set to value."""
    if axis == "sigma":
        return config.with_changes(sigma=float(value))
    if axis == "lambda":
        return config.with_changes(lambda_=float(value))
    if axis == "k":
        if config.is_oscillator:
            raise ValidationError("the oscillator ground state has k = 0; sweep another axis")
        state = config.state
        return config.with_changes(state=type(state)(state.x0, state.alpha, float(value)))
    if axis == "n":
        return config.with_changes(samples=int(value))
    raise ValidationError(f"unknown sweep axis '{axis}'")


def _sweep_point(config: RunConfig, axis: str, index: int, value: float) -> Dict:
    row = {"index": index, "axis": axis, "value": value, "valid": True, "flag": ""}
    try:
        point = point_config(config, axis, value)
        result = run_analysis(point)
        if axis == "n":
            run_sampling(result, seed=config.seed + index)
        row.update(_flatten(result))
        if not result.entropy.motional_defined:
            row["flag"] = "delta tau undefined (zero current)"
    except QMSError as exc:
        logger.warning("Sweep point %s=%s skipped: %s", axis, value, exc)
        row.update({"valid": False, "flag": f"skipped: {exc}"})
    return row


def run_sweep(
    config: RunConfig,
    axis: Optional[str] = None,
    values: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """
    Evaluate the pipeline at every value of one axis, concurrently.

    Invalid points are skipped and flagged; rows keep the axis order.

    Args:
        config: Base configuration
        axis: sigma, lambda, k or n (defaults to the configured axis)
        values: Axis values (defaults to the configured values)

    Returns:
        DataFrame with one row per axis value
    """
    axis = axis or config.sweep_axis
    values = list(config.sweep_values if values is None else values)
    if len(values) < 2:
        raise ValidationError(f"a sweep needs at least 2 axis values, got {len(values)}")

    logger.info("Sweeping %s over %d values with %d workers", axis, len(values), config.workers)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        rows = list(pool.map(
            lambda item: _sweep_point(config, axis, item[0], item[1]),
            enumerate(values),
        ))
    skipped = sum(not row["valid"] for row in rows)
    if skipped:
        logger.warning("%d of %d sweep points skipped", skipped, len(rows))
    return pd.DataFrame(rows)


def curves(result: AnalysisResult) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Plot-ready density and current tables: x, IN, PR, oracle_IN, oracle_PR.

    Oracle columns are NaN for runs without a closed form.
    """
    x = result.grid.x
    if result.config.is_gaussian:
        exact = closed_form_fields(result.config.scenario())
        oracle = {
            "density": (exact.density_in(x), exact.density_pr(x)),
            "current": (exact.current_in(x), exact.current_pr(x)),
        }
    else:
        blank = np.full(x.size, np.nan)
        oracle = {"density": (blank, blank), "current": (blank, blank)}

    density = pd.DataFrame({
        "x": x,
        "IN": result.fields_in.density.values,
        "PR": result.fields_pr.density.values,
        "oracle_IN": oracle["density"][0],
        "oracle_PR": oracle["density"][1],
    })
    current = pd.DataFrame({
        "x": x,
        "IN": result.fields_in.current.values,
        "PR": result.fields_pr.current.values,
        "oracle_IN": oracle["current"][0],
        "oracle_PR": oracle["current"][1],
    })
    return density, current
