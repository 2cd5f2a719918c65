"""Monte Carlo simulation of factual records (finite detection campaigns)."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.fft import fft, fftfreq, fftshift
from scipy.integrate import cumulative_trapezoid

from src.errors import SamplingError, ValidationError
from src.models.indicators import ErrorIndicators, compare_parameters
from src.models.observables import ParameterSet, Reading
from src.models.quantum_state import ProbabilityFields, WaveFunction

logger = logging.getLogger(__name__)

# Spectral mass allowed in the outermost 5% of the frequency range.
ALIASING_TOLERANCE = 1e-6
EDGE_BAND = 0.05
MOMENTUM_PADDING = 8


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Values a_1 .. a_n recorded for one observable, with the seed that drew them."""

    label: str
    values: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 1 or values.size < 2:
            raise ValidationError(f"sample set '{self.label}' needs at least 2 values")
        if not np.all(np.isfinite(values)):
            raise ValidationError(f"sample set '{self.label}' contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)


def _check_count(n: int) -> int:
    if int(n) != n or n < 2:
        raise SamplingError(f"a record campaign needs n >= 2 draws, got {n}")
    return int(n)


def _inverse_cdf_draw(nodes: np.ndarray, weights: np.ndarray, n: int, rng) -> np.ndarray:
    """Draw n values from a sampled density by inverting its running integral."""
    cdf = cumulative_trapezoid(np.clip(weights, 0.0, None), nodes, initial=0.0)
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, nodes)


def sample_position(fields_pr: ProbabilityFields, n: int, seed: int) -> SampleSet:
    """
    Independent position records drawn from the recorded density.

    Args:
        fields_pr: Recorded density (and current)
        n: Number of detection acts
        seed: Seed of the PCG64 generator

    Returns:
        SampleSet labelled "x"
    """
    n = _check_count(n)
    rng = np.random.default_rng(seed)
    grid = fields_pr.grid
    values = _inverse_cdf_draw(grid.x, fields_pr.density.values, n, rng)
    return SampleSet("x", values, seed)


def momentum_density(psi: WaveFunction, padding: int = MOMENTUM_PADDING) -> Tuple[np.ndarray, np.ndarray]:
    """
    Momentum marginal |psi~(p)|^2 from the zero-padded discrete spectrum.

    Args:
        psi: Wave function
        padding: Zero-padding factor refining the momentum lattice

    Returns:
        Tuple of (momenta ascending, normalized density values)
    """
    grid = psi.grid
    hbar = psi.constants.hbar
    size = padding * grid.n_points
    amplitude = fftshift(fft(psi.as_complex().values, n=size)) * grid.dx
    momenta = fftshift(2.0 * np.pi * hbar * fftfreq(size, d=grid.dx))
    weights = np.abs(amplitude) ** 2
    dp = momenta[1] - momenta[0]
    weights /= weights.sum() * dp

    p_max = np.abs(momenta).max()
    edge = np.abs(momenta) >= (1.0 - EDGE_BAND) * p_max
    edge_mass = weights[edge].sum() * dp
    if edge_mass > ALIASING_TOLERANCE:
        raise SamplingError(
            f"momentum spectrum holds {edge_mass:.2e} of its mass near the Nyquist limit; "
            "refine the grid spacing"
        )
    return momenta, weights


def sample_momentum(psi_pr: WaveFunction, n: int, seed: int) -> SampleSet:
    """
    Independent momentum records drawn from the spectral marginal of psi_pr.

    Args:
        psi_pr: Reconstructed recorded state
        n: Number of detection acts
        seed: Seed of the PCG64 generator

    Returns:
        SampleSet labelled "p"
    """
    n = _check_count(n)
    rng = np.random.default_rng(seed)
    momenta, weights = momentum_density(psi_pr)
    return SampleSet("p", _inverse_cdf_draw(momenta, weights, n, rng), seed)


def fr_statistics(samples: Sequence[SampleSet], paired: bool = False) -> ParameterSet:
    """
    Factual-record statistics with divisor n.

    Means and spreads come per sample set; cross correlations only when the
    sets are paired record by record.

    Args:
        samples: One SampleSet per observable
        paired: Whether index i of every set belongs to the same detection act

    Returns:
        ParameterSet in the FR reading
    """
    labels = [s.label for s in samples]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"sample labels must be distinct, got {labels}")
    result = ParameterSet(reading=Reading.FR)

    if paired:
        sizes = {s.n for s in samples}
        if len(sizes) > 1:
            raise ValidationError(f"paired statistics need equal sample sizes, got {sorted(sizes)}")
        frame = pd.DataFrame({s.label: s.values for s in samples})
        covariance = frame.cov(ddof=0)
        for a in labels:
            for b in labels:
                result.correlations[(a, b)] = complex(covariance.loc[a, b], 0.0)
        means = frame.mean()
        for label in labels:
            result.means[label] = float(means[label])
    else:
        for s in samples:
            series = pd.Series(s.values)
            result.means[s.label] = float(series.mean())
            result.correlations[(s.label, s.label)] = complex(series.var(ddof=0), 0.0)

    for label in labels:
        result.stddevs[label] = float(np.sqrt(result.correlations[(label, label)].real))
    return result


def fr_error_indicators(fr: ParameterSet, in_params: ParameterSet) -> ErrorIndicators:
    """FR-type indicators |FR - IN| over the labels present in the records."""
    return compare_parameters(fr, in_params, strict=False)


class RecordSimulator:
    """Monte Carlo engine for factual-record campaigns."""

    def __init__(self, sampling: Dict):
        """
        Initialize simulator with sampling settings.

        Args:
            sampling: Sampling section of the run configuration
                (samples, seed, trials, trial_samples)
        """
        self.sampling = sampling
        self.samples = int(sampling.get("samples", 100000))
        self.seed = int(sampling.get("seed", 42))
        self.trials = int(sampling.get("trials", 100))
        self.trial_samples = int(sampling.get("trial_samples", 10000))

    def run_campaign(
        self,
        fields_pr: ProbabilityFields,
        psi_pr: WaveFunction,
        seed: Optional[int] = None,
    ) -> List[SampleSet]:
        """
        Separate position and momentum campaigns (seeds seed and seed + 1).

        Args:
            fields_pr: Recorded fields
            psi_pr: Reconstructed recorded state
            seed: Base seed (defaults to the configured one)

        Returns:
            List of SampleSets for x and p
        """
        base = self.seed if seed is None else int(seed)
        logger.info("Drawing %d position and momentum records (seed %d)", self.samples, base)
        return [
            sample_position(fields_pr, self.samples, base),
            sample_momentum(psi_pr, self.samples, base + 1),
        ]

    def convergence_trials(
        self,
        fields_pr: ProbabilityFields,
        reference_mean: float,
        reference_stddev: float,
        n: Optional[int] = None,
        trials: Optional[int] = None,
        band: float = 4.0,
    ) -> Tuple[pd.DataFrame, Dict[str, float]]:
        """
        Repeated position campaigns testing the FR mean against the PR prognosis.

        Args:
            fields_pr: Recorded fields
            reference_mean: Prognosticated mean <x>_PR
            reference_stddev: Prognosticated spread Delta_PR x
            n: Records per trial (defaults to trial_samples)
            trials: Number of seeded trials, seeds seed .. seed + trials - 1
                (defaults to the configured count)
            band: Half-width of the acceptance band in standard errors

        Returns:
            Tuple of (per-trial DataFrame, summary statistics)
        """
        n = self.trial_samples if n is None else int(n)
        trials = self.trials if trials is None else int(trials)
        stderr = reference_stddev / np.sqrt(n)
        rows = []
        for trial in range(trials):
            stats = fr_statistics([sample_position(fields_pr, n, self.seed + trial)])
            error = abs(stats.means["x"] - reference_mean)
            rows.append({
                "trial": trial,
                "seed": self.seed + trial,
                "fr_mean": stats.means["x"],
                "fr_stddev": stats.stddevs["x"],
                "mean_error": error,
                "within_band": error <= band * stderr,
            })
        trials_df = pd.DataFrame(rows)
        summary = {
            "trials": float(trials),
            "n": float(n),
            "stderr": float(stderr),
            "mean_abs_error": float(trials_df["mean_error"].mean()),
            "within_band_pct": float(trials_df["within_band"].mean() * 100.0),
        }
        return trials_df, summary
