"""Report assembly: JSON documents, aligned text tables and CSV files."""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.config import SCHEMA_VERSION
from src.models.indicators import EntropyReport, ErrorIndicators
from src.models.measurement import KernelReport
from src.models.observables import ParameterSet
from src.pipeline.analysis import AnalysisResult

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.12g"


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, NaN and inf mapped to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _pair(pair) -> str:
    return f"{pair[0]},{pair[1]}"


def parameter_section(params: ParameterSet) -> Dict:
    return {
        "reading": params.reading.value,
        "means": dict(params.means),
        "stddevs": dict(params.stddevs),
        "correlations": {
            _pair(pair): {"real": value.real, "imag": value.imag}
            for pair, value in params.correlations.items()
        },
        "path_residuals": dict(params.path_residuals),
    }


def indicator_section(indicators: ErrorIndicators) -> Dict:
    return {
        "reading": indicators.reading.value,
        "mean_errors": dict(indicators.mean_errors),
        "correlation_errors": {
            _pair(pair): value for pair, value in indicators.correlation_errors.items()
        },
        "stddev_errors": dict(indicators.stddev_errors),
        "signed_stddev_errors": dict(indicators.signed_stddev_errors),
    }


def entropy_section(entropy: EntropyReport) -> Dict:
    return {
        "positional": dict(entropy.positional),
        "motional": dict(entropy.motional),
        "delta_H": entropy.delta_H,
        "delta_tau": entropy.delta_tau if entropy.motional_defined else None,
        "motional_defined": entropy.motional_defined,
        "units": entropy.units,
    }


def kernel_section(report: KernelReport) -> Dict:
    return {
        "kind": report.kind,
        "integral": report.integral,
        "nonnegative": report.nonnegative,
        "width": report.width,
        "passed": report.passed,
        "messages": list(report.messages),
    }


def build_report(result: AnalysisResult) -> Dict:
    """
    Machine-readable report of one run.

    Args:
        result: Analysis, optionally with FR sections filled in

    Returns:
        JSON-safe dictionary (schema_version 1)
    """
    grid = result.grid
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": result.config.to_dict(),
        "grid": {"x_min": grid.x_min, "dx": grid.dx, "n_points": grid.n_points},
        "kernels": {name: kernel_section(r) for name, r in result.kernel_reports.items()},
        "parameters": {
            "IN": parameter_section(result.params_in),
            "PR": parameter_section(result.params_pr),
        },
        "indicators": {"PR": indicator_section(result.pr_indicators)},
        "entropy": entropy_section(result.entropy),
        "oracle": None,
        "warnings": list(result.warnings),
    }
    if result.oracle_residuals is not None:
        report["oracle"] = {
            "passed": result.oracle_passed(),
            "max_abs_error": result.max_oracle_residual(),
            "residuals": result.oracle_residuals.to_dict(orient="records"),
        }
    if result.fr_params is not None:
        report["parameters"]["FR"] = parameter_section(result.fr_params)
        report["indicators"]["FR"] = indicator_section(result.fr_indicators)
        report["sampling"] = {
            "seeds": {s.label: s.seed for s in result.samples},
            "convergence": result.fr_convergence.to_dict(orient="records"),
            "trials": result.fr_trials,
        }
    return _clean(report)


def summary_table(result: AnalysisResult) -> pd.DataFrame:
    """Wide table of every reading (rows) against its parameters (columns)."""
    frames = [result.params_in.to_frame(), result.params_pr.to_frame()]
    if result.fr_params is not None:
        frames.append(result.fr_params.to_frame())
    long = pd.concat(frames, ignore_index=True)
    return long.pivot_table(
        index="quantity", columns="reading", values="real", sort=False
    ).reset_index()


def render_text(result: AnalysisResult) -> str:
    """Aligned plain-text report for standard output."""
    sections = [
        "Parameters (real parts; imaginary parts in the JSON report)",
        summary_table(result).to_string(index=False, float_format=lambda v: f"{v:.9g}"),
        "",
        "Error indicators",
    ]
    indicators = [result.pr_indicators.to_frame()]
    if result.fr_indicators is not None:
        indicators.append(result.fr_indicators.to_frame())
    sections.append(
        pd.concat(indicators, ignore_index=True).to_string(
            index=False, float_format=lambda v: f"{v:.6g}"
        )
    )
    entropy = result.entropy
    sections += [
        "",
        f"delta H   = {entropy.delta_H:.9g}",
        "delta tau = "
        + (f"{entropy.delta_tau:.9g}" if entropy.motional_defined else "undefined (zero current)"),
    ]
    if result.oracle_residuals is not None:
        sections += [
            "",
            f"Closed-form check: {'PASS' if result.oracle_passed() else 'FAIL'} "
            f"(max abs error {result.max_oracle_residual():.3e})",
        ]
    if result.warnings:
        sections += ["", "Warnings:"] + [f"  - {note}" for note in result.warnings]
    return "\n".join(sections) + "\n"


def write_json(document: Dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_clean(document), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("Wrote %s", path)
    return path


def write_csv(df: pd.DataFrame, path, float_format: Optional[str] = CSV_FLOAT_FORMAT) -> Path:
    """CSV with header row, dot decimals, UTF-8 and LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(
        path, index=False, float_format=float_format, encoding="utf-8", lineterminator="\n"
    )
    logger.info("Wrote %s", path)
    return path
