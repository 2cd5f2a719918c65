"""Command-line entry point: analyze, sample, sweep, curves and verify."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import RunConfig, SWEEP_AXES, resolve_config
from src.data_sources.tables import save_samples
from src.errors import ConfigError, QMSError
from src.pipeline.analysis import curves, run_analysis, run_sampling, run_sweep
from src.pipeline.verification import VerificationSuite, summarize
from src.reporting.reports import build_report, render_text, write_csv, write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_ERROR = 2

# argparse dest -> resolve_config flag name
FLAG_NAMES = {
    "x0": "x0",
    "alpha": "alpha",
    "k": "k",
    "omega": "omega",
    "sigma": "sigma",
    "lambda_": "lambda",
    "hbar": "hbar",
    "mass": "mass",
    "grid_points": "grid_points",
    "span_mult": "span_mult",
    "samples": "samples",
    "seed": "seed",
    "trials": "trials",
    "trial_samples": "trial_samples",
    "out": "out",
    "density_kernel": "density_kernel",
    "current_kernel": "current_kernel",
}


def _scenario_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="PATH", help="JSON (or YAML) run config")
    parent.add_argument("--x0", type=float, help="packet centre")
    parent.add_argument("--alpha", type=float, help="packet width")
    parent.add_argument("--k", type=float, help="phase wavenumber")
    parent.add_argument("--omega", type=float, help="oscillator frequency (replaces the state)")
    parent.add_argument("--sigma", type=float, help="density kernel width")
    parent.add_argument("--lambda", dest="lambda_", type=float, help="current kernel width")
    parent.add_argument("--hbar", type=float)
    parent.add_argument("--mass", type=float)
    parent.add_argument("--grid-points", type=int)
    parent.add_argument("--span-mult", type=float)
    parent.add_argument("--samples", type=int, help="records per campaign")
    parent.add_argument("--seed", type=int)
    parent.add_argument("--trials", type=int, help="repeated position campaigns in sample")
    parent.add_argument("--trial-samples", type=int, help="records per repeated campaign")
    parent.add_argument("--out", metavar="DIR", help="output directory (overrides QMS_OUT_DIR)")
    parent.add_argument("--density-kernel", metavar="CSV", help="tabulated density kernel")
    parent.add_argument("--current-kernel", metavar="CSV", help="tabulated current kernel")
    parent.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _scenario_flags()
    parser = argparse.ArgumentParser(
        prog="qms",
        description="Quantum measurement as statistical sampling: fields, parameters, indicators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[parent], help="run the pipeline and write report.json")
    sub.add_parser("sample", parents=[parent], help="analyze plus factual-record sampling")
    sweep = sub.add_parser("sweep", parents=[parent], help="evaluate along one axis into CSV")
    sweep.add_argument("--axis", choices=SWEEP_AXES)
    sweep.add_argument("--values", help="comma-separated axis values, e.g. 0,0.5,1")
    sweep.add_argument("--workers", type=int)
    sub.add_parser("curves", parents=[parent], help="write density and current CSV curves")
    verify = sub.add_parser("verify", parents=[parent], help="run the acceptance suite")
    verify.add_argument("--inject-kernel-scale", type=float, default=1.0,
                        help="scale the normalization-check kernel (fault injection)")
    return parser


def _parse_values(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    flags = {name: getattr(args, dest, None) for dest, name in FLAG_NAMES.items()}
    flags["axis"] = getattr(args, "axis", None)
    flags["values"] = _parse_values(getattr(args, "values", None))
    flags["workers"] = getattr(args, "workers", None)
    return resolve_config(args.config, flags)


def cmd_analyze(config: RunConfig) -> Dict:
    """Run the pipeline, write report.json and print the text table."""
    result = run_analysis(config)
    report = build_report(result)
    write_json(report, Path(config.out_dir) / "report.json")
    sys.stdout.write(render_text(result))
    return report


def cmd_sample(config: RunConfig) -> Dict:
    """Analyze, then draw factual records and add the FR section."""
    result = run_sampling(run_analysis(config))
    out_dir = Path(config.out_dir)
    for samples in result.samples:
        save_samples(samples, out_dir / f"samples_{samples.label}.csv")
    report = build_report(result)
    write_json(report, out_dir / "sample_report.json")
    sys.stdout.write(render_text(result))
    return report


def cmd_sweep(config: RunConfig) -> pd.DataFrame:
    table = run_sweep(config)
    write_csv(table, Path(config.out_dir) / f"sweep_{config.sweep_axis}.csv")
    columns = [c for c in ("value", "valid", "delta_std_x", "delta_std_p", "delta_H",
                           "delta_tau", "max_oracle_residual", "flag") if c in table.columns]
    sys.stdout.write(table[columns].to_string(index=False) + "\n")
    return table


def cmd_curves(config: RunConfig) -> Dict[str, Path]:
    density, current = curves(run_analysis(config))
    out_dir = Path(config.out_dir)
    paths = {
        "density": write_csv(density, out_dir / "curves_density.csv", float_format="%.17g"),
        "current": write_csv(current, out_dir / "curves_current.csv", float_format="%.17g"),
    }
    for name, path in paths.items():
        sys.stdout.write(f"{name}: {path}\n")
    return paths


def cmd_verify(config: RunConfig, kernel_scale: float = 1.0) -> int:
    """Run every acceptance criterion; exit status 1 when any fails."""
    table = VerificationSuite(config, kernel_scale=kernel_scale).run()
    write_csv(table, Path(config.out_dir) / "verify.csv")
    sys.stdout.write(table.to_string(index=False, float_format=lambda v: f"{v:.3e}") + "\n")
    totals = summarize(table)
    sys.stdout.write(f"{totals['passed']}/{totals['criteria']} criteria passed\n")
    return EXIT_OK if totals["failed"] == 0 else EXIT_VERIFY_FAILED


def _error_payload(exc: QMSError) -> str:
    return json.dumps({"error": {"type": exc.kind, "message": str(exc)}})


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    try:
        config = config_from_args(args)
        if args.command == "analyze":
            cmd_analyze(config)
        elif args.command == "sample":
            cmd_sample(config)
        elif args.command == "sweep":
            cmd_sweep(config)
        elif args.command == "curves":
            cmd_curves(config)
        else:
            return cmd_verify(config, args.inject_kernel_scale)
    except QMSError as exc:
        logger.error("%s", exc)
        sys.stderr.write(_error_payload(exc) + "\n")
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
