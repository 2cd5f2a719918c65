"""Run configuration: packaged defaults, run file, environment and flags."""
import copy
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml

from src.errors import ConfigError, QMSError
from src.models.gaussian_oracle import GaussianScenario, OscillatorScenario
from src.models.quantum_state import GaussianStateSpec, PhysicalConstants

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULTS_PATH = Path(__file__).parent.parent / "config" / "defaults.yml"
OUT_DIR_ENV = "QMS_OUT_DIR"
SWEEP_AXES = ("sigma", "lambda", "k", "n")

STATE_FLAGS = ("x0", "alpha", "k")


def load_config(config_path) -> Dict:
    """Load a YAML (or JSON) configuration file."""
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping at the top level")
    return data


def _merge(base: Dict, overlay: Mapping) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _apply_file(resolved: Dict, data: Mapping) -> Dict:
    if data.get("state") and data.get("oscillator"):
        raise ConfigError("config file gives both a state and an oscillator spec; keep one")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    resolved = _merge(resolved, data)
    if data.get("oscillator"):
        resolved["state"] = None
    elif data.get("state"):
        resolved["oscillator"] = None
    return resolved


def _apply_flags(resolved: Dict, flags: Mapping[str, Any]) -> Dict:
    """Overlay command-line values; None means the flag was not given."""
    given = {key: value for key, value in flags.items() if value is not None}
    state_given = [name for name in STATE_FLAGS if name in given]
    if "omega" in given and state_given:
        raise ConfigError(
            f"--omega selects the oscillator; it cannot be combined with "
            f"{', '.join('--' + name for name in state_given)}"
        )

    resolved = copy.deepcopy(resolved)
    if "omega" in given:
        resolved["state"] = None
        resolved["oscillator"] = {"omega": given["omega"]}
    if state_given:
        if resolved.get("oscillator"):
            raise ConfigError("state flags given while the config selects the oscillator")
        resolved["state"] = resolved.get("state") or {}
        for name in state_given:
            resolved["state"][name] = given[name]

    sections = {
        "sigma": ("measurement", "sigma"),
        "lambda": ("measurement", "lambda"),
        "hbar": ("constants", "hbar"),
        "mass": ("constants", "mass"),
        "grid_points": ("grid", "n_points"),
        "span_mult": ("grid", "span_mult"),
        "samples": ("sampling", "samples"),
        "seed": ("sampling", "seed"),
        "trials": ("sampling", "trials"),
        "trial_samples": ("sampling", "trial_samples"),
        "out": ("output", "out_dir"),
        "density_kernel": ("measurement", "density_kernel_file"),
        "current_kernel": ("measurement", "current_kernel_file"),
        "axis": ("sweep", "axis"),
        "values": ("sweep", "values"),
        "workers": ("sweep", "workers"),
    }
    for flag, (section, key) in sections.items():
        if flag in given:
            resolved.setdefault(section, {})[key] = given[flag]
    return resolved


@dataclass
class RunConfig:
    """Fully resolved settings of one run; echoed into every report."""

    constants: PhysicalConstants
    state: Optional[GaussianStateSpec] = None
    omega: Optional[float] = None
    sigma: float = 0.0
    lambda_: float = 0.0
    density_kernel_file: Optional[str] = None
    current_kernel_file: Optional[str] = None
    span_mult: float = 10.0
    n_points: int = 4096
    samples: int = 100000
    seed: int = 42
    trials: int = 100
    trial_samples: int = 10000
    sweep_axis: str = "sigma"
    sweep_values: List[float] = field(default_factory=list)
    workers: int = 4
    verify: Dict[str, Any] = field(default_factory=dict)
    out_dir: str = "outputs"

    def __post_init__(self):
        if (self.state is None) == (self.omega is None):
            raise ConfigError("exactly one of a state spec or an oscillator spec is required")
        if self.omega is not None and not self.omega > 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")
        if self.sigma < 0 or self.lambda_ < 0:
            raise ConfigError(
                f"kernel widths must be nonnegative, got sigma={self.sigma}, lambda={self.lambda_}"
            )
        if self.omega is not None and self.lambda_ != 0:
            raise ConfigError("the oscillator ground state carries no current; lambda must be 0")
        if self.n_points < 8:
            raise ConfigError(f"grid_points must be at least 8, got {self.n_points}")
        if not self.span_mult > 0:
            raise ConfigError(f"span_mult must be positive, got {self.span_mult}")
        if self.samples < 2:
            raise ConfigError(f"samples must be at least 2, got {self.samples}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.trial_samples < 2:
            raise ConfigError(f"trial_samples must be at least 2, got {self.trial_samples}")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got '{self.sweep_axis}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        for path in (self.density_kernel_file, self.current_kernel_file):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"kernel file not found: {path}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "RunConfig":
        """Build from the nested mapping layout of config/defaults.yml."""
        try:
            constants = PhysicalConstants(
                float(data["constants"]["hbar"]), float(data["constants"]["mass"])
            )
            state_data = data.get("state")
            oscillator = data.get("oscillator")
            state = None
            if state_data:
                state = GaussianStateSpec(
                    float(state_data.get("x0", 0.0)),
                    float(state_data.get("alpha", 1.0)),
                    float(state_data.get("k", 0.0)),
                )
            measurement = data.get("measurement", {})
            grid = data.get("grid", {})
            sampling = data.get("sampling", {})
            sweep = data.get("sweep", {})
            values = sweep.get("values") or []
            if isinstance(values, str):
                values = [v for v in values.split(",") if v.strip()]
            return cls(
                constants=constants,
                state=state,
                omega=float(oscillator["omega"]) if oscillator else None,
                sigma=float(measurement.get("sigma", 0.0)),
                lambda_=float(measurement.get("lambda", 0.0)),
                density_kernel_file=measurement.get("density_kernel_file"),
                current_kernel_file=measurement.get("current_kernel_file"),
                span_mult=float(grid.get("span_mult", 10.0)),
                n_points=int(grid.get("n_points", 4096)),
                samples=int(sampling.get("samples", 100000)),
                seed=int(sampling.get("seed", 42)),
                trials=int(sampling.get("trials", 100)),
                trial_samples=int(sampling.get("trial_samples", 10000)),
                sweep_axis=str(sweep.get("axis", "sigma")),
                sweep_values=[float(v) for v in values],
                workers=int(sweep.get("workers", 4)),
                verify=dict(data.get("verify") or {}),
                out_dir=str(data.get("output", {}).get("out_dir", "outputs")),
            )
        except ConfigError:
            raise
        except QMSError as exc:
            raise ConfigError(str(exc)) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration: {exc!r}") from exc

    @property
    def is_oscillator(self) -> bool:
        return self.omega is not None

    @property
    def has_tabulated_kernels(self) -> bool:
        return self.density_kernel_file is not None or self.current_kernel_file is not None

    @property
    def is_gaussian(self) -> bool:
        """True when the closed forms describe the run (no tabulated kernels)."""
        return not self.has_tabulated_kernels

    def scenario(self) -> GaussianScenario:
        if self.is_oscillator:
            return OscillatorScenario(self.omega, self.sigma, self.constants).to_gaussian()
        return GaussianScenario(
            x0=self.state.x0, alpha=self.state.alpha, k=self.state.k,
            sigma=self.sigma, lambda_=self.lambda_, constants=self.constants,
        )

    def with_changes(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Nested echo in the layout of config/defaults.yml."""
        return {
            "schema_version": SCHEMA_VERSION,
            "state": asdict(self.state) if self.state is not None else None,
            "oscillator": {"omega": self.omega} if self.is_oscillator else None,
            "measurement": {
                "sigma": self.sigma,
                "lambda": self.lambda_,
                "density_kernel_file": self.density_kernel_file,
                "current_kernel_file": self.current_kernel_file,
            },
            "constants": asdict(self.constants),
            "grid": {"span_mult": self.span_mult, "n_points": self.n_points},
            "sampling": {
                "samples": self.samples,
                "seed": self.seed,
                "trials": self.trials,
                "trial_samples": self.trial_samples,
            },
            "sweep": {
                "axis": self.sweep_axis,
                "values": list(self.sweep_values),
                "workers": self.workers,
            },
            "verify": copy.deepcopy(self.verify),
            "output": {"out_dir": self.out_dir},
        }


def resolve_config(
    config_path: Optional[str] = None,
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
    defaults_path=DEFAULTS_PATH,
) -> RunConfig:
    """
    Layer defaults < run file < QMS_OUT_DIR < flags into a RunConfig.

    Args:
        config_path: Optional JSON or YAML run file
        flags: Command-line values keyed by flag name (None = not given)
        environ: Environment mapping (defaults to os.environ)
        defaults_path: Packaged defaults file

    Returns:
        Validated RunConfig
    """
    environ = os.environ if environ is None else environ
    resolved = load_config(defaults_path)
    if config_path is not None:
        logger.info("Loading run config %s", config_path)
        resolved = _apply_file(resolved, load_config(config_path))
    if environ.get(OUT_DIR_ENV):
        resolved.setdefault("output", {})["out_dir"] = environ[OUT_DIR_ENV]
    resolved = _apply_flags(resolved, flags or {})
    return RunConfig.from_mapping(resolved)
