"""Flat-file inputs: tabulated kernels and recorded sample sets."""
import logging
import re
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import ValidationError
from src.models.measurement import KernelSpec
from src.models.monte_carlo import SampleSet
from src.numerics.grid import Grid, GridFunction

logger = logging.getLogger(__name__)

KERNEL_COLUMNS = ["offset", "value"]
SPACING_TOLERANCE = 1e-9
SAMPLE_HEADER = re.compile(r"^#\s*label=(?P<label>\S+)\s+seed=(?P<seed>\S+)\s*$")


class KernelTable:
    """Loader for device kernels tabulated as two-column CSV (offset, value)."""

    def __init__(self, path):
        """Initialize with the CSV path."""
        self.path = Path(path)

    def _read(self) -> pd.DataFrame:
        if not self.path.is_file():
            raise ValidationError(f"kernel table not found: {self.path}")
        df = pd.read_csv(self.path, comment="#")
        missing = [col for col in KERNEL_COLUMNS if col not in df.columns]
        if missing:
            raise ValidationError(
                f"kernel table {self.path} lacks columns {missing}; expected {KERNEL_COLUMNS}"
            )
        df = df[KERNEL_COLUMNS].astype(float).sort_values("offset").reset_index(drop=True)
        if len(df) < 8:
            raise ValidationError(f"kernel table {self.path} needs at least 8 rows")
        return df

    def load(self, grid: Optional[Grid] = None) -> KernelSpec:
        """
        Read the table into a tabulated KernelSpec.

        Args:
            grid: Simulation grid the offsets must share spacing with, if known

        Returns:
            KernelSpec of kind "tabulated"
        """
        df = self._read()
        offsets = df["offset"].to_numpy()
        steps = np.diff(offsets)
        dx = float(steps.mean())
        if np.max(np.abs(steps - dx)) > SPACING_TOLERANCE * max(1.0, abs(dx)):
            raise ValidationError(f"kernel table {self.path} offsets are not uniformly spaced")
        table_grid = Grid(x_min=float(offsets[0]), dx=dx, n_points=len(offsets))
        if grid is not None and not table_grid.same_spacing(grid):
            raise ValidationError(
                f"kernel table spacing {dx:g} does not match grid spacing {grid.dx:g}"
            )
        logger.info("Loaded tabulated kernel %s (%d samples)", self.path, len(offsets))
        return KernelSpec.tabulated(GridFunction(table_grid, df["value"].to_numpy()))


def save_kernel_table(kernel: GridFunction, path) -> Path:
    """Write a sampled kernel as offset,value CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({"offset": kernel.grid.x, "value": kernel.values})
    df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def save_samples(samples: SampleSet, path) -> Path:
    """
    Write a SampleSet as a single-column CSV.

    The first line carries `# label=<label> seed=<seed>`, followed by the
    column header `value`.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seed = "none" if samples.seed is None else str(samples.seed)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# label={samples.label} seed={seed}\n")
        pd.DataFrame({"value": samples.values}).to_csv(
            f, index=False, float_format="%.17g", lineterminator="\n"
        )
    return path


def load_samples(path) -> SampleSet:
    """Read a SampleSet written by save_samples."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"sample file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    match = SAMPLE_HEADER.match(first)
    if match is None:
        raise ValidationError(f"{path} lacks the '# label=... seed=...' header line")
    seed = match.group("seed")
    df = pd.read_csv(path, skiprows=1)
    if "value" not in df.columns:
        raise ValidationError(f"{path} lacks the 'value' column")
    return SampleSet(
        match.group("label"),
        df["value"].to_numpy(dtype=float),
        None if seed == "none" else int(seed),
    )
