"""Measurement kernels and the density/current transform they induce."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from src.errors import KernelError, ValidationError
from src.models.quantum_state import ProbabilityFields
from src.numerics.calculus import convolve, integrate, kernel_width, riemann_sum
from src.numerics.grid import Grid, GridFunction

logger = logging.getLogger(__name__)

KERNEL_NORMALIZATION_TOLERANCE = 1e-6
RENORMALIZATION_THRESHOLD = 1e-9
# Gaussian kernels are sampled out to this many widths (capped by the grid span).
KERNEL_SPAN_WIDTHS = 12.0
# Gaussian widths below this fraction of dx are treated as the ideal (delta) kernel.
IDEAL_WIDTH_FRACTION = 0.5

IDEAL = "ideal"
GAUSSIAN = "gaussian"
TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A stationary device kernel: ideal (delta), gaussian(width) or tabulated."""

    kind: str = IDEAL
    width: float = 0.0
    table: Optional[GridFunction] = None

    def __post_init__(self):
        if self.kind not in (IDEAL, GAUSSIAN, TABULATED):
            raise ValidationError(f"unknown kernel kind '{self.kind}'")
        if self.kind == GAUSSIAN and not self.width > 0:
            raise ValidationError(f"gaussian kernel width must be positive, got {self.width}")
        if self.kind == TABULATED and self.table is None:
            raise ValidationError("tabulated kernel needs a sampled table")

    @classmethod
    def ideal(cls) -> "KernelSpec":
        return cls(IDEAL)

    @classmethod
    def gaussian(cls, width: float) -> "KernelSpec":
        """Gaussian kernel; a zero width is the ideal kernel."""
        if width == 0:
            return cls(IDEAL)
        return cls(GAUSSIAN, width=float(width))

    @classmethod
    def tabulated(cls, table: GridFunction) -> "KernelSpec":
        return cls(TABULATED, table=table)

    def is_ideal(self, grid: Grid) -> bool:
        if self.kind == IDEAL:
            return True
        return self.kind == GAUSSIAN and self.width < IDEAL_WIDTH_FRACTION * grid.dx

    def effective_width(self) -> float:
        if self.kind == GAUSSIAN:
            return self.width
        if self.kind == TABULATED:
            return kernel_width(self.table)
        return 0.0

    def describe(self) -> str:
        if self.kind == GAUSSIAN:
            return f"gaussian(width={self.width:g})"
        if self.kind == TABULATED:
            return f"tabulated({self.table.grid.n_points} samples)"
        return IDEAL

    def sample(self, grid: Grid, span_widths: float = KERNEL_SPAN_WIDTHS) -> GridFunction:
        """
        Kernel values on an offset grid sharing the spacing of `grid`.

        Args:
            grid: Simulation grid whose spacing the kernel must match
            span_widths: Gaussian half-span in units of the width

        Returns:
            GridFunction on the offset grid
        """
        if self.kind == TABULATED:
            return self.table
        if self.is_ideal(grid):
            offsets = Grid.offsets(grid.dx, 0)
            values = np.zeros(offsets.n_points)
            values[offsets.n_points // 2] = 1.0 / grid.dx
            return GridFunction(offsets, values)
        half_cells = int(np.ceil(span_widths * self.width / grid.dx))
        offsets = Grid.offsets(grid.dx, min(half_cells, grid.n_points - 1))
        values = norm.pdf(offsets.x, scale=self.width)
        # discrete mass exactly 1 so that the convolution sum conserves probability
        values = values / (values.sum() * grid.dx)
        return GridFunction(offsets, values)


@dataclass(frozen=True)
class MeasurementSpec:
    """Density kernel G (width sigma) and current kernel Lambda (width lambda)."""

    density_kernel: KernelSpec = field(default_factory=KernelSpec.ideal)
    current_kernel: KernelSpec = field(default_factory=KernelSpec.ideal)

    @classmethod
    def gaussian(cls, sigma: float, lambda_: float) -> "MeasurementSpec":
        return cls(KernelSpec.gaussian(sigma), KernelSpec.gaussian(lambda_))


@dataclass(frozen=True)
class KernelReport:
    """Outcome of validate_kernel."""

    kind: str
    integral: float
    nonnegative: bool
    width: float
    passed: bool
    messages: Tuple[str, ...] = ()


def validate_kernel(kernel: KernelSpec, grid: Grid, span_widths: float = 10.0) -> KernelReport:
    """
    Check a kernel's normalization, sign and support width.

    Never raises for a bad kernel: a failed report carries the reason.

    Args:
        kernel: Kernel to check
        grid: Simulation grid supplying the sample spacing
        span_widths: Gaussian half-span used when sampling

    Returns:
        KernelReport
    """
    if kernel.kind == IDEAL:
        return KernelReport(IDEAL, 1.0, True, 0.0, True)

    messages: List[str] = []
    if kernel.kind == TABULATED and not kernel.table.grid.same_spacing(grid):
        messages.append(
            f"spacing mismatch: kernel dx={kernel.table.grid.dx:g}, grid dx={grid.dx:g}"
        )
        return KernelReport(kernel.kind, riemann_sum(kernel.table), True, 0.0, False, tuple(messages))

    if kernel.is_ideal(grid):
        return KernelReport(kernel.kind, 1.0, True, 0.0, True)

    sampled = kernel.sample(grid, span_widths)
    integral = riemann_sum(sampled)
    if kernel.kind == GAUSSIAN:
        # sample() rescales to unit discrete mass; report the continuous mass it covers
        half_span = sampled.grid.x_max
        integral = float(1.0 - 2.0 * norm.sf(half_span / kernel.width))
        if half_span < span_widths * kernel.width - grid.dx:
            messages.append(
                f"kernel truncated by the grid at {half_span / kernel.width:.3g} widths "
                f"(half-span {half_span:.4g})"
            )
    nonnegative = bool(np.all(sampled.values >= 0))
    passed = abs(integral - 1.0) <= KERNEL_NORMALIZATION_TOLERANCE
    if not passed:
        messages.append(f"normalization violated: kernel integrates to {integral:.9f}")
    if not nonnegative:
        messages.append("kernel takes negative values")
    return KernelReport(
        kernel.kind, integral, nonnegative, kernel_width(sampled), passed, tuple(messages)
    )


def _apply_kernel(
    values: GridFunction,
    kernel: KernelSpec,
    name: str,
    notes: List[str],
) -> GridFunction:
    if kernel.is_ideal(values.grid):
        return values
    report = validate_kernel(kernel, values.grid)
    if not report.passed:
        raise KernelError(f"{name} kernel rejected: " + "; ".join(report.messages))
    if not report.nonnegative:
        note = f"{name} kernel takes negative values"
        logger.warning(note)
        notes.append(note)
    result = convolve(values, kernel.sample(values.grid))
    if result.flagged:
        notes.append(
            f"{name}: {result.boundary_mass:.2e} of the mass lies within one kernel "
            "width of the grid edge"
        )
    return result.field


def transform(fields: ProbabilityFields, spec: MeasurementSpec) -> ProbabilityFields:
    """
    Map intrinsic fields to prognosticated-record fields.

    rho_PR = G * rho_IN and J_PR = Lambda * J_IN (stationary convolutions).

    Args:
        fields: Intrinsic density and current
        spec: Density and current kernels

    Returns:
        Recorded-reading ProbabilityFields; warnings carry the input warnings
        followed by any renormalization or boundary-mass flags
    """
    notes: List[str] = []
    density = _apply_kernel(fields.density, spec.density_kernel, "density", notes)
    current = _apply_kernel(fields.current, spec.current_kernel, "current", notes)

    if density is not fields.density:
        rho = density.values
        if np.any(rho < 0):
            notes.append(
                f"negative recorded density clipped (min {rho.min():.2e})"
            )
            rho = np.clip(rho, 0.0, None)
        drift = integrate(GridFunction(density.grid, rho)) - integrate(fields.density)
        if abs(drift) > RENORMALIZATION_THRESHOLD:
            note = f"recorded density renormalized (drift {drift:.2e})"
            logger.warning(note)
            notes.append(note)
            rho = rho * (integrate(fields.density) / integrate(GridFunction(density.grid, rho)))
        density = GridFunction(density.grid, rho)

    return ProbabilityFields(density, current, fields.constants, fields.warnings + tuple(notes))
