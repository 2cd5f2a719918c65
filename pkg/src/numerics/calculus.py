"""Quadrature, finite differences and discrete convolution on uniform grids."""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from src.errors import ValidationError
from src.numerics.grid import ComplexGridFunction, FieldLike, Grid, GridFunction

logger = logging.getLogger(__name__)

# Mass (relative to the total) allowed within one kernel width of a grid edge.
BOUNDARY_MASS_TOLERANCE = 1e-9

# Five-point stencils (fourth order). Boundary rows are one-sided with the same order.
_FIRST_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FIRST_EDGE = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)
_SECOND_INTERIOR = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_SECOND_EDGE = (
    np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
    np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0,
)


def _simpson_values(values: np.ndarray, dx: float) -> float:
    """Composite Simpson; an odd interval count closes with the 3/8 rule."""
    intervals = values.size - 1
    if intervals % 2 == 0:
        return float(simpson(values, dx=dx))
    head = float(simpson(values[:-3], dx=dx))
    tail = 3.0 * dx / 8.0 * (values[-4] + 3.0 * values[-3] + 3.0 * values[-2] + values[-1])
    return head + float(tail)


def integrate(f: FieldLike) -> Union[float, complex]:
    """
    Integrate a sampled field over the full grid span.

    Exact for cubic polynomials. Complex fields integrate their real and
    imaginary parts separately and return a complex number.

    Args:
        f: Field to integrate

    Returns:
        Approximation of the integral of f dx
    """
    dx = f.grid.dx
    if np.iscomplexobj(f.values):
        return complex(
            _simpson_values(f.values.real, dx), _simpson_values(f.values.imag, dx)
        )
    return _simpson_values(f.values, dx)


def riemann_sum(f: GridFunction) -> float:
    """Discrete mass sum(f)*dx, the normalization seen by convolve."""
    return float(np.sum(f.values) * f.grid.dx)


def cumulative_integral(f: GridFunction, anchor_index: int = 0) -> GridFunction:
    """Running integral of f, shifted so that it vanishes at anchor_index."""
    running = cumulative_simpson(f.values, dx=f.grid.dx, initial=0.0)
    return GridFunction(f.grid, running - running[anchor_index])


def _apply_stencils(values: np.ndarray, interior: np.ndarray, edges, antisymmetric: bool):
    n = values.size
    out = np.empty_like(values)
    out[2:-2] = (
        interior[0] * values[:-4]
        + interior[1] * values[1:-3]
        + interior[2] * values[2:-2]
        + interior[3] * values[3:-1]
        + interior[4] * values[4:]
    )
    width = edges[0].size
    sign = -1.0 if antisymmetric else 1.0
    for row, weights in enumerate(edges):
        out[row] = np.dot(weights, values[:width])
        out[n - 1 - row] = sign * np.dot(weights, values[::-1][:width])
    return out


def derivative(f: FieldLike, order: int = 1) -> FieldLike:
    """
    Finite-difference derivative of a real or complex field.

    Args:
        f: Field to differentiate
        order: 1 or 2

    Returns:
        Field of the same kind holding d^order f / dx^order
    """
    if order not in (1, 2):
        raise ValidationError(f"derivative order must be 1 or 2, got {order}")
    dx = f.grid.dx
    if order == 1:
        values = _apply_stencils(f.values, _FIRST_INTERIOR, _FIRST_EDGE, True) / dx
    else:
        values = _apply_stencils(f.values, _SECOND_INTERIOR, _SECOND_EDGE, False) / dx**2
    return f.with_values(values)


@dataclass(frozen=True)
class ConvolutionResult:
    """Convolved field plus the boundary-mass diagnostic."""

    field: GridFunction
    boundary_mass: float
    flagged: bool


def kernel_width(kernel: GridFunction) -> float:
    """Effective width of a kernel: square root of its second central moment."""
    weights = np.abs(kernel.values)
    total = weights.sum()
    if total == 0:
        return 0.0
    mean = np.dot(weights, kernel.grid.x) / total
    return float(np.sqrt(np.dot(weights, (kernel.grid.x - mean) ** 2) / total))


def boundary_mass(f: GridFunction, width: float) -> float:
    """Fraction of the absolute mass of f lying within `width` of either grid edge."""
    weights = np.abs(f.values)
    total = weights.sum()
    if total == 0:
        return 0.0
    cells = max(1, int(np.ceil(width / f.grid.dx)))
    edge = weights[:cells].sum() + weights[-cells:].sum()
    return float(edge / total)


def convolve(f: GridFunction, kernel: GridFunction) -> ConvolutionResult:
    """
    Stationary convolution g(x_i) = sum_j K(x_i - x_j) f(x_j) dx by direct summation.

    Args:
        f: Field on the simulation grid
        kernel: Kernel sampled on an offset grid with the same spacing

    Returns:
        ConvolutionResult holding g and the boundary-mass diagnostic
    """
    if not f.grid.same_spacing(kernel.grid):
        raise ValidationError(
            f"kernel spacing {kernel.grid.dx} does not match grid spacing {f.grid.dx}"
        )
    first_offset = kernel.grid.lattice_offset()
    full = np.convolve(f.values, kernel.values)

    # full[k] pairs f_j with the kernel sample at offset (k + first_offset - j) cells
    index = np.arange(f.grid.n_points) - first_offset
    inside = (index >= 0) & (index < full.size)
    values = np.zeros(f.grid.n_points)
    values[inside] = full[index[inside]] * f.grid.dx

    mass = boundary_mass(f, kernel_width(kernel))
    flagged = mass > BOUNDARY_MASS_TOLERANCE
    if flagged:
        logger.warning(
            "Field carries %.2e of its mass within one kernel width of the grid edge",
            mass,
        )
    return ConvolutionResult(GridFunction(f.grid, values), mass, flagged)
