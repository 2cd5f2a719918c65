"""Uniform 1-D sample domains and the fields sampled on them."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from src.errors import ValidationError

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform grid x(i) = x_min + i*dx, i = 0..n_points-1."""

    x_min: float
    dx: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.x_min) or not np.isfinite(self.dx):
            raise ValidationError("grid origin and spacing must be finite")
        if self.dx <= 0:
            raise ValidationError(f"grid spacing must be positive, got {self.dx}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise ValidationError(
                f"grid needs an integer n_points >= {MIN_POINTS}, got {self.n_points}"
            )

    @classmethod
    def centered(cls, center: float, half_span: float, n_points: int = 4096) -> "Grid":
        """Grid covering [center - half_span, center + half_span] end to end."""
        if half_span <= 0:
            raise ValidationError(f"half span must be positive, got {half_span}")
        dx = 2.0 * half_span / (n_points - 1)
        return cls(x_min=center - half_span, dx=dx, n_points=n_points)

    @classmethod
    def offsets(cls, dx: float, half_cells: int) -> "Grid":
        """Symmetric offset grid -half_cells*dx .. +half_cells*dx used for kernels."""
        half_cells = max(int(half_cells), MIN_POINTS // 2)
        return cls(x_min=-half_cells * dx, dx=dx, n_points=2 * half_cells + 1)

    @cached_property
    def x(self) -> np.ndarray:
        points = self.x_min + self.dx * np.arange(self.n_points)
        points.setflags(write=False)
        return points

    @property
    def x_max(self) -> float:
        return self.x_min + self.dx * (self.n_points - 1)

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    def same_spacing(self, other: "Grid", rtol: float = 1e-9) -> bool:
        return abs(self.dx - other.dx) <= rtol * max(self.dx, other.dx)

    def lattice_offset(self) -> int:
        """Index of x_min on the lattice of multiples of dx (offset grids only)."""
        cells = self.x_min / self.dx
        index = int(round(cells))
        if abs(cells - index) > 1e-6:
            raise ValidationError(
                "offset grid is not aligned with multiples of its spacing "
                f"(x_min/dx = {cells:.6f})"
            )
        return index

    def sample(self, curve: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(self, curve(self.x))


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real-valued field sampled on a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    _dtype = float

    def __post_init__(self):
        values = _frozen_array(self.values, self._dtype)
        if values.ndim != 1 or values.shape[0] != self.grid.n_points:
            raise ValidationError(
                f"field has {values.size} samples, grid has {self.grid.n_points}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "GridFunction":
        return type(self)(self.grid, values)

    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: Union["GridFunction", float]):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValidationError("cannot add fields sampled on different grids")
            other = other.values
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __mul__(self, scale: float):
        return self.with_values(self.values * scale)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other


@dataclass(frozen=True, eq=False)
class ComplexGridFunction(GridFunction):
    """Complex-valued field sampled on a grid (wave functions, operator images)."""

    _dtype = complex

    @property
    def real(self) -> GridFunction:
        return GridFunction(self.grid, self.values.real)

    @property
    def imag(self) -> GridFunction:
        return GridFunction(self.grid, self.values.imag)


FieldLike = Union[GridFunction, ComplexGridFunction]
