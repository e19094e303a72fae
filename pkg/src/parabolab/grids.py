"""Uniform tensor grids on [0,1]^d and nodal fields living on them."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class BoundaryCondition(str, Enum):
    """Supported boundary conditions.

    NEUMANN (zero normal derivative) pairs with second-order operators;
    CLAMPED (zero value and zero normal derivative) with fourth-order ones.
    """

    NEUMANN = "neumann"
    CLAMPED = "clamped"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0,1]^dim with the same node count per axis.

    Nodes include both endpoints, so the spacing is 1/(nodes_per_axis - 1).
    """

    dim: int
    nodes_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.nodes_per_axis < 8:
            raise ValueError(f"nodes_per_axis must be >= 8, got {self.nodes_per_axis}")

    @property
    def h(self) -> float:
        return 1.0 / (self.nodes_per_axis - 1)

    @property
    def shape(self) -> tuple:
        return (self.nodes_per_axis,) * self.dim

    @property
    def n_nodes(self) -> int:
        return self.nodes_per_axis ** self.dim

    def axis_coords(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nodes_per_axis)

    def coords(self) -> list:
        """Meshgrid coordinate arrays, one per axis, each of shape ``self.shape``."""
        x = self.axis_coords()
        if self.dim == 1:
            return [x]
        return list(np.meshgrid(x, x, indexing="ij"))

    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights of the trapezoid rule, shape ``self.shape``.

        These define the discrete L2 pairing in which the mirrored Neumann
        Laplacian is symmetric.
        """
        w1 = np.full(self.nodes_per_axis, self.h)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        if self.dim == 1:
            return w1
        return np.outer(w1, w1)

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            mask[1:-1] = True
        else:
            mask[1:-1, 1:-1] = True
        return mask


class GridFunction:
    """Nodal field on a Grid; values have shape ``grid.shape + (ncomp,)``."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape[: grid.dim] != grid.shape or values.ndim != grid.dim + 1:
            raise ValueError(
                f"values shape {values.shape} does not match grid shape {grid.shape} + (ncomp,)"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction values must be finite")
        self.grid = grid
        self.values = values

    @classmethod
    def from_scalar(cls, grid: Grid, values) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        return cls(grid, values[..., np.newaxis])

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int = 1) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape + (ncomp,)))

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]

    @property
    def scalar(self) -> np.ndarray:
        if self.ncomp != 1:
            raise ValueError(f"field has {self.ncomp} components, not scalar")
        return self.values[..., 0]

    def component(self, i: int) -> np.ndarray:
        return self.values[..., i]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def _binop(self, other, op):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grids do not match")
            return GridFunction(self.grid, op(self.values, other.values))
        return GridFunction(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return (
            f"GridFunction(dim={self.grid.dim}, nodes={self.grid.nodes_per_axis}, "
            f"ncomp={self.ncomp})"
        )
