"""Uniform 2-D grids and two-component fields sampled on them."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import GridMismatch


@dataclass(frozen=True)
class Grid2:
    """Nodes x0 + i*h, y0 + j*h for 0 <= i < nx, 0 <= j < ny (ij indexing)."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")

    @classmethod
    def covering(cls, half_width: float, h: float, pad: int = 0) -> "Grid2":
        """Symmetric grid over [-half_width, half_width]^2 plus ``pad`` extra layers."""
        k = int(math.ceil(half_width / h - 1e-9)) + pad
        return cls(-k * h, -k * h, h, 2 * k + 1, 2 * k + 1)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.y0 + self.h * np.arange(self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def same_as(self, other: "Grid2") -> bool:
        return (self.nx, self.ny) == (other.nx, other.ny) and np.allclose(
            (self.x0, self.y0, self.h), (other.x0, other.y0, other.h), rtol=0, atol=1e-12)


@dataclass(frozen=True)
class VectorField2:
    grid: Grid2
    values: np.ndarray  # (nx, ny, 2)
    t: float | None = None
    boundary: np.ndarray | None = field(default=None, repr=False)  # True on Dirichlet nodes

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.ny, 2):
            raise GridMismatch(f"values of shape {v.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def sample(self, pts) -> np.ndarray:
        """Bilinear interpolation; points outside the grid are clamped to it."""
        pts = np.asarray(pts, dtype=float)
        g = self.grid
        flat = pts.reshape(-1, 2).copy()
        flat[:, 0] = np.clip(flat[:, 0], g.xs[0], g.xs[-1])
        flat[:, 1] = np.clip(flat[:, 1], g.ys[0], g.ys[-1])
        interp = RegularGridInterpolator((g.xs, g.ys), self.values, method="linear")
        return interp(flat).reshape(pts.shape[:-1] + (2,))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "ux", "uy"])
        for i in range(self.grid.nx):
            for j in range(self.grid.ny):
                ux, uy = self.values[i, j]
                w.writerow([i, j, repr(float(ux)), repr(float(uy))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid: Grid2, t: float | None = None) -> "VectorField2":
        vals = np.zeros((grid.nx, grid.ny, 2))
        rows = csv.reader(io.StringIO(text))
        next(rows)
        for i, j, ux, uy in rows:
            vals[int(i), int(j)] = float(ux), float(uy)
        return cls(grid, vals, t)


def laplacian(u: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian on interior nodes; boundary rows/cols are left at zero."""
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / (h * h)
    return out
