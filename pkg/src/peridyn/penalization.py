"""Fictitious-domain volume penalization.

The physical domain ``V`` is embedded in a larger periodic box
``Omega = V + frame`` obtained by adding ``mu * (b - a)`` per side at the
same grid spacing. A stiff relaxation term supported on the frame drags the
solution there toward a constraint value ``g``, so the periodic wraparound
of the spectral method never touches ``V`` (the CLI warns when the frame is
thinner than the kernel horizon).

The penalization term itself is not pinned down by the sources this module
follows; the default here is a displacement relaxation added to the
acceleration,

    a += -(mask / epsilon) * (u - g),

which the implicit integrator treats implicitly (it is linear in the new
displacement). A velocity-damping variant ``-(mask / epsilon) * v`` is
exposed behind ``variant="velocity"`` for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ValidationError
from .grid import Field, Grid2D

VARIANTS = ("displacement", "velocity")


@dataclass(frozen=True)
class PenalizationConfig:
    """Mask plus penalization parameters, bound to the extended grid."""

    mask: Field
    epsilon: float
    constraint_value: float = 0.0
    variant: str = "displacement"
    extension_factor: float = 0.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValidationError(f"penalization factor must be positive, got {self.epsilon}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown penalization variant {self.variant!r}")
        vals = self.mask.values
        if not np.all((vals == 0.0) | (vals == 1.0)):
            raise ValidationError("mask values must be exactly 0 or 1")

    @property
    def grid(self) -> Grid2D:
        return self.mask.grid


def extension_cells(grid: Grid2D, mu: float) -> int:
    """Number of grid cells added per side by an extension factor ``mu``."""
    if not mu > 0:
        raise ValidationError(f"extension factor must be positive, got {mu}")
    width = mu * grid.period
    cells = width / grid.dx
    n = int(round(cells))
    if n < 1 or abs(cells - n) > 1e-9 * max(1.0, abs(cells)):
        raise ValidationError(
            f"extension width {width} is not a positive integer multiple of dx={grid.dx}"
        )
    return n


def extend_domain(grid: Grid2D, mu: float) -> tuple[Grid2D, Field]:
    """Extend ``[a, b]^2`` to the fictitious box and build the frame mask.

    Returns the extended grid (same spacing, ``mu * (b - a)`` added per
    side) and the indicator field of the added frame: 1 on the frame, 0 on
    the points of the original domain.
    """
    k = extension_cells(grid, mu)
    a = grid.a - k * grid.dx
    b = grid.b + k * grid.dx
    ext = Grid2D(a, b, grid.n_points + 2 * k)
    if abs(ext.dx - grid.dx) > 1e-12 * grid.dx:
        raise ValidationError("extended grid spacing drifted from the physical spacing")
    mask = np.ones((ext.n_points, ext.n_points))
    mask[k : k + grid.n_points, k : k + grid.n_points] = 0.0
    return ext, Field(ext, mask)


def interior_window(original: Grid2D, extended: Grid2D) -> slice:
    """Index slice of the extended grid that covers the original points."""
    k = int(round((original.a - extended.a) / extended.dx))
    if k < 0 or k + original.n_points > extended.n_points:
        raise ValidationError("original grid does not embed in the extended grid")
    return slice(k, k + original.n_points)


def restrict_to_interior(u: Field, original: Grid2D) -> Field:
    """Pull a field on the extended grid back to the original domain points."""
    w = interior_window(original, u.grid)
    return Field(original, u.values[w, w].copy())


def penalized_rhs(u: Field, base_rhs: Field, pcfg: PenalizationConfig) -> Field:
    """Add the displacement penalization term to a right-hand side.

    Returns ``base_rhs - (mask / epsilon) * (u - g)``; unchanged wherever
    the mask vanishes, in particular on the whole physical domain.
    """
    if u.grid != pcfg.grid or base_rhs.grid != pcfg.grid:
        raise GridMismatchError("fields and penalization mask live on different grids")
    term = (pcfg.mask.values / pcfg.epsilon) * (u.values - pcfg.constraint_value)
    return Field(u.grid, base_rhs.values - term)
