"""Periodic 2D collocation grid, scalar fields and discrete norms.

Conventions
-----------
The square domain ``[a, b] x [a, b]`` is sampled at ``n_points`` equispaced
points per axis, ``x_i = a + i*dx`` with ``dx = (b - a) / n_points`` and the
right endpoint excluded (``x_N`` coincides with ``x_0`` by periodicity).
With this layout the plain DFT diagonalizes circular convolution exactly and
no endpoint weights are needed.

Field values are stored as an ``(N, N)`` float64 array; the row index walks
the first axis ``x1``, the column index the second axis ``x2``.

The relative L2 error is the ratio of squared sums, without a square root,
exactly as the quantity printed in convergence tables; a square-rooted
variant is exposed separately for diagnostics.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatchError,
    NonFiniteFieldError,
    SnapshotFormatError,
    ValidationError,
)

SNAPSHOT_MAGIC = b"PDFLD1"


@dataclass(frozen=True)
class Grid2D:
    """Periodic square collocation grid.

    Parameters
    ----------
    a, b : float
        Domain bounds, ``b > a``.
    n_points : int
        Points per axis, ``>= 4``. Even values are the common case; odd
        values are accepted so that resolution ladders like ``dx = 0.2`` on
        the unit square remain expressible.
    """

    a: float
    b: float
    n_points: int
    dx: float = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValidationError(f"invalid domain: b={self.b} must exceed a={self.a}")
        if int(self.n_points) != self.n_points or self.n_points < 4:
            raise ValidationError(
                f"invalid resolution: n_points={self.n_points} must be an integer >= 4"
            )
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "dx", (self.b - self.a) / self.n_points)

    @property
    def period(self) -> float:
        return self.b - self.a

    def axis_points(self) -> np.ndarray:
        """Collocation coordinates along one axis, right endpoint excluded."""
        return self.a + np.arange(self.n_points) * self.dx

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X1, X2) coordinate arrays with ij indexing (rows follow x1)."""
        x = self.axis_points()
        return np.meshgrid(x, x, indexing="ij")

    def offset_coordinates(self) -> np.ndarray:
        """Signed minimal-image offset for each index along one axis.

        Index ``j`` holds ``j*dx`` for ``j <= N//2`` and ``(j - N)*dx``
        beyond, so index 0 is the zero offset and the array is even under
        ``j -> (-j) mod N``.
        """
        j = np.arange(self.n_points)
        return np.where(j <= self.n_points // 2, j, j - self.n_points) * self.dx

    def periodic_distance(self, x, y):
        """Axis-wise periodic distance, in ``[0, (b - a) / 2]``."""
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % self.period
        return np.minimum(d, self.period - d)


@dataclass(frozen=True)
class Field:
    """Real scalar samples on a :class:`Grid2D`.

    The value array is adopted (not copied) and marked read-only; fields are
    immutable values after construction. Construction rejects non-finite
    values so NaN/Inf cannot propagate silently through the library.
    """

    grid: Grid2D
    values: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        n = self.grid.n_points
        if v.shape != (n, n):
            raise ValidationError(f"field shape {v.shape} does not match grid ({n}, {n})")
        if not np.all(np.isfinite(v)):
            raise NonFiniteFieldError("field contains NaN or Inf values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # -- small algebra so integrator code reads like the update formulas --

    def _compat(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")

    def __add__(self, other: "Field") -> "Field":
        self._compat(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._compat(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, other) -> "Field":
        if isinstance(other, Field):
            self._compat(other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


def build_grid(a: float, b: float, n_points: int) -> Grid2D:
    """Construct a periodic grid; see :class:`Grid2D` for the conventions."""
    return Grid2D(float(a), float(b), n_points)


def constant_field(grid: Grid2D, value: float) -> Field:
    return Field(grid, np.full((grid.n_points, grid.n_points), float(value)))


def field_from_function(grid: Grid2D, fn) -> Field:
    """Sample ``fn(x1, x2)`` (vectorized) at the collocation points."""
    x1, x2 = grid.meshgrid()
    return Field(grid, np.asarray(fn(x1, x2), dtype=np.float64))


def inner_product(u: Field, v: Field) -> float:
    """Quadrature-weighted L2 inner product ``dx^2 * sum(u v)``."""
    u._compat(v)
    return float(u.grid.dx**2 * np.dot(u.values.ravel(), v.values.ravel()))


def l2_norm(u: Field) -> float:
    """Quadrature-weighted norm ``sqrt(dx^2 * sum(u^2))``."""
    return float(np.sqrt(u.grid.dx**2 * np.sum(u.values * u.values)))


def max_norm(u: Field) -> float:
    return float(np.max(np.abs(u.values)))


def relative_l2_error(u: Field, u_ref: Field) -> float:
    """Relative squared-L2 deviation, as printed in the error tables.

    Returns ``sum (u - u_ref)^2 / sum u^2`` with no square root; the
    denominator is the *first* argument (the numerical solution). The grid
    weight ``dx^2`` cancels in the ratio.
    """
    u._compat(u_ref)
    denom = float(np.sum(u.values * u.values))
    if denom == 0.0:
        raise ValidationError("zero denominator: u is identically zero")
    diff = u.values - u_ref.values
    out = float(np.sum(diff * diff) / denom)
    if not np.isfinite(out):
        # squaring huge-but-finite fields can overflow to inf/inf
        raise NonFiniteFieldError("relative error overflowed")
    return out


def relative_l2_error_sqrt(u: Field, u_ref: Field) -> float:
    """Square-rooted variant of :func:`relative_l2_error`, for diagnostics."""
    return float(np.sqrt(relative_l2_error(u, u_ref)))


def total_variation(u: Field) -> float:
    """Discrete periodic total variation ``dx * sum |forward differences|``."""
    v = u.values
    d1 = np.abs(np.roll(v, -1, axis=0) - v)
    d2 = np.abs(np.roll(v, -1, axis=1) - v)
    return float(u.grid.dx * (d1.sum() + d2.sum()))


# -- snapshot file format (consumed by the viz component) --------------------
#
# binary, little-endian: magic "PDFLD1", int64 N, float64 a, float64 b,
# float64 time, then N*N float64 values in row-major order.

_HEADER = struct.Struct("<6sqddd")


def write_snapshot(path, u: Field, time: float) -> None:
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, g.n_points, g.a, g.b, float(time)))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[Field, float]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise SnapshotFormatError(f"{path}: truncated header")
        magic, n, a, b, time = _HEADER.unpack(head)
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
        data = fh.read(8 * n * n)
        if len(data) != 8 * n * n:
            raise SnapshotFormatError(f"{path}: expected {n * n} float64 values")
    values = np.frombuffer(data, dtype="<f8").reshape(n, n).astype(np.float64)
    return Field(Grid2D(a, b, n), values), time


def write_csv(path, u: Field) -> None:
    """Export ``x1,x2,u`` rows with 17 significant digits."""
    x1, x2 = u.grid.meshgrid()
    with open(path, "w") as fh:
        fh.write("x1,x2,u\n")
        for a, b, c in zip(x1.ravel(), x2.ravel(), u.values.ravel()):
            fh.write(f"{a:.17g},{b:.17g},{c:.17g}\n")
