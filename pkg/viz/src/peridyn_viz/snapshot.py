"""Parser for the PDFLD1 field snapshot format.

Layout (little-endian): magic ``PDFLD1``, ``int64 N``, ``float64 a``,
``float64 b``, ``float64 time``, then ``N*N float64`` values in row-major
order (row index walks the first axis x1). This module deliberately
reimplements the format from its documentation; it never imports the
solver package.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"PDFLD1"
_HEADER = struct.Struct("<6sqddd")


class SnapshotError(ValueError):
    """Raised when a file does not conform to the PDFLD1 layout."""


@dataclass(frozen=True)
class Snapshot:
    """A parsed field snapshot: grid bounds, sample time and values."""

    n: int
    a: float
    b: float
    time: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.n, self.n):
            raise SnapshotError(
                f"value count {self.values.size} inconsistent with N={self.n}"
            )
        if not self.b > self.a:
            raise SnapshotError(f"bad bounds: a={self.a}, b={self.b}")

    def axis_points(self) -> np.ndarray:
        dx = (self.b - self.a) / self.n
        return self.a + np.arange(self.n) * dx


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise SnapshotError(f"{path}: truncated header")
        magic, n, a, b, time = _HEADER.unpack(head)
        if magic != MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if n <= 0:
            raise SnapshotError(f"{path}: nonpositive grid size {n}")
        payload = fh.read(8 * n * n)
        if len(payload) != 8 * n * n:
            raise SnapshotError(f"{path}: expected {n * n} float64 values")
        extra = fh.read(1)
        if extra:
            raise SnapshotError(f"{path}: trailing bytes after the value block")
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n)
    return Snapshot(n, a, b, time, values)


def read_convergence_csv(path) -> list[tuple[float, float, float | None]]:
    """Parse a ``resolution,error,rate`` table; the rate may be empty."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "resolution,error,rate":
            raise SnapshotError(f"{path}: unexpected header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise SnapshotError(f"{path}:{line_no}: expected 3 columns")
            try:
                res = float(parts[0])
                err = float(parts[1])
                rate = float(parts[2]) if parts[2] else None
            except ValueError as exc:
                raise SnapshotError(f"{path}:{line_no}: {exc}") from None
            rows.append((res, err, rate))
    if not rows:
        raise SnapshotError(f"{path}: no data rows")
    return rows
