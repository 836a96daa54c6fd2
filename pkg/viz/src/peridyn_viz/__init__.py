"""Rendering tools for peridyn snapshot files and convergence tables."""

__version__ = "0.1.0"

from .render import RenderOptions, render_convergence, render_snapshot
from .snapshot import Snapshot, SnapshotError, read_convergence_csv, read_snapshot

__all__ = [
    "__version__",
    "RenderOptions",
    "Snapshot",
    "SnapshotError",
    "read_convergence_csv",
    "read_snapshot",
    "render_convergence",
    "render_snapshot",
]
