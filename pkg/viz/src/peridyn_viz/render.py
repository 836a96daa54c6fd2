"""Heatmap / surface rendering of snapshots and log-log convergence plots."""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .snapshot import Snapshot


@dataclass(frozen=True)
class RenderOptions:
    """Colormap, optional fixed value range, style and pixel geometry."""

    colormap: str = "viridis"
    vmin: float | None = None
    vmax: float | None = None
    surface: bool = False
    width: int = 800
    height: int = 600
    dpi: int = 100


def _figure(options: RenderOptions):
    return plt.figure(
        figsize=(options.width / options.dpi, options.height / options.dpi),
        dpi=options.dpi,
    )


def render_snapshot(snap: Snapshot, out_path, options: RenderOptions = RenderOptions()) -> None:
    """Write a PNG of the field; x1 runs horizontally, x2 vertically."""
    fig = _figure(options)
    try:
        if options.surface:
            ax = fig.add_subplot(projection="3d")
            x = snap.axis_points()
            x1, x2 = np.meshgrid(x, x, indexing="ij")
            ax.plot_surface(
                x1,
                x2,
                snap.values,
                cmap=options.colormap,
                vmin=options.vmin,
                vmax=options.vmax,
                linewidth=0,
                antialiased=True,
            )
            ax.set_zlabel("u")
        else:
            ax = fig.add_subplot()
            image = ax.imshow(
                snap.values.T,
                origin="lower",
                extent=(snap.a, snap.b, snap.a, snap.b),
                cmap=options.colormap,
                vmin=options.vmin,
                vmax=options.vmax,
                interpolation="nearest",
            )
            fig.colorbar(image, ax=ax, label="u")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_title(f"t = {snap.time:g}")
        fig.savefig(out_path, dpi=options.dpi)
    finally:
        plt.close(fig)


def render_convergence(rows, out_path, options: RenderOptions = RenderOptions()) -> None:
    """Log-log error-vs-resolution plot with a slope-2 guide line.

    The guide is anchored at the first data point; a single-row table gets
    a lone marker and no guide.
    """
    res = np.array([r[0] for r in rows], dtype=float)
    err = np.array([r[1] for r in rows], dtype=float)
    fig = _figure(options)
    try:
        ax = fig.add_subplot()
        ax.loglog(res, err, "o-", label="measured error")
        if len(rows) > 1:
            guide = err[0] * (res / res[0]) ** 2
            ax.loglog(res, guide, "k--", label="slope 2")
            ax.legend()
        ax.set_xlabel("resolution")
        ax.set_ylabel("relative L2 error")
        ax.grid(True, which="both", alpha=0.3)
        fig.savefig(out_path, dpi=options.dpi)
    finally:
        plt.close(fig)
