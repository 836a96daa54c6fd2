"""``peridyn-viz``: batch renderer for snapshot files and tables."""

from __future__ import annotations

import argparse
import sys

from .render import RenderOptions, render_convergence, render_snapshot
from .snapshot import SnapshotError, read_convergence_csv, read_snapshot


def _options(args) -> RenderOptions:
    return RenderOptions(
        colormap=args.cmap,
        vmin=args.vmin,
        vmax=args.vmax,
        surface=getattr(args, "surface", False),
        width=args.width,
        height=args.height,
        dpi=args.dpi,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peridyn-viz", description="render peridyn snapshots and convergence tables"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--output", required=True, help="output PNG path")
        p.add_argument("--cmap", default="viridis")
        p.add_argument("--vmin", type=float, default=None)
        p.add_argument("--vmax", type=float, default=None)
        p.add_argument("--width", type=int, default=800, help="pixels")
        p.add_argument("--height", type=int, default=600, help="pixels")
        p.add_argument("--dpi", type=int, default=100)

    p_snap = sub.add_parser("snapshot", help="render a .pdfld field file")
    p_snap.add_argument("file")
    p_snap.add_argument("--surface", action="store_true", help="3D surface instead of heatmap")
    common(p_snap)

    p_conv = sub.add_parser("convergence", help="render a resolution,error,rate CSV")
    p_conv.add_argument("file")
    common(p_conv)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "snapshot":
            snap = read_snapshot(args.file)
            render_snapshot(snap, args.output, _options(args))
        else:
            rows = read_convergence_csv(args.file)
            render_convergence(rows, args.output, _options(args))
    except SnapshotError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
