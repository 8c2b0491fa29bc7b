#!/usr/bin/env python3
"""Compliance maps with and without the stop-limit preload.

Writes two CSV lattices (x, y, c_max, c_min, flag) over the workspace
square: the plain manipulator and the stop-limit case (angular stiffness
0.5, activation angle pi/12), whose compliance drops only near the corner
that engages the stop.

Usage:
    python scripts/map_preload_comparison.py [--grid 15] [--threads 4] [--out-dir results]
"""

import argparse
import math
import sys
from pathlib import Path

from kinetostat import OrthoglideSpec, SpringLaw, compliance_map


def write_csv(path, grid):
    with path.open("w", newline="") as fh:
        fh.write("x,y,c_max,c_min,flag\n")
        for ix, x in enumerate(grid.xs):
            for iy, y in enumerate(grid.ys):
                flag = "ok" if grid.ok[ix, iy] else "failed"
                fh.write(
                    f"{x:.17g},{y:.17g},{grid.c_max[ix, iy]:.17g},{grid.c_min[ix, iy]:.17g},{flag}\n"
                )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=15)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = OrthoglideSpec()
    cases = {
        "map_no_preload.csv": None,
        "map_stop_limit.csv": SpringLaw(0.5, math.pi / 12.0, "positive_part"),
    }
    for name, spring in cases.items():
        grid = compliance_map(spec, spring, args.grid, threads=args.threads)
        path = out_dir / name
        write_csv(path, grid)
        print(f"{name}: {int(grid.ok.sum())}/{grid.ok.size} cells solved -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
