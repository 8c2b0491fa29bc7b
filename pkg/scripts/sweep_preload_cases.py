#!/usr/bin/env python3
"""Force-deflection sweeps from the weak workspace corner, per preload case.

Writes one CSV per preload factor (delta, |F|, F along the diagonal) plus
the detected critical point, sweeping outward from the (+p, +p) corner at
kinetostatically compensated actuator coordinates.

Usage:
    python scripts/sweep_preload_cases.py [--out-dir results] [--kv 0 0.01 0.1]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from kinetostat import (
    OrthoglideSpec,
    SpringLaw,
    build_planar_orthoglide,
    critical_force,
    force_deflection,
    solve_inverse_kinetostatic,
    workspace_points,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--kv", type=float, nargs="+", default=[0.0, 0.01, 0.1])
    ap.add_argument("--max-delta", type=float, default=0.3)
    ap.add_argument("--step", type=float, default=0.001)
    args = ap.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    diag = np.array([1.0, 1.0]) / np.sqrt(2.0)

    for kv in args.kv:
        spec = OrthoglideSpec(spring=SpringLaw(kv, 0.0, "linear"))
        model = build_planar_orthoglide(spec)
        q2 = workspace_points(spec)[2]
        sol = solve_inverse_kinetostatic(model, q2, 1e-8)
        curve = force_deflection(model, q2, diag, args.max_delta, args.step, rho_all=sol.rho)
        crit = critical_force(curve)

        path = out_dir / f"sweep_kv{kv:g}.csv"
        with path.open("w", newline="") as fh:
            fh.write("delta,F_mag,F_dir\n")
            for d, fm, fd in zip(curve.deltas, curve.force_magnitude, curve.force_along):
                fh.write(f"{d:.17g},{fm:.17g},{fd:.17g}\n")
            if crit is None:
                fh.write("# critical=none\n")
            else:
                fh.write(f"# critical_delta={crit[0]:.17g} critical_force={crit[1]:.17g}\n")
        print(f"kv={kv:g}: {len(curve.deltas)} samples, critical={crit}, -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
