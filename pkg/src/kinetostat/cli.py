"""Command-line surface.

Subcommands: equilibrium, stiffness, sweep, map, invkin, bench. Exit codes:
0 success, 2 usage, 3 model/input error (including unreachable poses),
4 solver non-convergence, 5 singularity. Diagnostics go to stderr; CSV and
JSON payloads go to stdout or --out, with floats at 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .chain import inverse_kinematics_unloaded
from .control import solve_inverse_kinetostatic
from .equilibrium import SolverOptions, force_deflection, split_rho, total_wrench
from .errors import (
    KinetostatError,
    ModelError,
    NonConvergenceError,
    OutOfWorkspaceError,
    SingularityError,
)
from .modelfile import parse_model
from .orthoglide import OrthoglideSpec, compliance_grid, critical_force, reproduce_table1
from .stiffness import manipulator_stiffness

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_NONCONVERGENCE = 4
EXIT_SINGULARITY = 5


class _UsageError(Exception):
    pass


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _floats(text: str, label: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as err:
        raise _UsageError(f"cannot parse {label} {text!r}: {err}") from None


def _load_model(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    except OSError as err:
        raise ModelError(f"cannot read model file {path}: {err}") from err


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix_rows(M) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(M)]


def _options(args) -> SolverOptions:
    return SolverOptions(pose_tol=args.tol, rng_seed=args.seed, max_iterations=args.max_iter)


def _resolve_rho(model, args, target):
    if args.rho is not None:
        return split_rho(model, _floats(args.rho, "--rho"))
    return [s.rho for s in inverse_kinematics_unloaded(model, target)]


def _cmd_equilibrium(args) -> int:
    model = _load_model(args.model)
    target = model.pose_array(_floats(args.pose, "--pose"))
    opts = _options(args)
    rho = _resolve_rho(model, args, target)
    F_sigma, results = total_wrench(model, target, rho, opts)
    if args.json:
        payload = {
            "command": "equilibrium",
            "pose": [float(v) for v in target],
            "rho": [[float(v) for v in r] for r in rho],
            "F_sigma": [float(v) for v in F_sigma],
            "chains": [
                {
                    "F": [float(v) for v in r.F],
                    "residual": r.residual,
                    "iterations": r.iterations,
                    "restarts": r.restarts,
                    "active_mask": [bool(b) for b in r.active_mask],
                }
                for r in results
            ],
            "units": model.units,
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = ["F_sigma: " + " ".join(_fmt(v) for v in F_sigma)]
        for i, r in enumerate(results):
            lines.append(
                f"chain[{i}]: F = {' '.join(_fmt(v) for v in r.F)}  "
                f"residual = {_fmt(r.residual)}  iterations = {r.iterations}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_stiffness(args) -> int:
    model = _load_model(args.model)
    target = model.pose_array(_floats(args.pose, "--pose"))
    opts = _options(args)
    rho = _resolve_rho(model, args, target)
    res = manipulator_stiffness(model, target, rho, opts)
    eig = np.linalg.eigvalsh(res.K_sigma)
    if args.json:
        payload = {
            "command": "stiffness",
            "pose": [float(v) for v in target],
            "K_sigma": _matrix_rows(res.K_sigma),
            "eigenvalues": [float(v) for v in eig],
            "K_c": [_matrix_rows(K) for K in res.K_c],
            "rank_c": res.rank_c,
            "condition": res.condition,
            "indefinite": res.indefinite,
            "units": model.units,
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = ["K_sigma:"]
        for row in np.asarray(res.K_sigma):
            lines.append("  " + " ".join(_fmt(v) for v in row))
        lines.append("eigenvalues: " + " ".join(_fmt(v) for v in eig))
        lines.append("chain ranks: " + " ".join(str(r) for r in res.rank_c))
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    model = _load_model(args.model)
    start = model.pose_array(_floats(args.start, "--from"))
    direction = _floats(args.dir, "--dir")
    opts = _options(args)
    if args.compensate:
        rho = solve_inverse_kinetostatic(model, start, args.eps_f, opts).rho
    elif args.rho is not None:
        rho = split_rho(model, _floats(args.rho, "--rho"))
    else:
        rho = None
    curve = force_deflection(model, start, direction, args.max_delta, args.step, opts, rho_all=rho)
    crit = critical_force(curve)
    lines = ["delta,F_mag,F_dir"]
    for d, fm, fd in zip(curve.deltas, curve.force_magnitude, curve.force_along):
        lines.append(f"{_fmt(d)},{_fmt(fm)},{_fmt(fd)}")
    if crit is None:
        lines.append("# critical=none")
    else:
        lines.append(f"# critical_delta={_fmt(crit[0])} critical_force={_fmt(crit[1])}")
    if curve.truncated:
        lines.append("# truncated=true")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_map(args) -> int:
    model = _load_model(args.model)
    opts = _options(args)
    grid = compliance_grid(model, args.grid, opts, eps_f=args.eps_f, threads=args.threads)
    lines = ["x,y,c_max,c_min,flag"]
    for ix, x in enumerate(grid.xs):
        for iy, y in enumerate(grid.ys):
            flag = "ok" if grid.ok[ix, iy] else "failed"
            lines.append(
                f"{_fmt(x)},{_fmt(y)},{_fmt(grid.c_max[ix, iy])},{_fmt(grid.c_min[ix, iy])},{flag}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_invkin(args) -> int:
    model = _load_model(args.model)
    target = model.pose_array(_floats(args.pose, "--pose"))
    opts = _options(args)
    sol = solve_inverse_kinetostatic(model, target, args.eps_f, opts)
    if args.json:
        payload = {
            "command": "invkin",
            "pose": [float(v) for v in target],
            "rho": [[float(v) for v in r] for r in sol.rho],
            "residual_wrench": sol.residual_wrench,
            "outer_iterations": sol.outer_iterations,
            "full_rank": sol.full_rank,
            "units": model.units,
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        flat = " ".join(_fmt(v) for r in sol.rho for v in r)
        _emit(
            f"rho: {flat}\nresidual_wrench: {_fmt(sol.residual_wrench)}\n"
            f"outer_iterations: {sol.outer_iterations}\n",
            args.out,
        )
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.benchmark != "orthoglide":
        raise _UsageError(f"unknown benchmark {args.benchmark!r}")
    spec = OrthoglideSpec(p_factor=args.p_factor)
    opts = SolverOptions(pose_tol=args.tol * spec.L, rng_seed=args.seed, max_iterations=args.max_iter)
    report = reproduce_table1(spec, opts, threads=args.threads)
    if args.json:
        _emit(json.dumps(report.to_json_dict(), indent=2) + "\n", args.out)
    else:
        _emit(report.to_text(), args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="rng seed for solver restarts")
    common.add_argument("--tol", type=float, default=1e-9, help="pose tolerance of the equilibrium solve")
    common.add_argument("--max-iter", type=int, default=50, help="equilibrium iterations per restart")
    common.add_argument("--json", action="store_true", help="emit a JSON envelope instead of text")
    common.add_argument("--out", default=None, help="write the payload to a file instead of stdout")

    parser = argparse.ArgumentParser(
        prog="kinetostat",
        description="loaded equilibria, stiffness and kinetostatic control of preloaded parallel manipulators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", parents=[common], help="total wrench holding a pose")
    p.add_argument("--model", required=True)
    p.add_argument("--pose", required=True, help="comma separated task coordinates")
    p.add_argument("--rho", default=None, help="actuator coordinates, flat comma list")
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("stiffness", parents=[common], help="aggregated Cartesian stiffness at a pose")
    p.add_argument("--model", required=True)
    p.add_argument("--pose", required=True)
    p.add_argument("--rho", default=None)
    p.set_defaults(func=_cmd_stiffness)

    p = sub.add_parser("sweep", parents=[common], help="force-deflection sweep (CSV)")
    p.add_argument("--model", required=True)
    p.add_argument("--from", dest="start", required=True, help="start pose")
    p.add_argument("--dir", required=True, help="sweep direction (normalized internally)")
    p.add_argument("--max-delta", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--rho", default=None, help="fixed actuators (default: rigid IK at start)")
    p.add_argument("--compensate", action="store_true", help="use kinetostatically compensated actuators")
    p.add_argument("--eps-f", type=float, default=1e-8, help="wrench tolerance for --compensate")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("map", parents=[common], help="compliance map over the model workspace (CSV)")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--eps-f", type=float, default=1e-8)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("invkin", parents=[common], help="kinetostatically compensated actuator coordinates")
    p.add_argument("--model", required=True)
    p.add_argument("--pose", required=True)
    p.add_argument("--eps-f", type=float, required=True)
    p.set_defaults(func=_cmd_invkin)

    p = sub.add_parser("bench", parents=[common], help="built-in benchmark reports")
    p.add_argument("benchmark", choices=["orthoglide"])
    p.add_argument("--p-factor", type=float, default=0.45)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, OutOfWorkspaceError) as err:
        print(f"model error: {err}", file=sys.stderr)
        return EXIT_MODEL
    except SingularityError as err:
        print(f"singularity: {err}", file=sys.stderr)
        return EXIT_SINGULARITY
    except NonConvergenceError as err:
        print(f"non-convergence: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except KinetostatError as err:  # any remaining domain error is a model problem
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MODEL
    except Exception as err:  # noqa: BLE001 - nothing may escape to the shell
        print(f"internal error: {err!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
