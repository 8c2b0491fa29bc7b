"""Planar two-slider benchmark manipulator and its regression report.

The mechanism has two orthogonal prismatic drives (along x and y), each in
series with an elastic translation of stiffness K_theta that models the
drive compliance, a preloaded revolute at the slider, and a rigid bar of
length L pinned to the shared point platform. Task dimension is 2. Each
preloaded angle is zero when its bar points back along its drive axis,
i.e. at the workspace centre, and grows toward the (+p, +p) corner.

The benchmark reproduces the published stiffness table for this mechanism
(actuator compensation, directional stiffness, critical sweep forces), the
force-deflection sweeps, and the workspace compliance maps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chain import ChainModel, JointModel, ManipulatorModel, PoseVector, Transform
from .control import solve_inverse_kinetostatic
from .equilibrium import ForceDeflectionCurve, SolverOptions, force_deflection
from .errors import KinetostatError, ModelError
from .springs import SpringLaw
from .stiffness import directional_stiffness, manipulator_stiffness

# Published reference values for this mechanism, in units of K_theta and L.
# Keyed by preload factor kv, where the joint spring stiffness is
# kv * K_theta * L^2. The reference workspace factor is ~0.45 (the published
# actuator values are consistent with ~0.454, hence percent-level deviations
# are expected at the default p_factor, and the report prints them).
KV_FACTORS = (0.0, 0.01, 0.05, 0.1)
REFERENCE_TABLE = {
    "Q0": {
        "rho": {0.0: 1.0, 0.01: 1.0, 0.05: 1.0, 0.1: 1.0},
        "stiffness": {0.0: 1.0, 0.01: 1.01, 0.05: 1.05, 0.1: 1.10},
    },
    "Q1": {
        "rho": {0.0: 0.437, 0.01: 0.433, 0.05: 0.419, 0.1: 0.402},
        "stiffness": {0.0: 2.276, 0.01: 2.286, 0.05: 2.329, 0.1: 2.382},
    },
    "Q2": {
        "rho": {0.0: 1.345, 0.01: 1.356, 0.05: 1.399, 0.1: 1.453},
        "stiffness": {0.0: 0.24, 0.01: 0.27, 0.05: 0.39, 0.1: 0.55},
        "critical_force": {0.0: 0.020, 0.01: 0.027, 0.05: None, 0.1: None},
    },
}

# 0.3 L reaches past the weakest preload's stationary point (~0.21 L)
SWEEP_STEP_FACTOR = 0.001
SWEEP_MAX_FACTOR = 0.3


@dataclass(frozen=True)
class OrthoglideSpec:
    """Benchmark parameters: leg length, drive stiffness, joint preload."""

    L: float = 1.0
    K_theta: float = 1.0
    spring: SpringLaw = field(default_factory=lambda: SpringLaw(0.0))
    p_factor: float = 0.45

    def __post_init__(self):
        if self.L <= 0 or self.K_theta <= 0:
            raise ModelError("leg length and drive stiffness must be positive")
        if not 0.0 < self.p_factor < 1.0 / math.sqrt(2.0):
            raise ModelError("p_factor must lie in (0, 1/sqrt(2))")

    @property
    def p(self) -> float:
        return self.p_factor * self.L

    def options(self) -> SolverOptions:
        return SolverOptions(pose_tol=1e-9 * self.L)


def build_planar_orthoglide(spec: OrthoglideSpec) -> ManipulatorModel:
    """Two-chain planar model; the platform pin of each bar is kinematically
    immaterial for a point platform and carries no coordinate."""
    x_axis = (1.0, 0.0, 0.0)
    y_axis = (0.0, 1.0, 0.0)

    def leg(name, drive_axis, revolute_axis, bar):
        return ChainModel(
            task_dim=2,
            base_pose=Transform.identity(),
            elements=[
                (Transform.identity(), JointModel(kind="actuated", motion="translational", axis=drive_axis)),
                (
                    Transform.identity(),
                    JointModel(
                        kind="virtual_elastic",
                        motion="translational",
                        axis=drive_axis,
                        stiffness=spec.K_theta,
                    ),
                ),
                (
                    Transform.identity(),
                    JointModel(
                        kind="preloaded_passive",
                        motion="rotational",
                        axis=revolute_axis,
                        spring=spec.spring,
                    ),
                ),
            ],
            tool_transform=Transform(translation=bar),
            ik_seed=np.array([spec.L, 0.0]),
            name=name,
        )

    chains = [
        leg("x-leg", x_axis, (0.0, 0.0, -1.0), (-spec.L, 0.0, 0.0)),
        leg("y-leg", y_axis, (0.0, 0.0, 1.0), (0.0, -spec.L, 0.0)),
    ]
    p = spec.p
    return ManipulatorModel(
        task_dim=2,
        chains=chains,
        units={"length": "L", "force": "K_theta*L"},
        workspace=((-p, -p), (p, p)),
        name="planar-orthoglide",
    )


def workspace_points(spec: OrthoglideSpec):
    """(Q0, Q1, Q2): centre and the two workspace square corners."""
    p = spec.p
    return (
        PoseVector.from_array([0.0, 0.0], 2),
        PoseVector.from_array([-p, -p], 2),
        PoseVector.from_array([p, p], 2),
    )


def critical_force(curve: ForceDeflectionCurve):
    """First interior maximum of the along-direction force, or None.

    Detected through the sign change of the discrete derivative and refined
    with a quadratic fit through the three samples around the peak.
    """
    f = curve.force_along
    d = curve.deltas
    if len(f) < 3:
        return None
    for i in range(1, len(f) - 1):
        if f[i] >= f[i - 1] and f[i] > f[i + 1]:
            x = d[i - 1 : i + 2]
            y = f[i - 1 : i + 2]
            a, b, c = np.polyfit(x, y, 2)
            if a >= 0.0:
                return float(d[i]), float(f[i])
            delta_cr = -b / (2.0 * a)
            f_cr = a * delta_cr * delta_cr + b * delta_cr + c
            return float(delta_cr), float(f_cr)
    return None


@dataclass
class ComplianceMap:
    """Workspace lattice of aggregated stiffness and compliance extremes."""

    xs: np.ndarray
    ys: np.ndarray
    c_max: np.ndarray
    c_min: np.ndarray
    ok: np.ndarray
    K: np.ndarray


def compliance_grid(
    manipulator: ManipulatorModel,
    grid_n: int,
    opts: SolverOptions | None = None,
    eps_f: float = 1e-8,
    threads: int = 1,
) -> ComplianceMap:
    """Compliance map of any planar model over its declared workspace box.

    Each cell is evaluated in the compensated state: actuators are solved
    kinetostatically so the cell pose is an unloaded equilibrium, then the
    aggregate stiffness is computed there. Failed cells are flagged, never
    dropped.
    """
    if grid_n < 2:
        raise ModelError("compliance grid needs at least 2 points per side")
    if manipulator.workspace is None:
        raise ModelError("model declares no workspace box")
    lo, hi = manipulator.workspace
    xs = np.linspace(lo[0], hi[0], grid_n)
    ys = np.linspace(lo[1], hi[1], grid_n)
    d = manipulator.task_dim

    c_max = np.full((grid_n, grid_n), np.nan)
    c_min = np.full((grid_n, grid_n), np.nan)
    ok = np.zeros((grid_n, grid_n), dtype=bool)
    K_all = np.full((grid_n, grid_n, d, d), np.nan)

    def cell(ix, iy):
        t = np.zeros(d)
        t[0] = xs[ix]
        t[1] = ys[iy]
        try:
            sol = solve_inverse_kinetostatic(manipulator, t, eps_f, opts)
            res = manipulator_stiffness(manipulator, t, sol.rho, opts)
        except KinetostatError:
            return ix, iy, None
        return ix, iy, res.K_sigma

    indices = [(ix, iy) for ix in range(grid_n) for iy in range(grid_n)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: cell(*p), indices))
    else:
        results = [cell(*p) for p in indices]

    for ix, iy, K in results:
        if K is None:
            continue
        w = np.linalg.eigvalsh(K)
        if np.any(w == 0.0):
            continue
        c = 1.0 / w
        K_all[ix, iy] = K
        c_max[ix, iy] = float(c.max())
        c_min[ix, iy] = float(c.min())
        ok[ix, iy] = True
    return ComplianceMap(xs=xs, ys=ys, c_max=c_max, c_min=c_min, ok=ok, K=K_all)


def compliance_map(
    spec: OrthoglideSpec,
    preload_case: SpringLaw | None,
    grid_n: int,
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> ComplianceMap:
    """Benchmark compliance map for a given preload case (None = no preload)."""
    case = replace(spec, spring=preload_case if preload_case is not None else SpringLaw(0.0))
    model = build_planar_orthoglide(case)
    return compliance_grid(
        model, grid_n, opts or case.options(), eps_f=1e-8 * case.K_theta * case.L, threads=threads
    )


@dataclass
class Table1Cell:
    point: str
    kv: float
    rho: float
    rho_per_chain: tuple[float, ...]
    rho_ref: float | None
    stiffness: float
    stiffness_ref: float | None
    outer_iterations: int
    residual_wrench: float

    @property
    def rho_deviation(self) -> float | None:
        if self.rho_ref is None:
            return None
        return self.rho / self.rho_ref - 1.0

    @property
    def stiffness_deviation(self) -> float | None:
        if self.stiffness_ref is None:
            return None
        return self.stiffness / self.stiffness_ref - 1.0


@dataclass
class Table1Report:
    """Benchmark regression: compensated actuators, directional stiffness,
    and critical sweep forces per preload factor, with reference deviations."""

    p_factor: float
    kv_factors: tuple[float, ...]
    cells: dict[tuple[str, float], Table1Cell]
    critical: dict[float, tuple[float, float] | None]
    critical_ref: dict[float, float | None]

    def to_json_dict(self) -> dict:
        points = {}
        for (point, kv), cell in sorted(self.cells.items()):
            entry = points.setdefault(point, {})
            entry[repr(kv)] = {
                "rho": cell.rho,
                "rho_per_chain": list(cell.rho_per_chain),
                "rho_ref": cell.rho_ref,
                "rho_deviation": cell.rho_deviation,
                "stiffness": cell.stiffness,
                "stiffness_ref": cell.stiffness_ref,
                "stiffness_deviation": cell.stiffness_deviation,
                "outer_iterations": cell.outer_iterations,
                "residual_wrench": cell.residual_wrench,
            }
        critical = {
            repr(kv): None if c is None else {"delta": c[0], "force": c[1]}
            for kv, c in sorted(self.critical.items())
        }
        critical_ref = {repr(kv): v for kv, v in sorted(self.critical_ref.items())}
        return {
            "p_factor": self.p_factor,
            "kv_factors": list(self.kv_factors),
            "points": points,
            "critical_force": critical,
            "critical_force_ref": critical_ref,
        }

    def to_text(self) -> str:
        lines = []
        header = f"planar orthoglide benchmark (p_factor = {self.p_factor:g}, units of K_theta and L)"
        lines.append(header)
        lines.append("=" * len(header))
        lines.append("             " + "  ".join(f"{'kv=' + format(kv, 'g'):<20s}" for kv in self.kv_factors))
        for point in ("Q0", "Q1", "Q2"):
            lines.append(f"-- point {point}")
            for label, attr, ref_attr in (
                ("rho       ", "rho", "rho_ref"),
                ("stiffness ", "stiffness", "stiffness_ref"),
            ):
                vals = []
                for kv in self.kv_factors:
                    cell = self.cells[(point, kv)]
                    v = getattr(cell, attr)
                    r = getattr(cell, ref_attr)
                    dev = "" if r is None else f" ({100.0 * (v / r - 1.0):+.2f}%)"
                    vals.append(f"{v:.4f}{dev}")
                lines.append(f"  {label} " + "  ".join(f"{v:<20s}" for v in vals))
        vals = []
        for kv in self.kv_factors:
            c = self.critical.get(kv)
            r = self.critical_ref.get(kv)
            if c is None:
                vals.append("---" + ("" if r is None else " (ref ---)"))
            else:
                dev = "" if r is None else f" ({100.0 * (c[1] / r - 1.0):+.2f}%)"
                vals.append(f"{c[1]:.4f}{dev}")
        lines.append("-- critical force along Q0->Q2 at Q2")
        lines.append("  F_cr       " + "  ".join(f"{v:<20s}" for v in vals))
        return "\n".join(lines) + "\n"


def _bench_cell(spec, point_name, pose, direction, kv, opts, eps_f):
    sol = solve_inverse_kinetostatic(
        build_planar_orthoglide(spec), pose, eps_f, opts
    )
    model = build_planar_orthoglide(spec)
    res = manipulator_stiffness(model, pose, sol.rho, opts)
    k = directional_stiffness(res.K_sigma, direction)
    rho_values = tuple(float(r[0]) for r in sol.rho)
    refs = REFERENCE_TABLE[point_name]
    return Table1Cell(
        point=point_name,
        kv=kv,
        rho=float(np.mean(rho_values)),
        rho_per_chain=rho_values,
        rho_ref=refs["rho"].get(kv),
        stiffness=k,
        stiffness_ref=refs["stiffness"].get(kv),
        outer_iterations=sol.outer_iterations,
        residual_wrench=sol.residual_wrench,
    ), sol


def reproduce_table1(
    spec_base: OrthoglideSpec,
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> Table1Report:
    """Run the full benchmark grid: points Q0/Q1/Q2 x preload factors.

    Per cell: kinetostatic compensation, then directional stiffness along
    the matching workspace diagonal; per preload factor additionally a
    displacement sweep from Q2 outward with critical-force detection.
    """
    opts = opts or spec_base.options()
    eps_f = 1e-8 * spec_base.K_theta * spec_base.L
    q0, q1, q2 = workspace_points(spec_base)
    diag = 1.0 / math.sqrt(2.0)
    directions = {
        "Q0": np.array([diag, diag]),
        "Q1": np.array([-diag, -diag]),
        "Q2": np.array([diag, diag]),
    }
    poses = {"Q0": q0, "Q1": q1, "Q2": q2}

    def run_kv(kv):
        spring = SpringLaw(kv * spec_base.K_theta * spec_base.L**2, 0.0, "linear")
        spec = replace(spec_base, spring=spring)
        cells = {}
        q2_sol = None
        for point in ("Q0", "Q1", "Q2"):
            cell, sol = _bench_cell(spec, point, poses[point], directions[point], kv, opts, eps_f)
            cells[(point, kv)] = cell
            if point == "Q2":
                q2_sol = sol
        curve = force_deflection(
            build_planar_orthoglide(spec),
            poses["Q2"],
            directions["Q2"],
            SWEEP_MAX_FACTOR * spec_base.L,
            SWEEP_STEP_FACTOR * spec_base.L,
            opts,
            rho_all=q2_sol.rho,
        )
        crit = critical_force(curve)
        return cells, crit

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_kv, KV_FACTORS))
    else:
        outcomes = [run_kv(kv) for kv in KV_FACTORS]

    cells: dict[tuple[str, float], Table1Cell] = {}
    critical: dict[float, tuple[float, float] | None] = {}
    for kv, (kv_cells, crit) in zip(KV_FACTORS, outcomes):
        cells.update(kv_cells)
        critical[kv] = crit
    critical_ref = {kv: REFERENCE_TABLE["Q2"]["critical_force"][kv] for kv in KV_FACTORS}
    return Table1Report(
        p_factor=spec_base.p_factor,
        kv_factors=KV_FACTORS,
        cells=cells,
        critical=critical,
        critical_ref=critical_ref,
    )
