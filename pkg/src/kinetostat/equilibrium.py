"""Loaded static equilibrium of chains held at a prescribed end pose.

The solve works in the dual formulation: the end pose is given, the wrench
needed to hold it there is the unknown. Each iteration linearizes the
geometry around the current regrouped configuration and solves the saddle
block system

    [ J_th K^-1 J_th^T   J_q ] [ F ]   [ eps ]
    [ J_q^T              0   ] [ q ] = [ 0   ]

followed by the spring update theta = K^-1 J_th^T F + theta_0, with
eps = t - g + J_q q + J_th (theta - theta_0). The preloaded active set is
re-partitioned every iteration; stagnating runs are restarted from a
slightly perturbed configuration drawn from a seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    ChainModel,
    ChainState,
    ManipulatorModel,
    chain_ik_best_effort,
    fk_array,
    inverse_kinematics_unloaded,
    regrouped_geometry,
)
from .errors import ModelError, NonConvergenceError, SingularityError
from .springs import RegroupedState, partition

STEP_TOL = 1e-10  # relative (F, q) step change accepted as stationary
COND_LIMIT = 1e12
_OSCILLATION_LIMIT = 5
_DAMPING = 0.5


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget and reproducibility knobs, in model units (pose_tol ~ L)."""

    pose_tol: float = 1e-9
    max_iterations: int = 50
    max_restarts: int = 10
    perturbation_scale: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if self.pose_tol <= 0 or self.perturbation_scale <= 0:
            raise ModelError("solver tolerances must be positive")
        if self.max_iterations < 1 or self.max_restarts < 0:
            raise ModelError("solver iteration budgets must be positive")


@dataclass
class EquilibriumResult:
    """Converged loaded equilibrium of one chain."""

    F: np.ndarray
    q_tilde: np.ndarray
    theta_tilde: np.ndarray
    active_mask: np.ndarray
    residual: float
    iterations: int
    restarts: int
    regrouped: RegroupedState
    state: ChainState


def _block_matrix(J_theta, J_q, k_tilde):
    d = J_theta.shape[0]
    k = J_q.shape[1]
    A = np.zeros((d + k, d + k))
    A[:d, :d] = (J_theta / k_tilde) @ J_theta.T
    A[:d, d:] = J_q
    A[d:, :d] = J_q.T
    return A


def solve_chain_equilibrium(
    chain: ChainModel,
    t,
    rho,
    opts: SolverOptions | None = None,
    start: ChainState | None = None,
) -> EquilibriumResult:
    """Wrench and configuration holding one chain at pose t with actuators at rho.

    The iteration is warm-started from ``start`` when given, otherwise from
    the rigid inverse kinematics at t with the prescribed rho substituted.
    Raises SingularityError when the block matrix degenerates (condition
    number beyond 1e12) and NonConvergenceError once the restart budget is
    exhausted.
    """
    opts = opts or SolverOptions()
    target = np.asarray(t.as_array() if hasattr(t, "as_array") else t, dtype=float).ravel()
    if target.size != chain.task_dim:
        raise ModelError(f"pose of length {target.size} does not match task dim {chain.task_dim}")
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if rho.shape != (chain.n_actuated,):
        raise ModelError(f"rho of shape {rho.shape} does not match {chain.n_actuated} actuators")

    rng = np.random.default_rng(opts.rng_seed)
    if start is None:
        # nearest unloaded configuration; best effort because part of the
        # task space may only be reachable through elastic deflection
        seed, _ = chain_ik_best_effort(chain, target)
        state = ChainState(rho.copy(), seed.q, seed.vartheta, np.zeros(chain.n_virtual))
    else:
        start.validate_against(chain)
        state = ChainState(rho.copy(), start.q.copy(), start.vartheta.copy(), start.theta.copy())

    d = chain.task_dim
    best_residual = np.inf
    iterations = 0
    restarts = 0

    while True:
        F = np.zeros(d)
        prev_mask = None
        oscillating = 0
        converged = False
        for _ in range(opts.max_iterations):
            reg = partition(chain, state)
            if prev_mask is not None and not np.array_equal(reg.active_mask, prev_mask):
                oscillating += 1
            else:
                oscillating = 0
            prev_mask = reg.active_mask

            g, J_theta, J_q = regrouped_geometry(chain, reg)
            A = _block_matrix(J_theta, J_q, reg.k_tilde)
            cond = np.linalg.cond(A)
            if not np.isfinite(cond) or cond > COND_LIMIT:
                raise SingularityError(
                    f"chain {chain.name!r} is singular at the prescribed pose "
                    f"(condition {cond:.3e})",
                    condition=float(cond),
                )
            eps = target - g + J_q @ reg.q_tilde + J_theta @ (reg.theta_tilde - reg.theta_tilde_0)
            rhs = np.concatenate([eps, np.zeros(J_q.shape[1])])
            sol = np.linalg.solve(A, rhs)
            F_new = sol[:d]
            q_new = sol[d:]
            th_new = (J_theta.T @ F_new) / reg.k_tilde + reg.theta_tilde_0
            if oscillating > _OSCILLATION_LIMIT:
                q_new = reg.q_tilde + _DAMPING * (q_new - reg.q_tilde)
                th_new = reg.theta_tilde + _DAMPING * (th_new - reg.theta_tilde)

            new_state = reg.scatter(chain, q_tilde=q_new, theta_tilde=th_new)
            iterations += 1
            step = np.concatenate(
                [
                    F_new - F,
                    new_state.q - state.q,
                    new_state.vartheta - state.vartheta,
                    new_state.theta - state.theta,
                ]
            )
            scale = max(
                1.0,
                float(
                    np.linalg.norm(
                        np.concatenate([F_new, new_state.q, new_state.vartheta, new_state.theta])
                    )
                ),
            )
            state = new_state
            F = F_new
            residual = float(np.linalg.norm(target - fk_array(chain, state)))
            best_residual = min(best_residual, residual)
            if residual <= opts.pose_tol and float(np.linalg.norm(step)) <= STEP_TOL * scale:
                converged = True
                break
        if converged:
            break
        restarts += 1
        if restarts > opts.max_restarts:
            raise NonConvergenceError(
                f"equilibrium of chain {chain.name!r} did not converge "
                f"(best residual {best_residual:.3e})",
                residual=best_residual,
                iterations=iterations,
                restarts=restarts - 1,
            )
        # slight random disturbance of the configuration, actuators stay put
        def perturbed(v):
            return v + rng.uniform(-1.0, 1.0, v.shape) * opts.perturbation_scale * np.maximum(
                1.0, np.abs(v)
            )

        state = ChainState(rho.copy(), perturbed(state.q), perturbed(state.vartheta), perturbed(state.theta))

    reg = partition(chain, state)
    return EquilibriumResult(
        F=F,
        q_tilde=reg.q_tilde,
        theta_tilde=reg.theta_tilde,
        active_mask=reg.active_mask,
        residual=residual,
        iterations=iterations,
        restarts=restarts,
        regrouped=reg,
        state=state,
    )


def split_rho(manipulator: ManipulatorModel, rho_all) -> list[np.ndarray]:
    """Normalize per-chain actuator values from either a list or a flat vector."""
    if isinstance(rho_all, (list, tuple)) and len(rho_all) == len(manipulator.chains):
        return [np.atleast_1d(np.asarray(r, dtype=float)) for r in rho_all]
    flat = np.atleast_1d(np.asarray(rho_all, dtype=float))
    if flat.size != manipulator.n_actuated:
        raise ModelError(
            f"expected {manipulator.n_actuated} actuator values, got {flat.size}"
        )
    out = []
    k = 0
    for chain in manipulator.chains:
        out.append(flat[k : k + chain.n_actuated].copy())
        k += chain.n_actuated
    return out


def total_wrench(
    manipulator: ManipulatorModel,
    t,
    rho_all,
    opts: SolverOptions | None = None,
    starts: list[ChainState] | None = None,
):
    """Sum of the per-chain holding wrenches at a shared platform pose."""
    target = manipulator.pose_array(t)
    rhos = split_rho(manipulator, rho_all)
    results = []
    for i, chain in enumerate(manipulator.chains):
        try:
            results.append(
                solve_chain_equilibrium(
                    chain,
                    target,
                    rhos[i],
                    opts,
                    start=None if starts is None else starts[i],
                )
            )
        except (NonConvergenceError, SingularityError) as err:
            err.chain_index = i
            raise
    F_sigma = np.sum([r.F for r in results], axis=0)
    return F_sigma, results


@dataclass
class ForceDeflectionCurve:
    """Displacement-controlled sweep along a fixed direction."""

    deltas: np.ndarray
    force_magnitude: np.ndarray
    force_along: np.ndarray
    direction: np.ndarray
    truncated: bool = False
    critical: tuple[float, float] | None = None


def force_deflection(
    manipulator: ManipulatorModel,
    start,
    direction,
    max_delta: float,
    step: float,
    opts: SolverOptions | None = None,
    rho_all=None,
) -> ForceDeflectionCurve:
    """Sweep the platform from ``start`` along ``direction`` at fixed actuators.

    Actuator coordinates default to the rigid inverse kinematics at the
    start pose; each sample is warm-started from the previous one. The
    first non-convergent sample truncates the curve instead of raising,
    which is how loss of solvability past buckling shows up.
    """
    if step <= 0 or max_delta < 0:
        raise ModelError("sweep needs step > 0 and max_delta >= 0")
    start_vec = manipulator.pose_array(start)
    u = np.asarray(direction, dtype=float).ravel()
    if u.size != manipulator.task_dim:
        raise ModelError("sweep direction does not match the task dimension")
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise ModelError("sweep direction must be nonzero")
    u = u / norm

    if rho_all is None:
        rhos = [s.rho for s in inverse_kinematics_unloaded(manipulator, start_vec)]
    else:
        rhos = split_rho(manipulator, rho_all)

    deltas = []
    magnitudes = []
    along = []
    truncated = False
    warm: list[ChainState] | None = None
    n_steps = int(round(max_delta / step))
    for i in range(n_steps + 1):
        delta = i * step
        target = start_vec + delta * u
        try:
            F_sigma, results = total_wrench(manipulator, target, rhos, opts, starts=warm)
        except (NonConvergenceError, SingularityError):
            truncated = True
            break
        warm = [r.state for r in results]
        deltas.append(delta)
        magnitudes.append(float(np.linalg.norm(F_sigma)))
        along.append(float(F_sigma @ u))
    return ForceDeflectionCurve(
        deltas=np.array(deltas),
        force_magnitude=np.array(magnitudes),
        force_along=np.array(along),
        direction=u,
        truncated=truncated,
    )
