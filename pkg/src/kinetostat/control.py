"""Inverse kinetostatics: actuator commands that cancel preload deflections.

A preloaded manipulator parked at the kinematic actuator values misses its
target pose, because the internal springs drag the platform away. The
compensation loop below starts from the rigid inverse kinematics, then
Newton-iterates on the actuated coordinates until the total wrench needed
to hold the target vanishes (or matches a prescribed external wrench):

    1. rho <- rigid inverse kinematics at t
    2. F   <- total holding wrench at (t, rho)
    3. stop once |F - F_target| < eps_f
    4. S   <- dF/drho by central differences around rho
    5. rho <- rho - S^-1 (F - F_target), halving the step while the
       residual grows, then back to 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ManipulatorModel, inverse_kinematics_unloaded
from .equilibrium import SolverOptions, split_rho, total_wrench
from .errors import ControlSingularityError, ModelError, NonConvergenceError

_DEFAULT_H_RHO = 1e-5
_MAX_HALVINGS = 8


@dataclass
class KinetostaticSolution:
    """Compensated actuator coordinates and the loop diagnostics."""

    rho: list[np.ndarray]
    residual_wrench: float
    outer_iterations: int
    S_F_rho: np.ndarray | None
    full_rank: bool = True
    history: list[float] = field(default_factory=list)

    @property
    def rho_flat(self) -> np.ndarray:
        return np.concatenate(self.rho)


def sensitivity_matrix(
    manipulator: ManipulatorModel,
    t,
    rho_all,
    h_rho: float = _DEFAULT_H_RHO,
    opts: SolverOptions | None = None,
) -> np.ndarray:
    """dF_total/drho by central differences, one column per actuator."""
    if h_rho <= 0:
        raise ModelError("sensitivity step must be positive")
    target = manipulator.pose_array(t)
    flat = np.concatenate(split_rho(manipulator, rho_all))
    S = np.zeros((manipulator.task_dim, flat.size))
    for j in range(flat.size):
        rp = flat.copy()
        rm = flat.copy()
        rp[j] += h_rho
        rm[j] -= h_rho
        Fp, _ = total_wrench(manipulator, target, rp, opts)
        Fm, _ = total_wrench(manipulator, target, rm, opts)
        S[:, j] = (Fp - Fm) / (2.0 * h_rho)
    return S


def solve_inverse_kinetostatic(
    manipulator: ManipulatorModel,
    t,
    eps_f: float,
    opts: SolverOptions | None = None,
    *,
    f_ext=None,
    h_rho: float = _DEFAULT_H_RHO,
    max_outer: int = 30,
) -> KinetostaticSolution:
    """Actuator coordinates making pose t an equilibrium under f_ext (default zero).

    Non-square or rank-deficient sensitivity matrices fall back to the
    least-squares pseudo-solution and flag the solution; a square matrix
    that is numerically singular raises ControlSingularityError.
    """
    if eps_f <= 0:
        raise ModelError("wrench tolerance eps_f must be positive")
    target = manipulator.pose_array(t)
    d = manipulator.task_dim
    F_target = np.zeros(d) if f_ext is None else np.asarray(f_ext, dtype=float).ravel()
    if F_target.size != d:
        raise ModelError("prescribed wrench does not match the task dimension")

    rho = np.concatenate([s.rho for s in inverse_kinematics_unloaded(manipulator, target)])
    F, _ = total_wrench(manipulator, target, rho, opts)
    err = F - F_target
    err_norm = float(np.linalg.norm(err))
    history = [err_norm]
    best_rho = rho.copy()
    best_norm = err_norm
    S = None
    full_rank = True

    for outer in range(max_outer):
        if err_norm < eps_f:
            return KinetostaticSolution(
                rho=split_rho(manipulator, rho),
                residual_wrench=err_norm,
                outer_iterations=outer,
                S_F_rho=S,
                full_rank=full_rank,
                history=history,
            )
        S = sensitivity_matrix(manipulator, target, rho, h_rho, opts)
        if S.shape[0] == S.shape[1]:
            cond = np.linalg.cond(S)
            if not np.isfinite(cond) or cond > 1e12:
                raise ControlSingularityError(
                    f"force/actuator sensitivity is singular (condition {cond:.3e})",
                    condition=float(cond),
                )
            step = np.linalg.solve(S, err)
        else:
            step, _, rank, _ = np.linalg.lstsq(S, err, rcond=None)
            full_rank = rank == min(S.shape)

        lam = 1.0
        accepted = False
        for _ in range(_MAX_HALVINGS):
            rho_try = rho - lam * step
            F_try, _ = total_wrench(manipulator, target, rho_try, opts)
            err_try = F_try - F_target
            try_norm = float(np.linalg.norm(err_try))
            if try_norm < err_norm:
                rho, err, err_norm = rho_try, err_try, try_norm
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        history.append(err_norm)
        if err_norm < best_norm:
            best_norm = err_norm
            best_rho = rho.copy()

    if err_norm < eps_f:
        return KinetostaticSolution(
            rho=split_rho(manipulator, rho),
            residual_wrench=err_norm,
            outer_iterations=len(history) - 1,
            S_F_rho=S,
            full_rank=full_rank,
            history=history,
        )
    raise NonConvergenceError(
        f"kinetostatic compensation stalled at |F| = {best_norm:.3e} (eps_f = {eps_f:.3e})",
        residual=best_norm,
        iterations=len(history) - 1,
    )


def compensate_trajectory(
    manipulator: ManipulatorModel,
    poses,
    eps_f: float,
    opts: SolverOptions | None = None,
    **kwargs,
) -> list[KinetostaticSolution]:
    """Batch compensation: one kinetostatic solve per target pose."""
    return [solve_inverse_kinetostatic(manipulator, t, eps_f, opts, **kwargs) for t in poses]
