"""Cartesian stiffness of loaded chains and their multi-chain aggregate.

Around a converged equilibrium the springs are condensed through
kf = (K - H_thth)^-1 and the chain stiffness is the leading task-size
block of the inverse of

    [ J_th kf J_th^T              J_q + J_th kf H_thq            ]
    [ J_q^T + H_qth kf J_th^T     H_qq + H_qth kf H_thq          ]

obtained by solving task-dim right-hand sides rather than inverting the
whole block. Chain matrices sum to the manipulator stiffness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ChainModel, ManipulatorModel, jacobians, loaded_hessians
from .equilibrium import (
    COND_LIMIT,
    EquilibriumResult,
    SolverOptions,
    solve_chain_equilibrium,
    split_rho,
    total_wrench,
)
from .errors import ModelError, NonConvergenceError, SingularityError, SpringSofteningError

_RANK_TOL = 1e-9


@dataclass
class StiffnessResult:
    """Per-chain and aggregated stiffness with solve diagnostics."""

    K_c: list[np.ndarray]
    K_sigma: np.ndarray
    rank_c: list[int]
    condition: list[float]
    asymmetry: list[float] = field(default_factory=list)
    indefinite: bool = False
    equilibria: list[EquilibriumResult] = field(default_factory=list)


def _chain_stiffness_diag(chain: ChainModel, eq: EquilibriumResult):
    reg = eq.regrouped
    J_theta, J_q = jacobians(chain, reg)
    H_qq, H_thth, H_qth = loaded_hessians(chain, reg, eq.F)

    spring_block = np.diag(reg.k_tilde) - H_thth
    cond_spring = np.linalg.cond(spring_block)
    if not np.isfinite(cond_spring) or cond_spring > COND_LIMIT:
        raise SpringSofteningError(
            f"loaded spring block of chain {chain.name!r} lost invertibility "
            f"(condition {cond_spring:.3e})",
            condition=float(cond_spring),
        )
    kf = np.linalg.inv(spring_block)

    d = chain.task_dim
    k = J_q.shape[1]
    H_thq = H_qth.T
    A = np.zeros((d + k, d + k))
    A[:d, :d] = J_theta @ kf @ J_theta.T
    A[:d, d:] = J_q + J_theta @ kf @ H_thq
    A[d:, :d] = J_q.T + H_qth @ kf @ J_theta.T
    A[d:, d:] = H_qq + H_qth @ kf @ H_thq
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularityError(
            f"stiffness block of chain {chain.name!r} is singular (condition {cond:.3e})",
            condition=float(cond),
        )

    rhs = np.zeros((d + k, d))
    rhs[:d, :] = np.eye(d)
    sol = np.linalg.solve(A, rhs)
    K = sol[:d, :]
    asym = float(np.linalg.norm(K - K.T))
    K = 0.5 * (K + K.T)
    return K, float(cond), asym


def chain_stiffness(chain: ChainModel, eq: EquilibriumResult) -> np.ndarray:
    """Symmetrized task-space stiffness of one chain at its equilibrium."""
    K, _, _ = _chain_stiffness_diag(chain, eq)
    return K


def manipulator_stiffness(
    manipulator: ManipulatorModel,
    t,
    rho_all,
    opts: SolverOptions | None = None,
) -> StiffnessResult:
    """Solve every chain at (t, rho) and aggregate the chain stiffnesses."""
    target = manipulator.pose_array(t)
    rhos = split_rho(manipulator, rho_all)
    K_c = []
    ranks = []
    conditions = []
    asymmetries = []
    equilibria = []
    for i, chain in enumerate(manipulator.chains):
        try:
            eq = solve_chain_equilibrium(chain, target, rhos[i], opts)
            K, cond, asym = _chain_stiffness_diag(chain, eq)
        except (NonConvergenceError, SingularityError) as err:
            err.chain_index = i
            raise
        K_c.append(K)
        smax = float(np.linalg.norm(K, 2))
        ranks.append(int(np.linalg.matrix_rank(K, tol=_RANK_TOL * max(smax, 1e-300))))
        conditions.append(cond)
        asymmetries.append(asym)
        equilibria.append(eq)
    K_sigma = np.sum(K_c, axis=0)
    eigvals = np.linalg.eigvalsh(K_sigma)
    return StiffnessResult(
        K_c=K_c,
        K_sigma=K_sigma,
        rank_c=ranks,
        condition=conditions,
        asymmetry=asymmetries,
        indefinite=bool(eigvals.min() <= 0.0),
        equilibria=equilibria,
    )


def directional_stiffness(K: np.ndarray, u) -> float:
    """u^T K u: holding-force change per unit prescribed displacement along u."""
    u = np.asarray(u, dtype=float).ravel()
    if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
        raise ModelError("direction must be a unit vector")
    return float(u @ np.asarray(K) @ u)


def stiffness_vs_fd_check(
    manipulator: ManipulatorModel,
    t,
    rho_all,
    h: float,
    opts: SolverOptions | None = None,
) -> float:
    """Worst relative deviation of K_sigma columns from wrench differences.

    Central differences of the total-wrench map with step h, column by
    column; deviations are scaled by the spectral norm of K_sigma.
    """
    if h <= 0:
        raise ModelError("finite-difference step must be positive")
    target = manipulator.pose_array(t)
    K = manipulator_stiffness(manipulator, target, rho_all, opts).K_sigma
    scale = float(np.linalg.norm(K, 2))
    worst = 0.0
    for j in range(manipulator.task_dim):
        tp = target.copy()
        tm = target.copy()
        tp[j] += h
        tm[j] -= h
        Fp, _ = total_wrench(manipulator, tp, rho_all, opts)
        Fm, _ = total_wrench(manipulator, tm, rho_all, opts)
        col = (Fp - Fm) / (2.0 * h)
        worst = max(worst, float(np.linalg.norm(col - K[:, j])) / scale)
    return worst
