"""Serial-chain models: geometry map, analytic Jacobians, load Hessians, rigid IK.

A chain is an ordered stack of fixed link transforms, each followed by a
1-DOF joint (actuated, perfect passive, preloaded passive or virtual
elastic), closed by a fixed tool transform. The same engine covers planar
point platforms (task dim 2), planar rigid platforms (dim 3, x/y/yaw) and
spatial chains (dim 6, position plus roll-pitch-yaw).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import geometry as geo
from .errors import ModelError, OutOfWorkspaceError
from .springs import RegroupedState, SpringLaw

ACTUATED = "actuated"
PERFECT_PASSIVE = "perfect_passive"
PRELOADED_PASSIVE = "preloaded_passive"
VIRTUAL_ELASTIC = "virtual_elastic"
JOINT_KINDS = (ACTUATED, PERFECT_PASSIVE, PRELOADED_PASSIVE, VIRTUAL_ELASTIC)

ROTATIONAL = "rotational"
TRANSLATIONAL = "translational"
MOTIONS = (ROTATIONAL, TRANSLATIONAL)

TASK_DIMS = (2, 3, 6)

_AXIS_TOL = 1e-12
# central-difference step factors, see jacobians/hessian tests
_HESSIAN_STEP = 1e-6


@dataclass(frozen=True)
class Transform:
    """Fixed rigid transform given as translation plus roll-pitch-yaw."""

    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @cached_property
    def matrix(self) -> np.ndarray:
        return geo.homogeneous(geo.rpy_matrix(self.rpy), self.translation)

    @staticmethod
    def identity() -> "Transform":
        return Transform()


@dataclass(frozen=True)
class JointModel:
    """One 1-DOF joint: kind, motion type and unit axis in the link frame."""

    kind: str
    motion: str
    axis: tuple[float, float, float]
    spring: SpringLaw | None = None
    stiffness: float | None = None

    def __post_init__(self):
        if self.kind not in JOINT_KINDS:
            raise ModelError(f"unknown joint kind {self.kind!r}")
        if self.motion not in MOTIONS:
            raise ModelError(f"unknown joint motion {self.motion!r}")
        norm = math.sqrt(sum(a * a for a in self.axis))
        if abs(norm - 1.0) > _AXIS_TOL:
            raise ModelError(f"joint axis must have unit norm, |axis| = {norm!r}")
        if (self.spring is not None) != (self.kind == PRELOADED_PASSIVE):
            raise ModelError("spring law present iff the joint is preloaded_passive")
        if (self.stiffness is not None) != (self.kind == VIRTUAL_ELASTIC):
            raise ModelError("stiffness present iff the joint is virtual_elastic")
        if self.stiffness is not None and self.stiffness <= 0.0:
            raise ModelError(f"virtual spring stiffness must be > 0, got {self.stiffness}")


@dataclass(frozen=True)
class PoseVector:
    """Platform pose: position plus wrapped orientation parameters."""

    p: tuple
    phi: tuple
    dim: int

    def __post_init__(self):
        if self.dim not in TASK_DIMS:
            raise ModelError(f"task dimension must be one of {TASK_DIMS}, got {self.dim}")
        n_p = 2 if self.dim in (2, 3) else 3
        n_phi = {2: 0, 3: 1, 6: 3}[self.dim]
        if len(self.p) != n_p or len(self.phi) != n_phi:
            raise ModelError(
                f"pose with dim {self.dim} needs {n_p} position and {n_phi} "
                f"orientation entries, got {len(self.p)}/{len(self.phi)}"
            )
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "phi", tuple(geo.wrap_angle(float(v)) for v in self.phi))

    @staticmethod
    def from_array(values, dim: int) -> "PoseVector":
        v = np.asarray(values, dtype=float).ravel()
        if v.size != dim:
            raise ModelError(f"pose array of length {v.size} does not match dim {dim}")
        n_p = 2 if dim in (2, 3) else 3
        return PoseVector(p=tuple(v[:n_p]), phi=tuple(v[n_p:]), dim=dim)

    def as_array(self) -> np.ndarray:
        return np.array(self.p + self.phi, dtype=float)


@dataclass
class ChainState:
    """Joint coordinates of one chain, grouped by joint kind."""

    rho: np.ndarray
    q: np.ndarray
    vartheta: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.vartheta = np.atleast_1d(np.asarray(self.vartheta, dtype=float))
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))

    def validate_against(self, chain: "ChainModel"):
        counts = (len(self.rho), len(self.q), len(self.vartheta), len(self.theta))
        expected = (chain.n_actuated, chain.n_perfect, chain.n_preloaded, chain.n_virtual)
        if counts != expected:
            raise ModelError(
                f"state sizes {counts} do not match chain joint counts {expected}"
            )

    def copy(self) -> "ChainState":
        return ChainState(self.rho.copy(), self.q.copy(), self.vartheta.copy(), self.theta.copy())


@dataclass
class ChainModel:
    """One serial chain: base frame, (link, joint) elements, tool frame."""

    task_dim: int
    base_pose: Transform
    elements: list[tuple[Transform, JointModel]]
    tool_transform: Transform
    ik_seed: np.ndarray | None = None
    name: str = ""
    _kind_elements: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.task_dim not in TASK_DIMS:
            raise ModelError(f"task dimension must be one of {TASK_DIMS}")
        by_kind: dict[str, list[int]] = {k: [] for k in JOINT_KINDS}
        for i, (_, joint) in enumerate(self.elements):
            by_kind[joint.kind].append(i)
        if not by_kind[VIRTUAL_ELASTIC]:
            raise ModelError("chain needs at least one virtual_elastic joint")
        self._kind_elements = {k: tuple(v) for k, v in by_kind.items()}
        n_ik = self.n_actuated + self.n_perfect + self.n_preloaded
        if self.ik_seed is not None:
            self.ik_seed = np.asarray(self.ik_seed, dtype=float).ravel()
            if self.ik_seed.size != n_ik:
                raise ModelError(
                    f"ik_seed length {self.ik_seed.size} does not match the "
                    f"{n_ik} rigid coordinates of chain {self.name!r}"
                )

    # -- coordinate bookkeeping -------------------------------------------

    @property
    def actuated_elements(self):
        return self._kind_elements[ACTUATED]

    @property
    def perfect_elements(self):
        return self._kind_elements[PERFECT_PASSIVE]

    @property
    def preloaded_elements(self):
        return self._kind_elements[PRELOADED_PASSIVE]

    @property
    def virtual_elements(self):
        return self._kind_elements[VIRTUAL_ELASTIC]

    @property
    def n_actuated(self):
        return len(self.actuated_elements)

    @property
    def n_perfect(self):
        return len(self.perfect_elements)

    @property
    def n_preloaded(self):
        return len(self.preloaded_elements)

    @property
    def n_virtual(self):
        return len(self.virtual_elements)

    def joint_at(self, element: int) -> JointModel:
        return self.elements[element][1]

    def coordinate_of(self, element: int) -> tuple[str, int]:
        """(kind, index within that kind) backing a chain element."""
        kind = self.joint_at(element).kind
        return kind, self._kind_elements[kind].index(element)

    def element_coordinates(self, state: ChainState) -> np.ndarray:
        """Joint values in chain element order."""
        state.validate_against(self)
        arrays = {
            ACTUATED: state.rho,
            PERFECT_PASSIVE: state.q,
            PRELOADED_PASSIVE: state.vartheta,
            VIRTUAL_ELASTIC: state.theta,
        }
        out = np.empty(len(self.elements))
        counters = {k: 0 for k in JOINT_KINDS}
        for i, (_, joint) in enumerate(self.elements):
            out[i] = arrays[joint.kind][counters[joint.kind]]
            counters[joint.kind] += 1
        return out

    def zero_state(self) -> ChainState:
        return ChainState(
            rho=np.zeros(self.n_actuated),
            q=np.zeros(self.n_perfect),
            vartheta=np.zeros(self.n_preloaded),
            theta=np.zeros(self.n_virtual),
        )


@dataclass
class ManipulatorModel:
    """Parallel manipulator: chains sharing one task space."""

    task_dim: int
    chains: list[ChainModel]
    units: dict[str, str] = field(default_factory=dict)
    workspace: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    name: str = ""

    def __post_init__(self):
        if self.task_dim not in TASK_DIMS:
            raise ModelError(f"task dimension must be one of {TASK_DIMS}")
        if not self.chains:
            raise ModelError("manipulator needs at least one chain")
        for i, chain in enumerate(self.chains):
            if chain.task_dim != self.task_dim:
                raise ModelError(
                    f"chain {i} declares task dim {chain.task_dim}, manipulator has {self.task_dim}"
                )

    @property
    def n_actuated(self) -> int:
        return sum(c.n_actuated for c in self.chains)

    def pose_array(self, t) -> np.ndarray:
        if isinstance(t, PoseVector):
            if t.dim != self.task_dim:
                raise ModelError(f"pose dim {t.dim} does not match task dim {self.task_dim}")
            return t.as_array()
        v = np.asarray(t, dtype=float).ravel()
        if v.size != self.task_dim:
            raise ModelError(f"pose of length {v.size} does not match task dim {self.task_dim}")
        return v


# -- forward geometry ------------------------------------------------------


def _joint_motion(joint: JointModel, value: float) -> np.ndarray:
    if joint.motion == TRANSLATIONAL:
        return geo.translation_along(joint.axis, value)
    return geo.rotation_joint(joint.axis, value)


def _end_transform(chain: ChainModel, coords: np.ndarray, with_joint_frames: bool):
    """Compose the chain; optionally record each joint's world axis and origin."""
    T = chain.base_pose.matrix.copy()
    frames = [] if with_joint_frames else None
    for (link, joint), value in zip(chain.elements, coords):
        T = T @ link.matrix
        if with_joint_frames:
            frames.append((T[:3, :3] @ np.asarray(joint.axis), T[:3, 3].copy()))
        T = T @ _joint_motion(joint, value)
    T = T @ chain.tool_transform.matrix
    return T, frames


def _task_pose(T: np.ndarray, dim: int) -> np.ndarray:
    if dim == 2:
        return T[:2, 3].copy()
    if dim == 3:
        yaw = math.atan2(T[1, 0], T[0, 0])
        return np.array([T[0, 3], T[1, 3], geo.wrap_angle(yaw)])
    rpy = geo.rpy_from_matrix(T[:3, :3])
    return np.array([*T[:3, 3], *(geo.wrap_angle(a) for a in rpy)])


def fk_array(chain: ChainModel, state: ChainState) -> np.ndarray:
    """End pose as a flat task-space vector."""
    coords = chain.element_coordinates(state)
    T, _ = _end_transform(chain, coords, with_joint_frames=False)
    return _task_pose(T, chain.task_dim)


def forward_kinematics(chain: ChainModel, state: ChainState) -> PoseVector:
    """Pose of the chain end for the given joint coordinates."""
    return PoseVector.from_array(fk_array(chain, state), chain.task_dim)


# -- analytic Jacobians ----------------------------------------------------


def _geometry_and_columns(chain: ChainModel, coords: np.ndarray):
    """End pose and the task Jacobian column of every chain element.

    Columns are built from the classic screw recursion: a translational
    joint contributes its world axis, a rotational one the lever cross
    product axis x (p_end - p_joint), with the angular part mapped onto
    the orientation parameters of the declared task dimension.
    """
    T, frames = _end_transform(chain, coords, with_joint_frames=True)
    dim = chain.task_dim
    p_end = T[:3, 3]
    R = T[:3, :3]
    pose = _task_pose(T, dim)

    if dim == 6:
        E = geo.euler_rate_matrix(pose[3:])
        if abs(np.linalg.det(E)) < 1e-9:
            raise ModelError("orientation parametrization singular (cos ry ~ 0)")
        E_inv = np.linalg.inv(E)

    cols = np.zeros((dim, len(chain.elements)))
    for j, ((axis_w, origin_w), (_, joint)) in enumerate(zip(frames, chain.elements)):
        if joint.motion == TRANSLATIONAL:
            v = axis_w
            omega = np.zeros(3)
        else:
            v = np.cross(axis_w, p_end - origin_w)
            omega = axis_w
        if dim == 2:
            cols[:, j] = v[:2]
        elif dim == 3:
            # exact derivative of atan2(R10, R00) under dR = [omega]x R
            c0 = R[:, 0]
            dc0 = np.cross(omega, c0)
            denom = c0[0] * c0[0] + c0[1] * c0[1]
            cols[:2, j] = v[:2]
            cols[2, j] = (c0[0] * dc0[1] - c0[1] * dc0[0]) / denom
        else:
            cols[:3, j] = v
            cols[3:, j] = E_inv @ omega
    return pose, cols


def jacobians(chain: ChainModel, regrouped: RegroupedState):
    """(J_theta, J_q): task Jacobians of the spring-like and passive sets."""
    state = regrouped.to_state(chain)
    _, cols = _geometry_and_columns(chain, chain.element_coordinates(state))
    J_theta = cols[:, list(regrouped.theta_elements)]
    J_q = cols[:, list(regrouped.q_elements)]
    return J_theta, J_q


def regrouped_geometry(chain: ChainModel, regrouped: RegroupedState):
    """(pose, J_theta, J_q) in one forward pass."""
    state = regrouped.to_state(chain)
    pose, cols = _geometry_and_columns(chain, chain.element_coordinates(state))
    return pose, cols[:, list(regrouped.theta_elements)], cols[:, list(regrouped.q_elements)]


# -- load-weighted Hessians --------------------------------------------------


def loaded_hessians(chain: ChainModel, regrouped: RegroupedState, F):
    """Second derivatives of psi = pose . F over the regrouped coordinates.

    Returns (H_qq, H_thth, H_qth) with the diagonal blocks symmetrized and
    H_qth laid out passive-rows by spring-columns. Central differences of
    the analytic gradient J^T F keep the error near 1e-8 without symbolic
    machinery; a zero wrench short-circuits to exact zeros.
    """
    F = np.asarray(F, dtype=float).ravel()
    if F.size != chain.task_dim:
        raise ModelError(f"wrench of length {F.size} does not match task dim {chain.task_dim}")
    k = len(regrouped.q_tilde)
    m = len(regrouped.theta_tilde)
    n = k + m
    if not np.any(F):
        return np.zeros((k, k)), np.zeros((m, m)), np.zeros((k, m))

    def gradient(x):
        state = regrouped.scatter(chain, q_tilde=x[:k], theta_tilde=x[k:])
        _, cols = _geometry_and_columns(chain, chain.element_coordinates(state))
        J = cols[:, list(regrouped.q_elements) + list(regrouped.theta_elements)]
        return J.T @ F

    x0 = np.concatenate([regrouped.q_tilde, regrouped.theta_tilde])
    H = np.zeros((n, n))
    for j in range(n):
        h = _HESSIAN_STEP * max(1.0, abs(x0[j]))
        xp = x0.copy()
        xm = x0.copy()
        xp[j] += h
        xm[j] -= h
        H[:, j] = (gradient(xp) - gradient(xm)) / (2.0 * h)
    H = 0.5 * (H + H.T)
    return H[:k, :k], H[k:, k:], H[:k, k:]


# -- rigid inverse kinematics ------------------------------------------------


def chain_ik_best_effort(
    chain: ChainModel,
    t,
    *,
    tol: float = 1e-12,
    max_iterations: int = 200,
):
    """Rigid IK core: closest reachable configuration and its pose distance.

    Levenberg-Marquardt on the actuated, perfect-passive and preloaded
    coordinates with virtual springs locked at rest, started from the
    chain's declared assembly seed (which picks the branch). Unreachable
    targets converge to the closest reachable point.
    """
    target = np.asarray(t, dtype=float).ravel()
    if target.size != chain.task_dim:
        raise ModelError(f"pose of length {target.size} does not match task dim {chain.task_dim}")

    n_rho, n_q = chain.n_actuated, chain.n_perfect
    free_elements = list(chain.actuated_elements) + list(chain.perfect_elements) + list(
        chain.preloaded_elements
    )
    u = np.zeros(len(free_elements)) if chain.ik_seed is None else chain.ik_seed.copy()

    def build_state(vec):
        return ChainState(
            rho=vec[:n_rho],
            q=vec[n_rho : n_rho + n_q],
            vartheta=vec[n_rho + n_q :],
            theta=np.zeros(chain.n_virtual),
        )

    def residual(vec):
        return target - fk_array(chain, build_state(vec))

    r = residual(u)
    r_norm = float(np.linalg.norm(r))
    lam = None
    eye = np.eye(len(free_elements))
    for _ in range(max_iterations):
        if r_norm <= tol or not free_elements:
            break
        _, cols = _geometry_and_columns(chain, chain.element_coordinates(build_state(u)))
        J = cols[:, free_elements]
        if lam is None:
            lam = 1e-3 * max(float(np.linalg.norm(J, 2)) ** 2, 1.0)
        g = J.T @ r
        improved = False
        for _ in range(40):
            step = np.linalg.solve(J.T @ J + lam * eye, g)
            r_try = residual(u + step)
            try_norm = float(np.linalg.norm(r_try))
            if try_norm < r_norm:
                u = u + step
                r, r_norm = r_try, try_norm
                lam = max(lam * 0.3, 1e-14)
                improved = True
                break
            lam *= 10.0
        if not improved:
            break
    return build_state(u), r_norm


def chain_ik_unloaded(
    chain: ChainModel,
    t,
    *,
    tol: float = 1e-12,
    fail_tol: float = 1e-10,
    max_iterations: int = 200,
):
    """Rigid inverse kinematics of one chain; raises OutOfWorkspaceError
    carrying the closest reachable distance when the target cannot be met."""
    state, r_norm = chain_ik_best_effort(chain, t, tol=tol, max_iterations=max_iterations)
    if r_norm > fail_tol:
        raise OutOfWorkspaceError(
            f"pose unreachable for chain {chain.name!r}, closest distance {r_norm:.3e}",
            distance=r_norm,
        )
    return state


def inverse_kinematics_unloaded(manipulator: ManipulatorModel, t) -> list[ChainState]:
    """Per-chain rigid IK of the whole manipulator at a shared target pose."""
    target = manipulator.pose_array(t)
    states = []
    for i, chain in enumerate(manipulator.chains):
        try:
            states.append(chain_ik_unloaded(chain, target))
        except OutOfWorkspaceError as err:
            err.chain_index = i
            raise
    return states
