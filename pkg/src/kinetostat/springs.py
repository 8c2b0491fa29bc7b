"""Piecewise-linear preload springs and the active/passive regrouping.

A preloaded passive joint carries an auxiliary spring whose torque is
``k * h(x - offset)`` where ``h`` is the identity, its positive part or its
negative part. Coordinates whose spring is currently engaged behave like
elastic (spring) coordinates; the rest behave like perfect passive ones.
``partition`` performs that split for a whole chain, producing the
aggregated ``(q_tilde, theta_tilde)`` view the solvers work in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ModelError

if TYPE_CHECKING:  # pragma: no cover
    from .chain import ChainModel, ChainState

LINEAR = "linear"
POSITIVE_PART = "positive_part"
NEGATIVE_PART = "negative_part"
BRANCHES = (LINEAR, POSITIVE_PART, NEGATIVE_PART)


@dataclass(frozen=True)
class SpringLaw:
    """Preload characteristic: stiffness, activation offset and branch."""

    k: float
    preload_offset: float = 0.0
    branch: str = LINEAR

    def __post_init__(self):
        if self.k < 0.0:
            raise ModelError(f"spring stiffness must be >= 0, got {self.k}")
        if self.branch not in BRANCHES:
            raise ModelError(f"unknown spring branch {self.branch!r}")

    def engaged(self, vartheta: float) -> bool:
        """True when the spring carries torque at this coordinate value.

        A zero-stiffness spring is never engaged, and a one-sided spring
        sitting exactly at its offset counts as disengaged (the torque is
        zero either way, the convention just removes the ambiguity).
        """
        if self.k <= 0.0:
            return False
        d = vartheta - self.preload_offset
        if self.branch == LINEAR:
            return True
        if self.branch == POSITIVE_PART:
            return d > 0.0
        return d < 0.0


def spring_torque(law: SpringLaw, vartheta: float) -> float:
    """Generalized torque k * h(vartheta - offset) of the preload spring."""
    d = vartheta - law.preload_offset
    if law.branch == POSITIVE_PART:
        d = max(d, 0.0)
    elif law.branch == NEGATIVE_PART:
        d = min(d, 0.0)
    return law.k * d


def spring_energy(law: SpringLaw, vartheta: float) -> float:
    """Stored elastic energy; piecewise quadratic, torque is its derivative."""
    d = vartheta - law.preload_offset
    if law.branch == POSITIVE_PART:
        d = max(d, 0.0)
    elif law.branch == NEGATIVE_PART:
        d = min(d, 0.0)
    return 0.5 * law.k * d * d


@dataclass
class RegroupedState:
    """Aggregated view of one chain configuration.

    ``q_tilde`` stacks the perfect-passive coordinates followed by the
    disengaged preloaded ones; ``theta_tilde`` stacks the virtual-spring
    coordinates followed by the engaged preloaded ones. ``k_tilde`` and
    ``theta_tilde_0`` are the spring stiffnesses and rest offsets aligned
    with ``theta_tilde`` (rest is exactly zero for virtual springs).
    ``q_elements`` / ``theta_elements`` hold the chain element index behind
    each column so Jacobians can be gathered consistently.
    """

    rho: np.ndarray
    q_tilde: np.ndarray
    theta_tilde: np.ndarray
    theta_tilde_0: np.ndarray
    k_tilde: np.ndarray
    active_mask: np.ndarray
    q_elements: tuple[int, ...]
    theta_elements: tuple[int, ...]

    def scatter(self, chain: "ChainModel", q_tilde=None, theta_tilde=None) -> "ChainState":
        """Rebuild a ChainState, optionally substituting new aggregate values."""
        from .chain import ChainState

        qv = self.q_tilde if q_tilde is None else np.asarray(q_tilde, dtype=float)
        tv = self.theta_tilde if theta_tilde is None else np.asarray(theta_tilde, dtype=float)
        q = np.zeros(chain.n_perfect)
        vartheta = np.zeros(chain.n_preloaded)
        theta = np.zeros(chain.n_virtual)
        for value, element in zip(qv, self.q_elements):
            kind, local = chain.coordinate_of(element)
            if kind == "perfect_passive":
                q[local] = value
            else:
                vartheta[local] = value
        for value, element in zip(tv, self.theta_elements):
            kind, local = chain.coordinate_of(element)
            if kind == "virtual_elastic":
                theta[local] = value
            else:
                vartheta[local] = value
        return ChainState(rho=self.rho.copy(), q=q, vartheta=vartheta, theta=theta)

    def to_state(self, chain: "ChainModel") -> "ChainState":
        return self.scatter(chain)


def partition(chain: "ChainModel", state: "ChainState") -> RegroupedState:
    """Split the chain coordinates into currently-passive and spring-like sets.

    The mask is recomputed from the preloaded coordinate values alone, so
    repeated calls on the same state are idempotent.
    """
    state.validate_against(chain)
    mask = np.array(
        [
            chain.joint_at(e).spring.engaged(state.vartheta[i])
            for i, e in enumerate(chain.preloaded_elements)
        ],
        dtype=bool,
    )

    q_elements = list(chain.perfect_elements)
    q_values = list(state.q)
    th_elements = list(chain.virtual_elements)
    th_values = list(state.theta)
    th_rest = [0.0] * chain.n_virtual
    th_k = [chain.joint_at(e).stiffness for e in chain.virtual_elements]
    for i, e in enumerate(chain.preloaded_elements):
        spring = chain.joint_at(e).spring
        if mask[i]:
            th_elements.append(e)
            th_values.append(state.vartheta[i])
            th_rest.append(spring.preload_offset)
            th_k.append(spring.k)
        else:
            q_elements.append(e)
            q_values.append(state.vartheta[i])

    return RegroupedState(
        rho=np.asarray(state.rho, dtype=float).copy(),
        q_tilde=np.array(q_values, dtype=float),
        theta_tilde=np.array(th_values, dtype=float),
        theta_tilde_0=np.array(th_rest, dtype=float),
        k_tilde=np.array(th_k, dtype=float),
        active_mask=mask,
        q_elements=tuple(q_elements),
        theta_elements=tuple(th_elements),
    )
