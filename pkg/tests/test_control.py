import math

import numpy as np
import pytest

from kinetostat import (
    ChainModel,
    ControlSingularityError,
    JointModel,
    ManipulatorModel,
    OrthoglideSpec,
    SpringLaw,
    Transform,
    build_planar_orthoglide,
    compensate_trajectory,
    inverse_kinematics_unloaded,
    sensitivity_matrix,
    solve_inverse_kinetostatic,
    total_wrench,
    workspace_points,
)

from conftest import linear_preload_model


def test_sensitivity_is_minus_drive_stiffness_at_centre(ortho_nopreload):
    # extending a drive at the isotropic centre pushes the platform axially
    S = sensitivity_matrix(ortho_nopreload, [0.0, 0.0], [[1.0], [1.0]])
    np.testing.assert_allclose(S, -np.eye(2), atol=1e-6)


def test_sensitivity_scales_with_drive_stiffness():
    a = build_planar_orthoglide(OrthoglideSpec(K_theta=1.0))
    b = build_planar_orthoglide(OrthoglideSpec(K_theta=2.0))
    Sa = sensitivity_matrix(a, [0.1, 0.2], [[1.0], [1.0]])
    Sb = sensitivity_matrix(b, [0.1, 0.2], [[1.0], [1.0]])
    np.testing.assert_allclose(Sb, 2.0 * Sa, atol=1e-6)


def test_sensitivity_step_refinement(ortho_nopreload):
    coarse = sensitivity_matrix(ortho_nopreload, [0.2, 0.3], [[1.0], [1.0]], h_rho=1e-5)
    fine = sensitivity_matrix(ortho_nopreload, [0.2, 0.3], [[1.0], [1.0]], h_rho=5e-6)
    rel = np.abs(fine - coarse) / np.maximum(1e-12, np.abs(fine))
    assert rel.max() <= 1e-4


def test_no_preload_keeps_kinematic_rho(ortho_nopreload):
    sol = solve_inverse_kinetostatic(ortho_nopreload, [0.3, 0.1], 1e-8)
    kin = inverse_kinematics_unloaded(ortho_nopreload, [0.3, 0.1])
    assert sol.outer_iterations == 0
    for r, s in zip(sol.rho, kin):
        np.testing.assert_allclose(r, s.rho, atol=1e-12)


@pytest.mark.parametrize("kv", [0.01, 0.1])
def test_centre_needs_no_compensation(kv):
    # springs rest at the centre pose, so the kinematic command is exact
    model = linear_preload_model(kv)
    sol = solve_inverse_kinetostatic(model, [0.0, 0.0], 1e-8)
    for r in sol.rho:
        assert r[0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kv", [0.01, 0.05, 0.1])
def test_corner_compensation_matches_closed_form(ortho_spec, kv):
    # one-chain force balance on the workspace diagonal gives
    # rho = p + c + kv asin(p) / (c - p), c = sqrt(1 - p^2)
    model = linear_preload_model(kv)
    p = ortho_spec.p
    c = math.sqrt(1.0 - p * p)
    expected = p + c + kv * math.asin(p) / (c - p)
    sol = solve_inverse_kinetostatic(model, [p, p], 1e-10)
    for r in sol.rho:
        assert r[0] == pytest.approx(expected, abs=1e-6)
    assert sol.residual_wrench < 1e-10
    assert sol.full_rank


def test_resolving_at_returned_rho_balances(ortho_spec):
    model = linear_preload_model(0.1)
    q2 = workspace_points(ortho_spec)[2]
    sol = solve_inverse_kinetostatic(model, q2, 1e-8)
    F, _ = total_wrench(model, q2, sol.rho)
    assert np.linalg.norm(F) < 1e-8


def test_forward_consistency(ortho_spec):
    # walking the pose back via the stiffness map must land on the target
    model = linear_preload_model(0.1)
    q2 = workspace_points(ortho_spec)[2].as_array()
    sol = solve_inverse_kinetostatic(model, q2, 1e-10)
    from kinetostat import manipulator_stiffness

    t = q2.copy()
    for _ in range(20):
        F, _ = total_wrench(model, t, sol.rho)
        if np.linalg.norm(F) < 1e-12:
            break
        K = manipulator_stiffness(model, t, sol.rho).K_sigma
        t = t - np.linalg.solve(K, F)
    assert np.linalg.norm(t - q2) < 1e-8


def test_monotone_residual_history(ortho_spec):
    model = linear_preload_model(0.1)
    sol = solve_inverse_kinetostatic(model, [0.2, 0.35], 1e-10)
    assert all(b < a for a, b in zip(sol.history, sol.history[1:]))


def test_prescribed_external_wrench(ortho_spec):
    # hold the pose against a pulling load instead of zero wrench
    model = linear_preload_model(0.05)
    target_wrench = np.array([0.02, -0.01])
    sol = solve_inverse_kinetostatic(model, [0.1, 0.2], 1e-10, f_ext=target_wrench)
    F, _ = total_wrench(model, [0.1, 0.2], sol.rho)
    np.testing.assert_allclose(F, target_wrench, atol=1e-9)


def test_trajectory_batch(ortho_spec):
    model = linear_preload_model(0.05)
    poses = [[0.0, 0.0], [0.1, 0.1], [0.2, 0.2]]
    sols = compensate_trajectory(model, poses, 1e-8)
    assert len(sols) == 3
    for pose, sol in zip(poses, sols):
        F, _ = total_wrench(model, pose, sol.rho)
        assert np.linalg.norm(F) < 1e-8


def test_coincident_legs_raise_control_singularity():
    # two identical x legs: actuator forces are collinear at every pose
    def leg():
        return ChainModel(
            task_dim=2,
            base_pose=Transform.identity(),
            elements=[
                (Transform.identity(), JointModel(kind="actuated", motion="translational", axis=(1.0, 0.0, 0.0))),
                (Transform.identity(), JointModel(kind="virtual_elastic", motion="translational", axis=(1.0, 0.0, 0.0), stiffness=1.0)),
                (
                    Transform.identity(),
                    JointModel(
                        kind="preloaded_passive",
                        motion="rotational",
                        axis=(0.0, 0.0, -1.0),
                        spring=SpringLaw(0.05, 0.1, "linear"),
                    ),
                ),
            ],
            tool_transform=Transform(translation=(-1.0, 0.0, 0.0)),
            ik_seed=np.array([1.0, 0.0]),
        )

    twin = ManipulatorModel(task_dim=2, chains=[leg(), leg()], name="coincident")
    with pytest.raises(ControlSingularityError):
        solve_inverse_kinetostatic(twin, [0.1, 0.2], 1e-10)
