import math

import numpy as np
import pytest

from kinetostat import (
    ForceDeflectionCurve,
    ModelError,
    OrthoglideSpec,
    SpringLaw,
    compliance_map,
    critical_force,
    inverse_kinematics_unloaded,
    reproduce_table1,
    workspace_points,
)



def test_spec_validation():
    with pytest.raises(ModelError):
        OrthoglideSpec(L=0.0)
    with pytest.raises(ModelError):
        OrthoglideSpec(p_factor=0.8)  # beyond 1/sqrt(2)


def test_workspace_points_layout():
    spec = OrthoglideSpec(L=2.0, p_factor=0.45)
    q0, q1, q2 = workspace_points(spec)
    np.testing.assert_allclose(q0.as_array(), [0.0, 0.0])
    np.testing.assert_allclose(q2.as_array(), [0.9, 0.9])
    np.testing.assert_allclose(q1.as_array(), -q2.as_array())


def test_build_geometry_angles(ortho_spec, ortho_nopreload):
    # closed-form circle intersection: the preloaded angle is asin(p) at the
    # corners, positive toward (+p, +p), negative toward (-p, -p)
    q0, q1, q2 = workspace_points(ortho_spec)
    expected = math.asin(ortho_spec.p)
    for s in inverse_kinematics_unloaded(ortho_nopreload, q0):
        assert abs(s.vartheta[0]) < 1e-10
    for s in inverse_kinematics_unloaded(ortho_nopreload, q2):
        assert s.vartheta[0] == pytest.approx(expected, rel=1e-9)
    for s in inverse_kinematics_unloaded(ortho_nopreload, q1):
        assert s.vartheta[0] == pytest.approx(-expected, rel=1e-9)
    assert math.degrees(expected) == pytest.approx(26.74, abs=0.01)


def test_critical_force_monotone_none():
    d = np.linspace(0.0, 1.0, 50)
    curve = ForceDeflectionCurve(
        deltas=d, force_magnitude=2.0 * d, force_along=2.0 * d, direction=np.array([1.0, 0.0])
    )
    assert critical_force(curve) is None


def test_critical_force_quadratic_vertex_recovered():
    d = np.linspace(0.0, 1.0, 101)
    f = 1.0 - (d - 0.3) ** 2
    curve = ForceDeflectionCurve(
        deltas=d, force_magnitude=np.abs(f), force_along=f, direction=np.array([1.0, 0.0])
    )
    crit = critical_force(curve)
    assert crit is not None
    assert crit[0] == pytest.approx(0.3, abs=1e-9)
    assert crit[1] == pytest.approx(1.0, abs=1e-9)


def test_critical_force_needs_three_samples():
    curve = ForceDeflectionCurve(
        deltas=np.array([0.0, 1.0]),
        force_magnitude=np.array([0.0, 1.0]),
        force_along=np.array([0.0, 1.0]),
        direction=np.array([1.0, 0.0]),
    )
    assert critical_force(curve) is None


@pytest.fixture(scope="module")
def maps():
    spec = OrthoglideSpec()
    plain = compliance_map(spec, None, 3)
    stop = compliance_map(spec, SpringLaw(0.5, math.pi / 12.0, "positive_part"), 3)
    return plain, stop


def test_compliance_map_centre_cell(maps):
    plain, _ = maps
    assert plain.ok.all()
    centre = plain.c_max[1, 1]
    assert centre == pytest.approx(1.0, abs=1e-6)


def test_compliance_map_xy_symmetry(maps):
    plain, stop = maps
    for grid in (plain, stop):
        np.testing.assert_allclose(grid.c_max, grid.c_max.T, atol=1e-7)
        np.testing.assert_allclose(grid.c_min, grid.c_min.T, atol=1e-7)


def test_stop_limit_map_only_changes_engaged_corner(maps):
    plain, stop = maps
    # grid index (0,0) is the (-p,-p) corner, (2,2) the (+p,+p) corner
    assert stop.c_max[2, 2] <= plain.c_max[2, 2] / 2.0
    assert stop.c_max[0, 0] == pytest.approx(plain.c_max[0, 0], rel=1e-2)
    assert stop.c_max[1, 1] == pytest.approx(plain.c_max[1, 1], rel=1e-2)


@pytest.fixture(scope="module")
def table1():
    return reproduce_table1(OrthoglideSpec())


def test_table1_centre_exact(table1):
    for kv in table1.kv_factors:
        cell = table1.cells[("Q0", kv)]
        assert cell.rho == pytest.approx(1.0, abs=1e-9)
        assert cell.stiffness == pytest.approx(1.0 + kv, abs=1e-6)


def test_table1_reference_deviations_reported(table1):
    cell = table1.cells[("Q2", 0.1)]
    assert cell.rho_ref == 1.453
    assert abs(cell.rho_deviation) < 0.02
    assert cell.stiffness_ref == 0.55
    assert abs(cell.stiffness_deviation) < 0.05


def test_table1_report_serializes(table1):
    tree = table1.to_json_dict()
    assert set(tree["points"].keys()) == {"Q0", "Q1", "Q2"}
    text = table1.to_text()
    assert "Q2" in text and "F_cr" in text


def test_table1_threads_agree(table1):
    fast = reproduce_table1(OrthoglideSpec(), threads=4)
    for key, cell in table1.cells.items():
        assert fast.cells[key].rho == cell.rho
        assert fast.cells[key].stiffness == cell.stiffness
    assert fast.critical == table1.critical
