import math

import numpy as np
from hypothesis import given, strategies as st

from kinetostat import geometry as geo

angles = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@given(angles)
def test_wrap_angle_range(a):
    w = geo.wrap_angle(a)
    assert -math.pi < w <= math.pi


@given(angles)
def test_wrap_angle_periodic(a):
    assert math.isclose(geo.wrap_angle(a + 2 * math.pi), geo.wrap_angle(a), abs_tol=1e-9)


@given(st.floats(-1.4, 1.4), st.floats(-1.4, 1.4), st.floats(-3.0, 3.0))
def test_rpy_round_trip(rx, ry, rz):
    R = geo.rpy_matrix((rx, ry, rz))
    back = geo.rpy_from_matrix(R)
    np.testing.assert_allclose(geo.rpy_matrix(back), R, atol=1e-12)


@given(st.floats(-3.0, 3.0))
def test_rotation_about_is_orthonormal(angle):
    axis = np.array([1.0, 2.0, -0.5])
    axis /= np.linalg.norm(axis)
    R = geo.rotation_about(axis, angle)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) > 0.0


def test_rotation_about_z_matches_planar():
    R = geo.rotation_about((0.0, 0.0, 1.0), 0.3)
    c, s = math.cos(0.3), math.sin(0.3)
    np.testing.assert_allclose(R[:2, :2], [[c, -s], [s, c]], atol=1e-15)


def test_euler_rate_matrix_identity_at_zero():
    np.testing.assert_allclose(geo.euler_rate_matrix((0.0, 0.0, 0.0)), np.eye(3), atol=1e-15)
