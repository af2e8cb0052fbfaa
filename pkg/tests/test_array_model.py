import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from offgrid_doa.array_model import (
    B_LITERAL,
    AngularGrid,
    ArrayGeometry,
    build_dictionary,
    constraint_matrix,
    is_feasible,
    steering_derivative,
    steering_matrix,
    steering_vector,
    vectorize_covariance,
)


def test_steering_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(ArrayGeometry.ula(8), 0.0), np.ones(8))


def test_steering_endfire_two_sensors():
    np.testing.assert_allclose(steering_vector(ArrayGeometry.ula(2), 90.0), [1, -1], atol=1e-15)


def test_steering_matches_scalar_evaluation():
    geo = ArrayGeometry.ula(8)
    a = steering_vector(geo, 13.2220)
    import cmath
    import math
    ref = [cmath.exp(-2j * math.pi * 0.5 * m * math.sin(math.radians(13.2220))) for m in range(8)]
    np.testing.assert_allclose(a, ref, rtol=0, atol=1e-14)


def test_steering_rejects_nan():
    with pytest.raises(ValueError):
        steering_vector(ArrayGeometry.ula(4), float("nan"))


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry([0.0])
    with pytest.raises(ValueError):
        ArrayGeometry([0.0, 0.5, 0.5])


def test_grid_default_and_nearest():
    g = AngularGrid.default()
    assert g.N == 360 and g.r == 0.25
    assert g.phi[0] == -90.0 and g.phi[-1] == 89.5
    assert g.phi[g.nearest(13.2220)] == 13.0
    assert g.phi[g.nearest(28.6022)] == 28.5
    with pytest.raises(ValueError):
        AngularGrid(0.0, 0.0, 10)


def test_derivative_matches_finite_difference():
    geo = ArrayGeometry.ula(8)
    th = np.array([-40.0, 13.2, 60.0])
    h = 1e-6
    fd = (steering_matrix(geo, th + h) - steering_matrix(geo, th - h)) / (2 * h)
    np.testing.assert_allclose(steering_derivative(geo, th), fd, atol=1e-8)


def test_dictionary_columns_at_broadside():
    geo = ArrayGeometry.ula(8)
    grid = AngularGrid(-1.0, 0.5, 5)  # atom 2 is phi = 0
    D = build_dictionary(geo, grid, b_mode=B_LITERAL)
    np.testing.assert_allclose(D.A[:, 2], np.ones(64))
    k = -2j * np.pi * geo.sensor_positions * np.pi / 180.0
    np.testing.assert_allclose(D.B[:, 2], np.kron(k, k), atol=1e-15)


def test_dictionary_matches_elementwise_kronecker():
    geo = ArrayGeometry.ula(2)
    grid = AngularGrid(-10.0, 10.0, 3)
    D = build_dictionary(geo, grid)
    for i, phi in enumerate(grid.phi):
        a = steering_vector(geo, phi)
        da = steering_derivative(geo, phi)[:, 0]
        A = np.array([np.conj(a[m1]) * a[m2] for m1 in range(2) for m2 in range(2)])
        B = np.array([np.conj(da[m1]) * a[m2] + np.conj(a[m1]) * da[m2]
                      for m1 in range(2) for m2 in range(2)])
        np.testing.assert_allclose(D.A[:, i], A, atol=1e-15)
        np.testing.assert_allclose(D.B[:, i], B, atol=1e-15)


def test_product_b_is_first_order_model():
    # vec(a(phi + beta) a(phi + beta)^H) = A_i + beta B_i + O(beta^2)
    geo = ArrayGeometry.ula(8)
    grid = AngularGrid.default()
    D = build_dictionary(geo, grid)
    i, beta = grid.nearest(13.0), 1e-4
    a = steering_vector(geo, 13.0 + beta)
    exact = vectorize_covariance(np.outer(a, a.conj()))
    err = np.linalg.norm(exact - (D.A[:, i] + beta * D.B[:, i]))
    assert err < 1e-8


def test_vectorize_examples(rng):
    np.testing.assert_array_equal(vectorize_covariance(np.eye(2)), [1, 0, 0, 1])
    a = steering_vector(ArrayGeometry.ula(2), 0.0)
    np.testing.assert_allclose(vectorize_covariance(2 * np.outer(a, a.conj())), 2 * np.ones(4))
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    R = X + X.conj().T
    ref = [R[i, j] for j in range(3) for i in range(3)]
    np.testing.assert_array_equal(vectorize_covariance(R), ref)
    with pytest.raises(ValueError):
        vectorize_covariance(np.zeros((2, 3)))


def test_constraint_matrix_examples():
    C = constraint_matrix(1, 0.25)
    np.testing.assert_allclose(C @ np.array([1.0, 0.1]), [-1, -0.15, -0.35])
    out = C @ np.array([1.0, 0.5])
    assert out[1] == pytest.approx(0.25) and out[0] < 0 and out[2] < 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=8, max_size=8), st.sampled_from([0.1, 0.25, 1.0]))
def test_constraint_matrix_matches_feasibility(vals, r):
    x = np.asarray(vals)
    C = constraint_matrix(4, r)
    assert bool(np.all(C @ x <= 0)) == is_feasible(x, r)


def test_dictionary_is_read_only(desk_dictionary):
    with pytest.raises(ValueError):
        desk_dictionary.G[0, 0] = 0
