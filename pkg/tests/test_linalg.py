import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ebrank.linalg import (
    DegenerateSpectrumError,
    DimensionError,
    NotHermitianError,
    NotUnitaryError,
    Tolerance,
    as_matrix,
    as_vector,
    dagger,
    frobenius_distance,
    hermitian_eigen,
    inner,
    is_psd,
    matmul,
    matrix_unit,
    min_eigenvalue,
    outer,
    rank_with_tol,
    tensor,
    trace,
    unitary_eigen,
)
from ebrank.weyl import clock_matrix, shift_matrix

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.builds(lambda a, b: a + 1j * b, arrays(float, shape, elements=finite),
                     arrays(float, shape, elements=finite))


def test_as_matrix_rejects_nan_and_bad_shapes():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(DimensionError):
        as_matrix([1, 2, 3])
    with pytest.raises(DimensionError):
        as_matrix(np.eye(2), rows=3)
    with pytest.raises(ValueError):
        as_vector([1.0, np.inf])


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_trace_requires_square():
    assert trace(np.diag([1, 2j])) == 1 + 2j
    with pytest.raises(DimensionError):
        trace(np.ones((2, 3)))


def test_inner_is_conjugate_linear_in_first_argument():
    x = np.array([1j, 0])
    y = np.array([1, 0])
    assert inner(x, y) == -1j
    z = np.array([2.0, 3.0j])
    np.testing.assert_allclose(outer(x, y) @ z, x * inner(y, z))


def test_tensor_block_layout():
    a = np.array([[1, 2], [3, 4]])
    b = np.eye(2)
    np.testing.assert_array_equal(tensor(a, b)[2:, :2], 3 * b)


def test_rank_known_values():
    assert rank_with_tol(np.zeros((3, 3))) == 0
    assert rank_with_tol(np.diag([1, 1e-12, 0])) == 1
    assert rank_with_tol(np.diag([1, 1e-6, 0])) == 2
    assert rank_with_tol(np.diag([1, 1e-6, 0]), Tolerance(rank_rel_eps=1e-5)) == 1


def test_hermitian_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


def test_hermitian_check_scales_with_norm():
    a = 1e6 * np.array([[1, 1], [1, 1]], dtype=complex)
    a[0, 1] += 1e-6
    vals, _ = hermitian_eigen(a)
    np.testing.assert_allclose(vals, [0, 2e6], atol=1e-3)


def test_is_psd_and_min_eigenvalue():
    assert is_psd(np.diag([0.0, 1.0]))
    assert not is_psd(np.diag([-1e-6, 1.0]))
    assert is_psd(np.diag([-1e-12, 1.0]))
    assert min_eigenvalue(np.diag([3.0, -2.0])) == pytest.approx(-2.0)


def test_unitary_eigen_shift_matrix_orders_by_argument():
    d = 5
    vals, vecs = unitary_eigen(shift_matrix(d))
    np.testing.assert_allclose(vals, np.exp(2j * np.pi * np.arange(d) / d), atol=1e-12)
    np.testing.assert_allclose(shift_matrix(d) @ vecs, vecs * vals, atol=1e-12)
    np.testing.assert_allclose(dagger(vecs) @ vecs, np.eye(d), atol=1e-12)


def test_unitary_eigen_degenerate_and_non_unitary():
    with pytest.raises(DegenerateSpectrumError) as info:
        unitary_eigen(np.diag([1, 1, -1]))
    assert info.value.min_gap == pytest.approx(0.0)
    with pytest.raises(NotUnitaryError):
        unitary_eigen(np.diag([1, 2]))


def test_clock_is_diagonal_roots_of_unity():
    vals, _ = unitary_eigen(clock_matrix(3))
    np.testing.assert_allclose(np.sort_complex(vals), np.sort_complex(np.exp(2j * np.pi * np.arange(3) / 3)))


def test_matrix_unit():
    e = matrix_unit(3, 0, 2)
    assert e[0, 2] == 1 and np.count_nonzero(e) == 1


@settings(max_examples=40, deadline=None)
@given(complex_arrays((4, 4)))
def test_hermitian_part_has_real_spectrum_and_reconstructs(a):
    h = a + a.conj().T
    vals, vecs = hermitian_eigen(h)
    assert np.all(np.diff(vals) >= -1e-12)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.conj().T, h, atol=1e-9 * max(1, np.abs(h).max()))


@settings(max_examples=40, deadline=None)
@given(complex_arrays((3, 2)), complex_arrays((2, 3)))
def test_rank_of_product_at_most_inner_dimension(a, b):
    assert rank_with_tol(a @ b) <= 2


@settings(max_examples=40, deadline=None)
@given(complex_arrays((3, 3)))
def test_frobenius_distance_symmetric(a):
    b = np.eye(3)
    assert frobenius_distance(a, b) == pytest.approx(frobenius_distance(b, a))
    assert frobenius_distance(a, a) == 0.0
