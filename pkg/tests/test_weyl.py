import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ebrank.channel import apply, is_trace_preserving, tp_residual
from ebrank.linalg import DimensionError, matrix_unit
from ebrank.weyl import (
    WeylIndex,
    all_weyl,
    clock_matrix,
    covariant_channel,
    shift_matrix,
    weyl,
    weyl_matrix,
    weyl_twirl_offdiag,
)


def test_d2_generators():
    np.testing.assert_array_equal(shift_matrix(2), [[0, 1], [1, 0]])
    np.testing.assert_allclose(clock_matrix(2), np.diag([1, -1]), atol=1e-15)


def test_shift_moves_basis_forward():
    d = 4
    u = shift_matrix(d)
    for k in range(d):
        np.testing.assert_array_equal(u @ np.eye(d)[k], np.eye(d)[(k + 1) % d])


def test_clock_entry_d3():
    assert clock_matrix(3)[2, 2] == pytest.approx(np.exp(4j * np.pi / 3))


def test_w11_d2():
    np.testing.assert_allclose(weyl_matrix(2, 1, 1), [[0, -1], [1, 0]], atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_weyl_is_product_of_powers(d):
    u, v = shift_matrix(d), clock_matrix(d)
    for i, j in itertools.product(range(d), repeat=2):
        expected = np.linalg.matrix_power(u, i) @ np.linalg.matrix_power(v, j)
        np.testing.assert_allclose(weyl(WeylIndex(d, i, j)), expected, atol=1e-12)
    np.testing.assert_array_equal(weyl_matrix(d, 0, 0), np.eye(d))


def test_all_weyl_unitary_d3():
    for w in all_weyl(3):
        np.testing.assert_allclose(w.conj().T @ w, np.eye(3), atol=1e-12)


def test_all_weyl_row_major_order():
    ws = all_weyl(3)
    np.testing.assert_array_equal(ws[1 * 3 + 2], weyl_matrix(3, 1, 2))


@pytest.mark.parametrize("d", range(2, 9))
def test_commutation(d):
    # V U = w U V
    u, v = weyl_matrix(d, 1, 0), weyl_matrix(d, 0, 1)
    omega = np.exp(2j * np.pi / d)
    np.testing.assert_allclose(v @ u, omega * u @ v, atol=1e-12)


@pytest.mark.parametrize("d", range(2, 7))
def test_trace_orthogonality(d):
    ws = all_weyl(d).reshape(d * d, -1)
    gram = ws.conj() @ ws.T
    np.testing.assert_allclose(gram, d * np.eye(d * d), atol=1e-12)


@pytest.mark.parametrize("d,i,p,q", [(2, 0, 0, 1), (3, 1, 2, 0)])
def test_twirl_examples(d, i, p, q):
    np.testing.assert_allclose(weyl_twirl_offdiag(d, i, p, q), 0, atol=1e-12)


def test_twirl_all_triples_d5():
    for i, p, q in itertools.product(range(5), repeat=3):
        if p != q:
            np.testing.assert_allclose(weyl_twirl_offdiag(5, i, p, q), 0, atol=1e-12)


def test_twirl_rejects_diagonal_unit():
    with pytest.raises(ValueError):
        weyl_twirl_offdiag(3, 0, 1, 1)


def test_bad_indices():
    with pytest.raises(ValueError):
        WeylIndex(3, 3, 0)
    with pytest.raises(ValueError):
        shift_matrix(1)


def test_covariant_channel_basis_vector_is_tp():
    ch = covariant_channel([1, 0], [1, 0])
    assert len(ch) == 4
    assert tp_residual(ch) <= 1e-10


def test_covariant_channel_dimension_mismatch():
    with pytest.raises(DimensionError):
        covariant_channel([1, 0], [1, 0, 0])


unit_pairs = st.integers(2, 5).flatmap(
    lambda d: st.tuples(st.just(d), st.integers(0, 2 ** 32 - 1))
)


def _random_unit_pair(d, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    y = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return x / np.linalg.norm(x), y / np.linalg.norm(y)


@settings(max_examples=30, deadline=None)
@given(unit_pairs)
def test_covariant_channel_structure(args):
    d, seed = args
    ch = covariant_channel(*_random_unit_pair(d, seed))
    assert is_trace_preserving(ch)
    for k in range(d):
        out = apply(ch, matrix_unit(d, k, k))
        np.testing.assert_allclose(out - np.diag(np.diag(out)), 0, atol=1e-12)
    for k, l in itertools.permutations(range(d), 2):
        np.testing.assert_allclose(np.diag(apply(ch, matrix_unit(d, k, l))), 0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(unit_pairs)
def test_covariance(args):
    d, seed = args
    ch = covariant_channel(*_random_unit_pair(d, seed))
    rng = np.random.default_rng(seed + 1)
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    w = weyl_matrix(d, 1, d - 1)
    np.testing.assert_allclose(apply(ch, w @ x @ w.conj().T), w @ apply(ch, x) @ w.conj().T, atol=1e-10)
