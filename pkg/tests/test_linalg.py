import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssarnoldi.linalg import (
    CsrMatrix,
    QrUpdatable,
    cond2,
    jacobi_svd,
    least_squares,
    singular_values,
    solve_upper,
    spmv,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_csr_from_coo_sums_duplicates_and_sorts():
    a = CsrMatrix.from_coo(2, 3, [1, 0, 0, 1], [2, 1, 1, 0], [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(a.to_dense(), [[0, 5, 0], [4, 0, 1]])
    assert a.nnz == 3
    assert a.shape == (2, 3)


def test_csr_rejects_bad_structure():
    with pytest.raises(ValueError):
        CsrMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        CsrMatrix(1, 2, np.array([0, 2]), np.array([1, 0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        CsrMatrix.from_coo(1, 1, [0], [0], [np.nan])


def test_spmv_matches_dense():
    d = rng().standard_normal((7, 5))
    d[d < 0.3] = 0
    a = CsrMatrix.from_dense(d)
    x = rng(1).standard_normal(5)
    np.testing.assert_allclose(spmv(a, x), d @ x, atol=1e-14)
    np.testing.assert_allclose(a @ x, d @ x, atol=1e-14)
    with pytest.raises(ValueError):
        spmv(a, np.ones(4))


def test_spmv_empty_rows():
    a = CsrMatrix.from_coo(3, 3, [2], [0], [5.0])
    np.testing.assert_array_equal(spmv(a, np.array([1.0, 2, 3])), [0, 0, 5])


def test_identity():
    x = np.arange(4.0)
    np.testing.assert_array_equal(CsrMatrix.identity(4) @ x, x)


def test_qr_updatable_matches_batch_qr():
    m = rng().standard_normal((12, 6))
    qr = QrUpdatable(12, capacity=2)
    for j in range(6):
        qr.append(m[:, j])
    r = qr.r
    assert r.shape == (6, 6)
    assert np.all(np.diag(r) >= 0)
    np.testing.assert_allclose(qr.q_thin() @ r, m, atol=1e-13)
    np.testing.assert_allclose(qr.q_thin().T @ qr.q_thin(), np.eye(6), atol=1e-14)
    _, r_ref = np.linalg.qr(m)
    np.testing.assert_allclose(np.abs(r), np.abs(r_ref), atol=1e-12)


def test_qr_solve_least_squares():
    m = rng(2).standard_normal((20, 5))
    b = rng(3).standard_normal(20)
    qr = QrUpdatable(20)
    for j in range(5):
        qr.append(m[:, j])
    y, res = qr.solve(b)
    y_ref = np.linalg.lstsq(m, b, rcond=None)[0]
    np.testing.assert_allclose(y, y_ref, atol=1e-12)
    assert res == pytest.approx(np.linalg.norm(m @ y_ref - b), rel=1e-12)


def test_qr_apply_roundtrip():
    m = rng(4).standard_normal((9, 4))
    qr = QrUpdatable(9)
    for j in range(4):
        qr.append(m[:, j])
    x = rng(5).standard_normal(9)
    np.testing.assert_allclose(qr.apply_q(qr.apply_qt(x)), x, atol=1e-14)


def test_solve_upper():
    r = np.triu(rng(6).standard_normal((5, 5))) + 5 * np.eye(5)
    b = rng(7).standard_normal(5)
    np.testing.assert_allclose(r @ solve_upper(r, b), b, atol=1e-12)


def test_jacobi_svd_known_values():
    a = np.array([[3.0, 0], [4, 5]])
    _, s, _ = jacobi_svd(a)
    np.testing.assert_allclose(s, [np.sqrt(45), np.sqrt(5)], rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 6), st.integers(0, 10**6))
def test_jacobi_svd_matches_lapack(nc, extra, seed):
    a = rng(seed).standard_normal((nc + extra, nc))
    u, s, vt = jacobi_svd(a)
    ref = np.linalg.svd(a, compute_uv=False)
    np.testing.assert_allclose(s, ref, rtol=1e-12, atol=1e-13 * ref[0])
    assert np.all(np.diff(s) <= 0)
    np.testing.assert_allclose((u * s) @ vt, a, atol=1e-12 * max(1, ref[0]))


def test_singular_values_ill_conditioned():
    q1, _ = np.linalg.qr(rng(8).standard_normal((200, 60)))
    q2, _ = np.linalg.qr(rng(9).standard_normal((60, 60)))
    sigma = np.logspace(0, -12, 60)
    s = singular_values((q1 * sigma) @ q2.T)
    np.testing.assert_allclose(s, sigma, rtol=1e-3)
    assert cond2((q1 * sigma) @ q2.T) == pytest.approx(1e12, rel=1e-2)


def test_cond2_rank_deficient_is_inf():
    assert cond2(np.array([[1.0, 1.0], [1.0, 1.0]])) > 1e15
    assert cond2(np.zeros((3, 2))) == np.inf


def test_cond2_orthonormal_is_one():
    q, _ = np.linalg.qr(rng(10).standard_normal((30, 7)))
    assert cond2(q) == pytest.approx(1.0, abs=1e-13)


def test_least_squares_full_rank_and_deficient():
    m = rng(11).standard_normal((15, 4))
    b = rng(12).standard_normal(15)
    np.testing.assert_allclose(least_squares(m, b), np.linalg.lstsq(m, b, rcond=None)[0], atol=1e-12)
    dup = np.column_stack([m, m[:, 0]])
    y = least_squares(dup, b)
    np.testing.assert_allclose(y, np.linalg.lstsq(dup, b, rcond=None)[0], atol=1e-10)
    with pytest.raises(ValueError):
        least_squares(np.ones((2, 3)), np.ones(2))
