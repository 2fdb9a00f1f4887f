import math

import numpy as np
import pytest

from ssarnoldi.arnoldi import ArnoldiConfig, arnoldi_run
from ssarnoldi.linalg import CsrMatrix, spmv
from ssarnoldi.matrix_io import conv_diff_2d, make_rhs, tridiag_toeplitz
from ssarnoldi.sketching import apply, embedding_distortion, gaussian_new, identity_new, srht_new
from ssarnoldi.solvers import gmres, sgmres


def checkpoints(rep):
    return [(j, t) for j, t in zip(rep.dims, rep.true_resid) if not math.isnan(t)]


def test_gmres_identity_converges_in_one_step():
    b = make_rhs("gaussian", 20, seed=1)
    rep = gmres(CsrMatrix.identity(20), b, 10)
    assert rep.stop_reason in ("converged", "breakdown")
    assert rep.dims == [1]
    np.testing.assert_allclose(rep.x, b, atol=1e-14)


def test_gmres_finite_termination():
    a = CsrMatrix.from_dense(np.diag(np.arange(1.0, 11)))
    rep = gmres(a, np.ones(10), 20, tol=1e-12)
    assert rep.dims[-1] == 10
    assert rep.true_resid[-1] < 1e-10


def test_gmres_monotone_and_consistent():
    a = conv_diff_2d(32, 50.0)
    b = make_rhs("gaussian", 1024, seed=2)
    rep = gmres(a, b, 120, tol=1e-10)
    assert np.all(np.diff(rep.resid) <= 1e-12 * rep.resid[0])
    final = np.linalg.norm(spmv(a, rep.x) - b)
    assert final == pytest.approx(rep.true_resid[-1], rel=1e-12)
    assert final == pytest.approx(rep.resid[-1], rel=1e-6, abs=1e-12 * np.linalg.norm(b))


def test_gmres_breakdown_exact_solution():
    a = CsrMatrix.from_dense(np.diag([1.0, 2.0, 3.0, 4.0]))
    rep = gmres(a, np.array([1.0, 1.0, 0, 0]), 4, tol=0.0)
    assert rep.stop_reason == "breakdown"
    assert rep.true_resid[-1] < 1e-14


def test_sgmres_identity_sketch_full_matches_gmres():
    a = conv_diff_2d(16, 20.0)
    b = make_rhs("gaussian", 256, seed=3)
    ref = gmres(a, b, 40, tol=1e-12, true_resid_stride=1)
    rep = sgmres(a, b, ArnoldiConfig(m_max=40), identity_new(256), tol=1e-12, true_resid_stride=1)
    n = min(len(ref.resid), len(rep.resid))
    np.testing.assert_allclose(rep.resid[:n], ref.resid[:n], rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(rep.true_resid[:n], ref.true_resid[:n], rtol=1e-8, atol=1e-10)


def test_sgmres_identity_matrix_one_step():
    b = make_rhs("gaussian", 64, seed=4)
    cfg = ArnoldiConfig.from_name("ssa-pinv", m_max=10, s=30)
    rep = sgmres(CsrMatrix.identity(64), b, cfg, srht_new(64, 30, 5))
    assert rep.dims[-1] == 1
    np.testing.assert_allclose(rep.x, b, atol=1e-12)


def test_sgmres_sketched_residual_consistency():
    a = conv_diff_2d(24, 100.0)
    b = make_rhs("gaussian", 576, seed=5)
    sk = srht_new(576, 82, seed=6)
    rep = sgmres(a, b, ArnoldiConfig.from_name("ssa-omp", m_max=40, k=4, s=82), sk)
    direct = np.linalg.norm(apply(sk, spmv(a, rep.x) - b))
    assert direct == pytest.approx(rep.resid[-1], rel=1e-10)
    assert all(math.isfinite(t) for _, t in checkpoints(rep))
    assert len(rep.dims) == len(rep.resid) == len(rep.true_resid) == len(rep.cond)


@pytest.mark.parametrize("seed", range(4))
def test_sgmres_quasi_optimality_with_measured_distortion(seed):
    a = tridiag_toeplitz(400, 3.0, -1.2, -0.6)
    b = make_rhs("gaussian", 400, seed=seed)
    m = 20
    sk = gaussian_new(400, 200, seed=seed + 10)
    cfg = ArnoldiConfig.from_name("ssa-pinv", m_max=m, k=3, s=200, cond_threshold=1e14)
    rep = sgmres(a, b, cfg, sk, tol=0.0, true_resid_stride=1)
    ref = gmres(a, b, m, tol=0.0, true_resid_stride=1)
    state, _ = arnoldi_run(a, b, cfg, sk, stop_on_cond=False)
    av = a.to_dense() @ state.v_store[:, :m]
    eps = embedding_distortion(sk, np.column_stack([av, b]))
    assert eps < 1
    factor = (1 + eps) / (1 - eps)
    for j, t in checkpoints(rep):
        assert t <= factor * ref.true_resid[j - 1] + 1e-8


def test_sgmres_stops_on_cond_unless_ignored():
    a = conv_diff_2d(24, 1000.0)
    b = make_rhs("gaussian", 576, seed=7)
    sk = srht_new(576, 122, seed=8)
    cfg = ArnoldiConfig.from_name("truncated", m_max=60, k=1, s=122, cond_threshold=1e4)
    stopped = sgmres(a, b, cfg, sk, tol=0.0)
    assert stopped.stop_reason == "cond_exceeded"
    full = sgmres(a, b, cfg, sk, tol=0.0, ignore_cond=True)
    assert full.dims == list(range(1, 61))
    assert full.stop_reason == "max_dim"


def test_sgmres_rank_deficiency_flag():
    # A = u v^T maps every basis vector onto u, so S A V has rank one
    r = np.random.default_rng(9)
    a = CsrMatrix.from_dense(np.outer(r.standard_normal(64), r.standard_normal(64)))
    b = r.standard_normal(64)
    cfg = ArnoldiConfig.from_name("truncated", m_max=6, k=1, s=20, cond_threshold=1e300)
    rep = sgmres(a, b, cfg, srht_new(64, 20, seed=1), tol=0.0, ignore_cond=True)
    assert rep.rank_deficient
    assert np.all(np.isfinite(rep.x))
    assert rep.resid[-1] <= rep.resid[0] * (1 + 1e-12)


def test_sgmres_rejects_small_sketch():
    with pytest.raises(ValueError):
        sgmres(CsrMatrix.identity(8), np.ones(8), ArnoldiConfig(m_max=5), srht_new(8, 4, 0))
