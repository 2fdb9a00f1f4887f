"""GMRES with a full Arnoldi basis and sketched GMRES on any basis constructor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arnoldi import ArnoldiConfig, StopReason, arnoldi_step, init_state, measure_cond
from .linalg import EPS, CsrMatrix, QrUpdatable, least_squares, spmv
from .sketching import SketchOperator, apply, identity_new


@dataclass
class SolveReport:
    """Per-iteration residual history of one solve.

    ``resid`` is the monitored residual: the Hessenberg least-squares
    residual for GMRES, ``|S(A V y - b)|`` for sGMRES. ``true_resid`` and
    ``cond`` are NaN except at checkpoints. ``basis`` holds the final V_j.
    """

    method: str
    dims: list = field(default_factory=list)
    resid: list = field(default_factory=list)
    true_resid: list = field(default_factory=list)
    cond: list = field(default_factory=list)
    x: np.ndarray | None = None
    stop_reason: str = ""
    rank_deficient: bool = False
    basis: np.ndarray | None = None

    def _record(self, j, resid):
        self.dims.append(j)
        self.resid.append(float(resid))
        self.true_resid.append(math.nan)
        self.cond.append(math.nan)

    def rows(self):
        return list(zip(self.dims, self.resid, self.true_resid, self.cond))


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def gmres(a: CsrMatrix, b, m_max: int, tol: float = 1e-8, true_resid_stride: int = 10,
          cond_stride: int = 0) -> SolveReport:
    """GMRES without restarts; the small Hessenberg problem is updated with Givens rotations.

    ``cond_stride`` > 0 also records cond(V_j) at those iterations.
    """
    b = np.asarray(b, dtype=np.float64)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        raise ValueError("b must be nonzero")
    cfg = ArnoldiConfig(m_max=m_max, method="full", cond_threshold=math.inf)
    state = init_state(b, cfg)
    rep = SolveReport("gmres")
    rot = []
    g = np.zeros(m_max + 1)
    g[0] = bnorm
    r = np.zeros((m_max + 1, m_max))

    def solution(j):
        y = np.linalg.solve(np.triu(r[:j, :j]), g[:j]) if j else np.zeros(0)
        return state.v_store[:, :j] @ y

    reason = StopReason.MAX_DIM.value
    while state.j < m_max:
        arnoldi_step(state, a)
        j = state.j
        col = state.h_store[: j + 1, j - 1].copy()
        for i, (c, s) in enumerate(rot):
            col[i], col[i + 1] = c * col[i] + s * col[i + 1], -s * col[i] + c * col[i + 1]
        c, s = _givens(col[j - 1], col[j])
        rot.append((c, s))
        col[j - 1], col[j] = c * col[j - 1] + s * col[j], 0.0
        r[:j, j - 1] = col[:j]
        g[j - 1], g[j] = c * g[j - 1], -s * g[j - 1]
        rep._record(j, abs(g[j]))
        done = state.breakdown or abs(g[j]) <= tol * bnorm
        if done or j % true_resid_stride == 0 or j == m_max:
            x = solution(j)
            rep.true_resid[-1] = float(np.linalg.norm(spmv(a, x) - b))
            rep.x = x
        if cond_stride and (j % cond_stride == 0 or done):
            rep.cond[-1] = measure_cond(state.v_store[:, :j]).cond
        if state.breakdown:
            reason = StopReason.BREAKDOWN.value
            break
        if done:
            reason = "converged"
            break
    rep.stop_reason = reason
    rep.basis = state.v_store[:, : state.j]
    return rep


def sgmres(a: CsrMatrix, b, cfg: ArnoldiConfig, sketch: SketchOperator | None = None, tol: float = 1e-8,
           true_resid_stride: int = 10, ignore_cond: bool = False, method_name: str | None = None) -> SolveReport:
    """Sketched GMRES: minimize |S(A V_j y - b)| over the basis from ``cfg``.

    The QR factorization of S A V grows by one column per iteration, so the
    sketched residual is available every step; x = V y is formed only at
    checkpoints and at the stop. The basis condition number is measured
    every ``cfg.cond_check_stride`` steps and stops the run above
    ``cfg.cond_threshold`` unless ``ignore_cond`` is set.
    """
    b = np.asarray(b, dtype=np.float64)
    if sketch is None:
        sketch = identity_new(b.shape[0])
    if sketch.s < cfg.m_max + 1:
        raise ValueError("sGMRES needs s >= m_max + 1")
    state = init_state(b, cfg, sketch)
    sb = apply(sketch, b)
    sbnorm = np.linalg.norm(sb)
    qr = QrUpdatable(sketch.s, capacity=cfg.m_max)
    rep = SolveReport(method_name or (cfg.method if cfg.strategy is None else f"ssa-{cfg.strategy}"))

    def solve(j):
        diag = np.abs(np.diag(qr.r))
        if diag.min() <= sketch.s * EPS * diag.max():
            rep.rank_deficient = True
            y = least_squares(state.sav_store[:, :j], sb)
            return y, float(np.linalg.norm(state.sav_store[:, :j] @ y - sb))
        return qr.solve(sb)

    reason = StopReason.MAX_DIM.value
    y = np.zeros(0)
    while state.j < cfg.m_max:
        arnoldi_step(state, a)
        j = state.j
        qr.append(state.sav_store[:, j - 1])
        y, res = solve(j)
        rep._record(j, res)
        done = state.breakdown or res <= tol * sbnorm
        cond_due = j % cfg.cond_check_stride == 0
        if cond_due or done or j == cfg.m_max:
            rep.cond[-1] = measure_cond(state.v_store[:, :j]).cond
        if done or j % true_resid_stride == 0 or j == cfg.m_max:
            x = state.v_store[:, :j] @ y
            rep.true_resid[-1] = float(np.linalg.norm(spmv(a, x) - b))
            rep.x = x
        if state.breakdown:
            reason = StopReason.BREAKDOWN.value
            break
        if done:
            reason = "converged"
            break
        if not ignore_cond and cond_due and rep.cond[-1] > cfg.cond_threshold:
            reason = StopReason.COND_EXCEEDED.value
            break
    if rep.x is None or math.isnan(rep.true_resid[-1]):
        x = state.v_store[:, : state.j] @ y
        rep.true_resid[-1] = float(np.linalg.norm(spmv(a, x) - b))
        rep.x = x
    rep.stop_reason = reason
    rep.basis = state.v_store[:, : state.j]
    return rep
