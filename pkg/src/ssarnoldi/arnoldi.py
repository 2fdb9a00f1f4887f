"""Krylov basis construction.

Methods: full Arnoldi (MGS with one conditional reorthogonalization),
truncated Arnoldi with plain or sketched coefficients, sketched-orthonormal
Arnoldi, and sketch-and-select Arnoldi with a pluggable selection
strategy. Column indices are 0-based; after ``j`` completed iterations the
basis holds ``j + 1`` vectors (``j`` after a breakdown).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import CsrMatrix, QrUpdatable, singular_values, spmv
from .selection import STRATEGIES, select
from .sketching import SketchOperator, apply

METHODS = ("full", "truncated", "truncated_sketched_coeffs", "sketched_orthonormal", "sketch_select")
SKETCHED_METHODS = ("truncated_sketched_coeffs", "sketched_orthonormal", "sketch_select")

# CLI-facing names -> (method, strategy)
METHOD_ALIASES = {
    "full": ("full", None),
    "truncated": ("truncated", None),
    "truncated-sketched": ("truncated_sketched_coeffs", None),
    "sketched-orthonormal": ("sketched_orthonormal", None),
    **{f"ssa-{name}": ("sketch_select", name) for name in STRATEGIES},
}


class StopReason(str, enum.Enum):
    MAX_DIM = "max_dim"
    BREAKDOWN = "breakdown"
    COND_EXCEEDED = "cond_exceeded"


@dataclass
class ArnoldiConfig:
    m_max: int
    k: int = 2
    s: int = 0
    cond_threshold: float = 1e12
    cond_check_stride: int = 5
    breakdown_tol: float = 1e-14
    method: str = "full"
    strategy: str | None = None

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError("m_max must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "sketch_select":
            if self.strategy not in STRATEGIES:
                raise ValueError(f"sketch_select needs a strategy from {sorted(STRATEGIES)}")
        if self.sketched and self.s <= self.m_max:
            raise ValueError("sketched methods need s > m_max")
        if not self.cond_threshold > 1:
            raise ValueError("cond_threshold must exceed 1")
        if self.cond_check_stride < 1:
            raise ValueError("cond_check_stride must be positive")

    @property
    def sketched(self) -> bool:
        return self.method in SKETCHED_METHODS

    @classmethod
    def from_name(cls, name: str, **kwargs) -> ArnoldiConfig:
        try:
            method, strategy = METHOD_ALIASES[name]
        except KeyError:
            raise ValueError(f"unknown method {name!r}; expected one of {sorted(METHOD_ALIASES)}") from None
        return cls(method=method, strategy=strategy, **kwargs)


@dataclass
class CondRecord:
    dim: int
    cond: float
    sigma_min: float
    sigma_max: float


@dataclass
class ArnoldiState:
    """Basis V, sketched basis SV, sketched images SAV and coefficients H of one run."""

    cfg: ArnoldiConfig
    sketch: SketchOperator | None
    v_store: np.ndarray
    sv_store: np.ndarray | None
    sav_store: np.ndarray | None
    h_store: np.ndarray
    nv: int = 1
    j: int = 0
    breakdown: bool = False
    qr: QrUpdatable | None = None
    selections: list = field(default_factory=list)
    history: list = field(default_factory=list)
    dim_reached: int = 0

    @property
    def v_basis(self) -> np.ndarray:
        return self.v_store[:, : self.nv]

    @property
    def sv_basis(self) -> np.ndarray | None:
        return None if self.sv_store is None else self.sv_store[:, : self.nv]

    @property
    def sav(self) -> np.ndarray | None:
        return None if self.sav_store is None else self.sav_store[:, : self.j]

    @property
    def h(self) -> np.ndarray:
        return self.h_store[: self.j + 1, : self.j]


def init_state(b, cfg: ArnoldiConfig, sketch: SketchOperator | None = None) -> ArnoldiState:
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError("b must be a vector")
    n = b.shape[0]
    if cfg.sketched and sketch is None:
        raise ValueError(f"method {cfg.method!r} requires a sketch operator")
    if sketch is not None:
        if sketch.n != n:
            raise ValueError("sketch dimension does not match b")
        if sketch.s <= cfg.m_max:
            raise ValueError("sketch size must exceed m_max")
    if not np.any(b):
        raise ValueError("starting vector b must be nonzero")
    m = cfg.m_max
    v = np.zeros((n, m + 1), order="F")
    sv = sav = None
    if sketch is not None:
        sv = np.zeros((sketch.s, m + 1), order="F")
        sav = np.zeros((sketch.s, m), order="F")
        sb = apply(sketch, b)
    scale = np.linalg.norm(sb) if cfg.sketched else np.linalg.norm(b)
    if scale == 0.0:
        raise ValueError("sketch annihilates the starting vector")
    v[:, 0] = b / scale
    if sv is not None:
        sv[:, 0] = sb / scale
    state = ArnoldiState(cfg, sketch, v, sv, sav, np.zeros((m + 1, m)))
    if cfg.method == "sketch_select" and cfg.strategy in ("pinv", "pinv2"):
        state.qr = QrUpdatable(sketch.s, capacity=m + 1).append(sv[:, 0])
    return state


def _commit(state: ArnoldiState, what: np.ndarray, swhat, idx, coeffs, norm, ref) -> ArnoldiState:
    jj = state.j
    state.h_store[idx, jj] = coeffs
    state.h_store[jj + 1, jj] = norm
    state.j = jj + 1
    if norm <= state.cfg.breakdown_tol * ref:
        state.breakdown = True
        return state
    state.v_store[:, jj + 1] = what / norm
    if state.sv_store is not None:
        state.sv_store[:, jj + 1] = swhat / norm
    if state.qr is not None:
        state.qr.append(state.sv_store[:, jj + 1])
    state.nv = jj + 2
    return state


def _current_sw(state, w, sw):
    if state.sketch is None:
        return None
    return apply(state.sketch, w) if sw is None else np.asarray(sw, dtype=np.float64)


def full_arnoldi_step(state: ArnoldiState, w, sw=None) -> ArnoldiState:
    """Modified Gram-Schmidt against the whole basis, reorthogonalizing once if needed."""
    w = np.array(w, dtype=np.float64)
    sw = _current_sw(state, w, sw)
    v = state.v_basis
    wnorm = np.linalg.norm(w)
    h = np.zeros(v.shape[1])
    for i in range(v.shape[1]):
        c = v[:, i] @ w
        w -= c * v[:, i]
        h[i] += c
    if np.linalg.norm(w) < 0.7071 * wnorm:
        for i in range(v.shape[1]):
            c = v[:, i] @ w
            w -= c * v[:, i]
            h[i] += c
    swhat = None if sw is None else sw - state.sv_basis @ h
    idx = np.arange(v.shape[1])
    return _commit(state, w, swhat, idx, h, np.linalg.norm(w), wnorm)


def truncated_arnoldi_step(state: ArnoldiState, w, k: int, use_sketched_coeffs: bool = False,
                           sketch: SketchOperator | None = None, sw=None) -> ArnoldiState:
    """Project against the last ``min(k, j)`` vectors with classical Gram-Schmidt coefficients.

    With ``use_sketched_coeffs`` the coefficients are sketched inner products
    and the new vector is scaled so that ``|S v_{j+1}| = 1``.
    """
    if sketch is not None and state.sketch is None:
        raise ValueError("state was initialized without a sketch")
    if use_sketched_coeffs and state.sketch is None:
        raise ValueError("sketched coefficients need a sketch operator")
    w = np.asarray(w, dtype=np.float64)
    sw = _current_sw(state, w, sw)
    nv = state.nv
    idx = np.arange(max(0, nv - k), nv)
    vsel = state.v_store[:, idx]
    if use_sketched_coeffs:
        h = state.sv_store[:, idx].T @ sw
    else:
        h = vsel.T @ w
    what = w - vsel @ h
    swhat = None if sw is None else sw - state.sv_store[:, idx] @ h
    if use_sketched_coeffs:
        return _commit(state, what, swhat, idx, h, np.linalg.norm(swhat), np.linalg.norm(sw))
    return _commit(state, what, swhat, idx, h, np.linalg.norm(what), np.linalg.norm(w))


def sketch_select_step(state: ArnoldiState, w, k: int, strategy: str,
                       sketch: SketchOperator | None = None, sw=None) -> ArnoldiState:
    """Project out a selected subset of at most k basis vectors; normalize |S v_{j+1}| = 1."""
    if state.sketch is None:
        raise ValueError("sketch-and-select needs a sketch operator")
    w = np.array(w, dtype=np.float64)
    sw = _current_sw(state, w, sw)
    swnorm = np.linalg.norm(sw)
    sel = select(strategy, state.sv_basis, sw, k, qr=state.qr)
    if sel.indices.size == 0:
        raise RuntimeError("selection returned an empty index set")
    state.selections.append(sel)
    w -= state.v_store[:, sel.indices] @ sel.coeffs
    sw = sw - state.sv_store[:, sel.indices] @ sel.coeffs
    return _commit(state, w, sw, sel.indices, sel.coeffs, np.linalg.norm(sw), swnorm)


def arnoldi_step(state: ArnoldiState, a: CsrMatrix) -> ArnoldiState:
    """One iteration: w = A v_j, record S w, then project per the configured method."""
    cfg = state.cfg
    jj = state.j
    w = spmv(a, state.v_store[:, jj])
    sw = None
    if state.sketch is not None:
        sw = apply(state.sketch, w)
        state.sav_store[:, jj] = sw
    if cfg.method == "full":
        return full_arnoldi_step(state, w, sw)
    if cfg.method == "truncated":
        return truncated_arnoldi_step(state, w, cfg.k, False, sw=sw)
    if cfg.method == "truncated_sketched_coeffs":
        return truncated_arnoldi_step(state, w, cfg.k, True, sw=sw)
    if cfg.method == "sketched_orthonormal":
        return truncated_arnoldi_step(state, w, state.nv, True, sw=sw)
    return sketch_select_step(state, w, cfg.k, cfg.strategy, sw=sw)


def measure_cond(v) -> CondRecord:
    sigma = singular_values(v)
    cond = math.inf if sigma[-1] == 0.0 else float(sigma[0] / sigma[-1])
    return CondRecord(v.shape[1], cond, float(sigma[-1]), float(sigma[0]))


def _largest_ok_prefix(v, lo: int, hi: int, threshold: float) -> int:
    """Largest d in [lo, hi) with cond(v[:, :d]) <= threshold, given cond(v[:, :lo]) is fine.

    Prefix condition numbers are non-decreasing in d, so bisection applies.
    """
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if measure_cond(v[:, :mid]).cond <= threshold:
            lo = mid
        else:
            hi = mid
    return lo


def largest_ok_prefix(v, threshold: float) -> int:
    """Number of leading columns of ``v`` whose condition number stays within ``threshold``."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[1]
    if measure_cond(v).cond <= threshold:
        return n
    if measure_cond(v[:, :1]).cond > threshold:
        return 0
    return _largest_ok_prefix(v, 1, n, threshold)


def check_cond(state: ArnoldiState, last_ok: int) -> tuple[CondRecord, int]:
    rec = measure_cond(state.v_basis)
    state.history.append(rec)
    if rec.cond <= state.cfg.cond_threshold:
        state.dim_reached = rec.dim
        return rec, rec.dim
    state.dim_reached = _largest_ok_prefix(state.v_basis, last_ok, rec.dim, state.cfg.cond_threshold)
    return rec, state.dim_reached


def arnoldi_run(a: CsrMatrix, b, cfg: ArnoldiConfig, sketch: SketchOperator | None = None,
                stop_on_cond: bool = True) -> tuple[ArnoldiState, StopReason]:
    """Run until m_max, breakdown, or measured cond(V) above the threshold.

    The condition number is measured every ``cond_check_stride``
    iterations and once at the end; ``state.dim_reached`` is the largest
    basis dimension whose condition number stays within the threshold.
    """
    b = np.asarray(b, dtype=np.float64)
    if a.nrows != a.ncols or a.ncols != b.shape[0]:
        raise ValueError("A must be square and match the length of b")
    state = init_state(b, cfg, sketch)
    last_ok = 1
    checked_at = -1
    reason = StopReason.MAX_DIM
    while state.j < cfg.m_max:
        arnoldi_step(state, a)
        if state.breakdown:
            reason = StopReason.BREAKDOWN
            break
        if state.j % cfg.cond_check_stride == 0:
            rec, last_ok = check_cond(state, last_ok)
            checked_at = state.j
            if stop_on_cond and rec.cond > cfg.cond_threshold:
                return state, StopReason.COND_EXCEEDED
    if checked_at != state.j:
        rec, last_ok = check_cond(state, last_ok)
        if stop_on_cond and rec.cond > cfg.cond_threshold and reason is StopReason.MAX_DIM:
            reason = StopReason.COND_EXCEEDED
    return state, reason
