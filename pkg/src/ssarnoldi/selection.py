"""Sparse subset selection: which k sketched basis vectors to project out.

Every strategy takes the sketched basis ``sv`` (s x j), the sketched
vector ``sw`` (length s) and the sparsity ``k``, and returns a
:class:`SelectionResult` with ``min(k, j)`` sorted, 0-based indices.
Ties are always broken in favour of the lowest index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .linalg import QrUpdatable, cond2, least_squares


@dataclass(frozen=True)
class SelectionResult:
    indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if idx.shape != coeffs.shape:
            raise ValueError("indices and coeffs must align")
        if idx.size and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be sorted and distinct")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite selection coefficients")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", coeffs)

    def residual(self, sv, sw) -> np.ndarray:
        return np.asarray(sw) - np.asarray(sv)[:, self.indices] @ self.coeffs


def _check(sv, sw, k):
    sv = np.asarray(sv, dtype=np.float64)
    sw = np.asarray(sw, dtype=np.float64)
    if sv.ndim != 2 or sw.shape != (sv.shape[0],):
        raise ValueError("sv must be s x j and sw of length s")
    if sv.shape[1] == 0:
        raise ValueError("empty basis")
    if k < 1:
        raise ValueError("k must be at least 1")
    return sv, sw, min(k, sv.shape[1])


def _top(scores, k) -> np.ndarray:
    order = np.argsort(-np.abs(scores), kind="stable")
    return np.sort(order[:k])


def _result(sv, sw, idx, coeffs=None) -> SelectionResult:
    idx = np.sort(np.asarray(idx, dtype=np.int64))
    if coeffs is None:
        coeffs = least_squares(sv[:, idx], sw)
    return SelectionResult(idx, coeffs)


def select_pinv(sv, sw, k, qr: QrUpdatable | None = None) -> SelectionResult:
    """Keep the k largest-modulus entries of the full least-squares solution.

    ``qr`` may hold an up-to-date factorization of ``sv``; it is used
    in place of a fresh solve.
    """
    sv, sw, k = _check(sv, sw, k)
    if qr is not None and qr.ncols_committed == sv.shape[1]:
        h = qr.solve(sw)[0]
    else:
        h = least_squares(sv, sw)
    idx = _top(h, k)
    return SelectionResult(idx, h[idx])


def select_pinv2(sv, sw, k, qr: QrUpdatable | None = None) -> SelectionResult:
    sv, sw, k = _check(sv, sw, k)
    idx = select_pinv(sv, sw, k, qr).indices
    return _result(sv, sw, idx)


def select_corr(sv, sw, k) -> SelectionResult:
    sv, sw, k = _check(sv, sw, k)
    scores = sv.T @ sw
    idx = _top(scores, k)
    return SelectionResult(idx, scores[idx])


def select_corr_pinv(sv, sw, k) -> SelectionResult:
    sv, sw, k = _check(sv, sw, k)
    return _result(sv, sw, _top(sv.T @ sw, k))


def _argmax_unselected(scores, taken) -> int:
    scores = np.abs(scores)
    scores[taken] = -1.0
    return int(np.argmax(scores))


def select_omp(sv, sw, k) -> SelectionResult:
    """Orthogonal matching pursuit with an incrementally updated QR."""
    sv, sw, k = _check(sv, sw, k)
    taken = np.zeros(sv.shape[1], dtype=bool)
    chosen = []
    qr = QrUpdatable(sv.shape[0], capacity=k)
    r = sw.copy()
    for _ in range(k):
        i = _argmax_unselected(sv.T @ r, taken)
        taken[i] = True
        chosen.append(i)
        qr.append(sv[:, i])
        # residual = sw minus its projection onto the selected columns
        qtb = qr.apply_qt(sw)
        qtb[: qr.ncols_committed] = 0.0
        r = qr.apply_q(qtb)
    return _result(sv, sw, chosen)


def select_sp(sv, sw, k) -> SelectionResult:
    """One subspace-pursuit iteration: expand to 2k candidates, prune by coefficient size."""
    sv, sw, k = _check(sv, sw, k)
    j = sv.shape[1]
    first = _top(sv.T @ sw, k)
    if k == j:
        return _result(sv, sw, first)
    h0 = least_squares(sv[:, first], sw)
    r = sw - sv[:, first] @ h0
    outside = np.setdiff1d(np.arange(j), first)
    extra = outside[_top((sv[:, outside].T @ r), min(k, outside.size))]
    merged = np.union1d(first, extra)
    h1 = least_squares(sv[:, merged], sw)
    return _result(sv, sw, merged[_top(h1, k)])


def select_greedy(sv, sw, k, tiny: float = 1e-14) -> SelectionResult:
    """Greedy selection with deflation of the working columns (Natarajan-style).

    Each pick maximizes |c_i^T r| / |c_i| over the deflated working
    columns; the residual and the remaining columns are then
    orthogonalized against the picked one.
    """
    sv, sw, k = _check(sv, sw, k)
    work = sv.copy()
    r = sw.copy()
    taken = np.zeros(sv.shape[1], dtype=bool)
    chosen = []
    for _ in range(k):
        norms = np.linalg.norm(work, axis=0)
        scores = np.full(sv.shape[1], -1.0)
        live = (norms > tiny) & ~taken
        scores[live] = np.abs(work[:, live].T @ r) / norms[live]
        if live.any():
            i = int(np.argmax(scores))
        else:
            i = int(np.flatnonzero(~taken)[0])
        taken[i] = True
        chosen.append(i)
        if norms[i] > tiny:
            q = work[:, i] / norms[i]
            r -= (q @ r) * q
            rest = ~taken
            work[:, rest] -= np.outer(q, q @ work[:, rest])
    return _result(sv, sw, chosen)


def select_bruteforce(sv, sw, k, objective: str = "residual", max_subsets: int = 10**6) -> SelectionResult:
    """Exhaustive search over all index sets of size k (test oracle).

    ``objective="residual"`` minimizes the restricted least-squares
    residual; ``objective="cond"`` minimizes cond([sv, r/|r|]) where r is
    that residual.
    """
    sv, sw, k = _check(sv, sw, k)
    j = sv.shape[1]
    if comb(j, k) > max_subsets:
        raise ValueError(f"C({j},{k}) subsets exceeds the brute-force limit")
    scale = max(np.linalg.norm(sw), 1.0)
    best, best_val = None, np.inf
    subsets = itertools.combinations(range(j), k)
    while True:
        chunk = np.array(list(itertools.islice(subsets, 4096)), dtype=np.int64).reshape(-1, k)
        if chunk.size == 0:
            break
        for idx, res in zip(chunk, _subset_residuals(sv, sw, chunk)):
            if objective == "residual":
                val = np.linalg.norm(res)
            elif objective == "cond":
                nrm = np.linalg.norm(res)
                val = cond2(np.column_stack([sv, res / nrm])) if nrm > 0 else np.inf
            else:
                raise ValueError(f"unknown objective {objective!r}")
            # near-equal values count as ties so the earlier (lexicographic) subset wins
            tie = 1e-13 * scale if objective == "residual" else 1e-12 * best_val
            if best is None or val < best_val - tie:
                best, best_val = idx, val
    return _result(sv, sw, best)


def _subset_residuals(sv, sw, chunk) -> np.ndarray:
    """Least-squares residuals of sw against sv[:, I] for each row I of ``chunk``."""
    cols = np.transpose(sv[:, chunk], (1, 0, 2))
    q, r = np.linalg.qr(cols)
    res = sw - np.einsum("nsk,nk->ns", q, np.einsum("nsk,s->nk", q, sw))
    diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
    # rank-deficient subsets: Householder Q spans a spurious direction there
    for n in np.flatnonzero(diag.min(axis=1) <= sv.shape[0] * 1e-15 * diag.max(axis=1)):
        res[n] = sw - cols[n] @ least_squares(cols[n], sw)
    return res


STRATEGIES = {
    "pinv": select_pinv,
    "pinv2": select_pinv2,
    "corr": select_corr,
    "corr-pinv": select_corr_pinv,
    "omp": select_omp,
    "sp": select_sp,
    "greedy": select_greedy,
    "bruteforce": select_bruteforce,
}


def select(strategy: str, sv, sw, k, qr: QrUpdatable | None = None) -> SelectionResult:
    try:
        fn = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown selection strategy {strategy!r}; expected one of {sorted(STRATEGIES)}") from None
    if strategy in ("pinv", "pinv2"):
        return fn(sv, sw, k, qr=qr)
    return fn(sv, sw, k)
