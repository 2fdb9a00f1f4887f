"""Dense and sparse kernels: CSR products, updatable Householder QR,
least squares, one-sided Jacobi singular values and condition numbers.

Dense matrices are plain float64 numpy arrays throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix with validated structure."""

    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    _rows: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if row_ptr.shape != (self.nrows + 1,):
            raise ValueError("row_ptr must have length nrows + 1")
        if row_ptr[0] != 0 or np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must start at 0 and be non-decreasing")
        nnz = int(row_ptr[-1])
        if col_idx.shape != (nnz,) or values.shape != (nnz,):
            raise ValueError("col_idx and values must have length nnz")
        if nnz and (col_idx.min() < 0 or col_idx.max() >= self.ncols):
            raise ValueError("column index out of range")
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(row_ptr))
        if nnz > 1:
            # strictly increasing columns within each row
            same_row = rows[1:] == rows[:-1]
            if np.any(col_idx[1:][same_row] <= col_idx[:-1][same_row]):
                raise ValueError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix entries must be finite")
        for name, arr in (("row_ptr", row_ptr), ("col_idx", col_idx), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        rows.setflags(write=False)
        object.__setattr__(self, "_rows", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals) -> CsrMatrix:
        """Build from triplets; duplicates are summed, explicit zeros kept."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of range")
        key = rows * max(ncols, 1) + cols
        order = np.argsort(key, kind="stable")
        key, vals = key[order], vals[order]
        uniq, start = np.unique(key, return_index=True)
        summed = np.add.reduceat(vals, start) if vals.size else vals
        r = uniq // max(ncols, 1)
        c = uniq % max(ncols, 1)
        row_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(row_ptr, r + 1, 1)
        return cls(nrows, ncols, np.cumsum(row_ptr), c, summed)

    @classmethod
    def from_dense(cls, a) -> CsrMatrix:
        a = np.asarray(a, dtype=np.float64)
        r, c = np.nonzero(a)
        return cls.from_coo(a.shape[0], a.shape[1], r, c, a[r, c])

    @classmethod
    def identity(cls, n: int) -> CsrMatrix:
        return cls(n, n, np.arange(n + 1), np.arange(n), np.ones(n))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self._rows, self.col_idx] = self.values
        return out

    def matvec(self, x) -> np.ndarray:
        return spmv(self, x)

    def __matmul__(self, x):
        return spmv(self, x)


def spmv(a: CsrMatrix, x) -> np.ndarray:
    """Return ``a @ x`` for a vector ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != a.ncols:
        raise ValueError(f"dimension mismatch: matrix has {a.ncols} columns, vector has shape {x.shape}")
    return np.bincount(a._rows, weights=a.values * x[a.col_idx], minlength=a.nrows)


class QrUpdatable:
    """Householder QR of a tall matrix, grown one column at a time.

    Reflectors are kept in compact form (unit vectors ``u`` with
    ``H = I - 2 u u^T``); appending a column applies the stored reflectors
    and creates one new reflector, O(s*j) work. The diagonal of ``r`` is
    kept non-negative by folding a sign into the implicit Q.
    """

    def __init__(self, nrows: int, capacity: int = 8):
        if nrows < 1:
            raise ValueError("nrows must be positive")
        self.nrows = nrows
        self._u = np.zeros((nrows, max(capacity, 1)))
        self._r = np.zeros((max(capacity, 1), max(capacity, 1)))
        self._sign = np.ones(max(capacity, 1))
        self.ncols_committed = 0

    def _grow(self):
        cap = 2 * self._u.shape[1]
        u = np.zeros((self.nrows, cap))
        u[:, : self._u.shape[1]] = self._u
        r = np.zeros((cap, cap))
        n0 = self._r.shape[0]
        r[:n0, :n0] = self._r
        sign = np.ones(cap)
        sign[:n0] = self._sign
        self._u, self._r, self._sign = u, r, sign

    @property
    def r(self) -> np.ndarray:
        n = self.ncols_committed
        return self._r[:n, :n].copy()

    def _reflect(self, x: np.ndarray, n: int) -> np.ndarray:
        # x <- H_n ... H_1 x, then sign correction on the leading n entries
        for i in range(n):
            u = self._u[i:, i]
            x[i:] -= 2.0 * (u @ x[i:]) * u
        x[:n] *= self._sign[:n]
        return x

    def append(self, col) -> QrUpdatable:
        col = np.asarray(col, dtype=np.float64)
        if col.shape != (self.nrows,):
            raise ValueError(f"column length {col.shape} does not match {self.nrows} rows")
        n = self.ncols_committed
        if n >= self.nrows:
            raise ValueError("cannot append beyond the row dimension")
        if n >= self._u.shape[1]:
            self._grow()
        x = self._reflect(col.copy(), n)
        tail = x[n:]
        norm = np.linalg.norm(tail)
        if norm == 0.0:
            self._u[:, n] = 0.0
            beta, sign = 0.0, 1.0
        else:
            beta = -norm if tail[0] >= 0 else norm
            u = tail.copy()
            u[0] -= beta
            unorm = np.linalg.norm(u)
            self._u[:, n] = 0.0
            if unorm > 0:
                self._u[n:, n] = u / unorm
            sign = -1.0 if beta < 0 else 1.0
        self._sign[n] = sign
        self._r[:n, n] = x[:n]
        self._r[n, n] = abs(beta)
        self.ncols_committed = n + 1
        return self

    def apply_qt(self, x) -> np.ndarray:
        """Return Q^T x where Q is the full s x s orthogonal factor."""
        x = np.array(x, dtype=np.float64)
        if x.shape != (self.nrows,):
            raise ValueError("length mismatch")
        return self._reflect(x, self.ncols_committed)

    def apply_q(self, y) -> np.ndarray:
        y = np.array(y, dtype=np.float64)
        n = self.ncols_committed
        y[:n] *= self._sign[:n]
        for i in range(n - 1, -1, -1):
            u = self._u[i:, i]
            y[i:] -= 2.0 * (u @ y[i:]) * u
        return y

    def q_thin(self) -> np.ndarray:
        n = self.ncols_committed
        eye = np.zeros((self.nrows, n))
        eye[np.arange(n), np.arange(n)] = 1.0
        return np.column_stack([self.apply_q(eye[:, i]) for i in range(n)]) if n else eye

    def solve(self, rhs) -> tuple[np.ndarray, float]:
        """Least-squares solution over the committed columns and its residual norm."""
        n = self.ncols_committed
        qtb = self.apply_qt(rhs)
        h = solve_upper(self._r[:n, :n], qtb[:n])
        return h, float(np.linalg.norm(qtb[n:]))


def qr_append_column(qr: QrUpdatable, col) -> QrUpdatable:
    return qr.append(col)


def solve_upper(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = r.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
    return x


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Tournament schedule: n-1 rounds of disjoint column pairs covering all pairs."""
    m = n + (n % 2)
    # circle method: player 0 stays put, the others rotate one seat per round
    seats = np.arange(m - 1)
    table = np.empty((m - 1, m), dtype=np.int64)
    table[:, 0] = 0
    table[:, 1:] = 1 + (seats[None, :] - seats[:, None]) % (m - 1)
    left, right = table[:, : m // 2], table[:, m - 1 : m // 2 - 1 : -1]
    lo, hi = np.minimum(left, right), np.maximum(left, right)
    rounds = []
    for p, q in zip(lo, hi):
        keep = q < n
        if keep.any():
            rounds.append((p[keep], q[keep]))
    return tuple(rounds)


def jacobi_svd(a, compute_vectors: bool = True, max_sweeps: int = 60):
    """One-sided Jacobi SVD of a small dense matrix (rows >= cols).

    Rotations on disjoint column pairs are applied together, one
    tournament round at a time. Returns ``(u, sigma, vt)`` with sigma
    descending, or only sigma when ``compute_vectors`` is false.
    """
    a = np.array(a, dtype=np.float64, order="F")
    m, n = a.shape
    v = np.eye(n) if compute_vectors else None
    tol = max(m, 1) * EPS
    # one BLAS Gram product settles already-orthogonal columns without a sweep
    gram = a.T @ a
    d = np.sqrt(np.diag(gram))
    done = np.all(np.abs(gram - np.diag(np.diag(gram))) <= tol * np.outer(d, d))
    rounds = _round_robin(n) if n > 1 and not done else ()
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            ap, aq = a[:, p], a[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)
            mask = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not mask.any():
                continue
            rotated = True
            if not mask.all():
                p, q = p[mask], q[mask]
                ap, aq = ap[:, mask], aq[:, mask]
                alpha, beta, gamma = alpha[mask], beta[mask], gamma[mask]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            if v is not None:
                vp, vq = v[:, p], v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break
    sigma = np.linalg.norm(a, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    if not compute_vectors:
        return sigma
    a = a[:, order]
    u = np.divide(a, sigma, out=np.zeros_like(a), where=sigma > 0)
    return u, sigma, v[:, order].T


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.size == 0:
        raise ValueError("expected a nonempty 2-D matrix")
    return m


def singular_values(m) -> np.ndarray:
    """Singular values in descending order (QR, then Jacobi on the triangular factor)."""
    m = _as_matrix(m)
    if m.shape[0] < m.shape[1]:
        m = m.T
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    r = np.linalg.qr(m, mode="r") if m.shape[0] > m.shape[1] else m
    # a second QR of R^T grades the rows, which cuts the Jacobi sweeps about threefold
    r = np.linalg.qr(r.T, mode="r").T
    return jacobi_svd(r, compute_vectors=False)


def cond2(m) -> float:
    sigma = singular_values(m)
    if sigma[-1] == 0.0:
        return float("inf")
    return float(sigma[0] / sigma[-1])


def least_squares(m, rhs, rank_tol: float | None = None) -> np.ndarray:
    """Minimum-norm solution of ``min ||m h - rhs||``.

    Singular values below ``rank_tol * sigma_max`` are treated as zero;
    the default threshold is ``max(nrows, ncols) * eps``.
    """
    m = _as_matrix(m)
    rhs = np.asarray(rhs, dtype=np.float64)
    nrows, ncols = m.shape
    if rhs.shape != (nrows,):
        raise ValueError("rhs length does not match matrix rows")
    if nrows < ncols:
        raise ValueError("least_squares expects nrows >= ncols")
    q, r = np.linalg.qr(m, mode="reduced")
    u, sigma, vt = jacobi_svd(r)
    if rank_tol is None:
        rank_tol = max(nrows, ncols) * EPS
    keep = sigma > rank_tol * sigma[0] if sigma[0] > 0 else np.zeros_like(sigma, dtype=bool)
    coef = (u[:, keep].T @ (q.T @ rhs)) / sigma[keep]
    return vt[keep].T @ coef
