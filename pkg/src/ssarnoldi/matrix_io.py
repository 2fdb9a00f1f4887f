"""Matrix Market files, synthetic test matrices and right-hand sides."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import CsrMatrix
from .sketching import make_rng


class MatrixMarketError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def read_matrix_market(path) -> CsrMatrix:
    """Read a real Matrix Market file (coordinate or array) into CSR.

    Symmetric and skew-symmetric storage is expanded to the full matrix
    and duplicate coordinate entries are summed.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise MatrixMarketError("malformed header, expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    fmt, fld, sym = (h.lower() for h in header[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if fld != "real":
        raise MatrixMarketError(f"unsupported field {fld!r}; only real matrices are accepted", 1)
    if sym not in ("general", "symmetric", "skew-symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)

    body = [(no, ln.split()) for no, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line", len(lines))
    size_no, size = body[0]
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise MatrixMarketError("size line must contain integers", size_no) from None
    entries = body[1:]

    rows, cols, vals = [], [], []
    if fmt == "coordinate":
        if len(dims) != 3:
            raise MatrixMarketError("coordinate size line needs 'rows cols nnz'", size_no)
        nrows, ncols, nnz = dims
        if len(entries) != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}", entries[-1][0] if entries else size_no)
        for no, tok in entries:
            if len(tok) != 3:
                raise MatrixMarketError("entry must be 'row col value'", no)
            try:
                i, j, x = int(tok[0]) - 1, int(tok[1]) - 1, float(tok[2])
            except ValueError:
                raise MatrixMarketError("unparseable entry", no) from None
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise MatrixMarketError(f"index ({i + 1}, {j + 1}) out of range", no)
            if sym != "general" and i < j:
                raise MatrixMarketError("symmetric storage must list the lower triangle only", no)
            if sym == "skew-symmetric" and i == j:
                raise MatrixMarketError("skew-symmetric storage cannot have diagonal entries", no)
            rows.append(i)
            cols.append(j)
            vals.append(x)
    else:
        if len(dims) != 2:
            raise MatrixMarketError("array size line needs 'rows cols'", size_no)
        nrows, ncols = dims
        if sym == "general":
            positions = [(i, j) for j in range(ncols) for i in range(nrows)]
        else:
            first = 0 if sym == "symmetric" else 1
            positions = [(i, j) for j in range(ncols) for i in range(j + first, nrows)]
        if len(entries) != len(positions):
            raise MatrixMarketError(f"expected {len(positions)} values, found {len(entries)}",
                                    entries[-1][0] if entries else size_no)
        for (no, tok), (i, j) in zip(entries, positions):
            if len(tok) != 1:
                raise MatrixMarketError("array entry must be a single value", no)
            try:
                x = float(tok[0])
            except ValueError:
                raise MatrixMarketError("unparseable value", no) from None
            if x != 0.0:
                rows.append(i)
                cols.append(j)
                vals.append(x)
    if sym != "general" and nrows != ncols:
        raise MatrixMarketError("symmetric storage requires a square matrix", size_no)
    if not np.all(np.isfinite(vals)):
        raise MatrixMarketError("non-finite value in matrix")
    rows, cols, vals = np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals)
    if sym != "general":
        off = rows != cols
        sign = 1.0 if sym == "symmetric" else -1.0
        rows, cols, vals = (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, sign * vals[off]]))
    return CsrMatrix.from_coo(nrows, ncols, rows, cols, vals)


def write_matrix_market(path, a: CsrMatrix, comment: str | None = None) -> None:
    """Write ``a`` as a 1-based real general coordinate file."""
    rows = np.repeat(np.arange(a.nrows), np.diff(a.row_ptr))
    out = ["%%MatrixMarket matrix coordinate real general"]
    if comment:
        out.extend(f"% {c}" for c in comment.splitlines())
    out.append(f"{a.nrows} {a.ncols} {a.nnz}")
    out.extend(f"{i + 1} {j + 1} {x!r}" for i, j, x in zip(rows.tolist(), a.col_idx.tolist(), a.values.tolist()))
    Path(path).write_text("\n".join(out) + "\n", encoding="ascii")


def conv_diff_2d(grid: int, peclet: float = 0.0) -> CsrMatrix:
    """5-point convection-diffusion on a grid x grid interior mesh, scaled by h^2.

    -Laplace(u) + peclet * (u_x + u_y) with central differences and
    Dirichlet boundaries; peclet = 0 gives the symmetric Laplacian.
    """
    grid = int(grid)
    if grid < 1:
        raise ValueError("grid must be positive")
    h = 1.0 / (grid + 1)
    c = peclet * h / 2.0
    idx = np.arange(grid * grid).reshape(grid, grid)
    rows, cols, vals = [idx.ravel()], [idx.ravel()], [np.full(grid * grid, 4.0)]
    # x direction along axis 1, y direction along axis 0
    for axis in (0, 1):
        lo = np.take(idx, np.arange(grid - 1), axis=axis).ravel()
        hi = np.take(idx, np.arange(1, grid), axis=axis).ravel()
        rows += [lo, hi]
        cols += [hi, lo]
        vals += [np.full(lo.size, -1.0 + c), np.full(lo.size, -1.0 - c)]
    n = grid * grid
    return CsrMatrix.from_coo(n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def shift(n: int) -> CsrMatrix:
    """Ones on the subdiagonal, so A e_j = e_{j+1} and A e_n = 0."""
    n = int(n)
    return CsrMatrix.from_coo(n, n, np.arange(1, n), np.arange(n - 1), np.ones(n - 1))


def tridiag_toeplitz(n: int, a: float, b: float, c: float) -> CsrMatrix:
    """Diagonal ``a``, subdiagonal ``b``, superdiagonal ``c``."""
    n = int(n)
    i = np.arange(n)
    rows = np.concatenate([i, i[1:], i[:-1]])
    cols = np.concatenate([i, i[:-1], i[1:]])
    vals = np.concatenate([np.full(n, a), np.full(n - 1, b), np.full(n - 1, c)])
    return CsrMatrix.from_coo(n, n, rows, cols, vals)


def dense_random_spectrum(n: int, cond: float, seed: int = 0) -> CsrMatrix:
    """Dense U diag(sigma) V^T with random orthogonal U, V and sigma log-spaced in [1/cond, 1]."""
    n = int(n)
    rng = make_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    sigma = np.logspace(0.0, -np.log10(cond), n)
    return CsrMatrix.from_dense((u * sigma) @ v.T)


GENERATORS = {
    "conv_diff_2d": conv_diff_2d,
    "shift": shift,
    "tridiag_toeplitz": tridiag_toeplitz,
    "dense_random_spectrum": dense_random_spectrum,
}


def generate(name: str, **params) -> CsrMatrix:
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; expected one of {sorted(GENERATORS)}") from None
    return fn(**params)


def parse_generator(text: str) -> tuple[str, dict]:
    """Parse ``name:key=value,key=value`` into a name and numeric parameters."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"generator parameter {item!r} must be key=value")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            params[key.strip()] = float(value)
    return name.strip(), params


RHS_KINDS = ("gaussian", "e1", "e1pert", "ones")


def make_rhs(kind: str, n: int, seed: int = 0, delta: float = 1e-15) -> np.ndarray:
    if kind == "gaussian":
        return make_rng(seed).standard_normal(n)
    if kind == "e1":
        b = np.zeros(n)
        b[0] = 1.0
        return b
    if kind == "e1pert":
        b = np.full(n, delta)
        b[0] += 1.0
        return b
    if kind == "ones":
        return np.ones(n)
    raise ValueError(f"unknown rhs kind {kind!r}; expected one of {RHS_KINDS}")


@dataclass
class ProblemSpec:
    """A square test problem: a .mtx path or a generator, plus a right-hand side rule."""

    mtx_path: str | None = None
    generator: str | None = None
    params: dict = field(default_factory=dict)
    rhs: str = "gaussian"
    seed: int = 0
    delta: float = 1e-15
    rhs_path: str | None = None

    @property
    def name(self) -> str:
        if self.mtx_path:
            return Path(self.mtx_path).stem
        args = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.generator}:{args}" if args else str(self.generator)

    def resolve(self) -> tuple[CsrMatrix, np.ndarray]:
        if (self.mtx_path is None) == (self.generator is None):
            raise ValueError("give exactly one of a matrix path or a generator")
        a = read_matrix_market(self.mtx_path) if self.mtx_path else generate(self.generator, **self.params)
        if a.nrows != a.ncols:
            raise ValueError("test matrices must be square")
        if self.rhs == "from_file":
            b = np.loadtxt(self.rhs_path, dtype=np.float64, ndmin=1)
        else:
            b = make_rhs(self.rhs, a.nrows, self.seed, self.delta)
        if b.shape != (a.nrows,):
            raise ValueError("right-hand side length does not match the matrix")
        return a, b
