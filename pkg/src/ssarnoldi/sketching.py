"""Randomized subspace embeddings S (s x N) and their measured distortion.

Randomness comes from numpy's Philox4x64 counter-based bit generator,
so a given (kind, n, s, seed) builds the same operator on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import singular_values

KINDS = ("srht", "gaussian", "identity")


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox stream; ``seed`` is an int or a sequence of ints (e.g. [trial, purpose])."""
    if isinstance(seed, (int, np.integer)):
        seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(seed))


def fisher_yates_prefix(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """First ``s`` entries of a uniformly shuffled ``range(n)``."""
    perm = np.arange(n)
    for i in range(s):
        j = int(rng.integers(i, n))
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:s].copy()


def fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along axis 0 (Sylvester order)."""
    x = np.array(x, dtype=np.float64)
    n = x.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    tail = x.shape[1:]
    h = 1
    while h < n:
        y = x.reshape((n // (2 * h), 2, h) + tail)
        x = np.stack((y[:, 0] + y[:, 1], y[:, 0] - y[:, 1]), axis=1).reshape((n,) + tail)
        h *= 2
    return x


@dataclass(frozen=True)
class SketchOperator:
    kind: str
    n: int
    s: int
    seed: int
    padded: int = 0
    signs: np.ndarray | None = field(default=None, repr=False)
    rows: np.ndarray | None = field(default=None, repr=False)
    matrix: np.ndarray | None = field(default=None, repr=False)

    def apply(self, x) -> np.ndarray:
        return apply(self, x)

    def __matmul__(self, x):
        return apply(self, x)


def srht_new(n: int, s: int, seed: int) -> SketchOperator:
    """Subsampled randomized Hadamard transform sqrt(P/s) * R H D on the zero-padded vector."""
    if n < 1 or s < 1:
        raise ValueError("n and s must be positive")
    padded = 1 << (n - 1).bit_length()
    if s > padded:
        raise ValueError(f"sketch size {s} exceeds padded dimension {padded}")
    rng = make_rng(seed)
    signs = rng.integers(0, 2, size=padded) * 2.0 - 1.0
    rows = fisher_yates_prefix(padded, s, rng)
    for arr in (signs, rows):
        arr.setflags(write=False)
    return SketchOperator("srht", n, s, seed, padded, signs, rows)


def gaussian_new(n: int, s: int, seed: int) -> SketchOperator:
    if n < 1 or s < 1:
        raise ValueError("n and s must be positive")
    mat = make_rng(seed).standard_normal((s, n)) / np.sqrt(s)
    mat.setflags(write=False)
    return SketchOperator("gaussian", n, s, seed, matrix=mat)


def identity_new(n: int, s: int | None = None, seed: int = 0) -> SketchOperator:
    if s is not None and s != n:
        raise ValueError("identity sketch requires s == n")
    return SketchOperator("identity", n, n, seed)


def make_sketch(kind: str, n: int, s: int, seed: int = 0) -> SketchOperator:
    if kind == "srht":
        return srht_new(n, s, seed)
    if kind == "gaussian":
        return gaussian_new(n, s, seed)
    if kind == "identity":
        return identity_new(n, s, seed)
    raise ValueError(f"unknown sketch kind {kind!r}; expected one of {KINDS}")


def apply(op: SketchOperator, x) -> np.ndarray:
    """Return S @ x for a vector or a matrix with ``n`` rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != op.n:
        raise ValueError(f"expected leading dimension {op.n}, got shape {x.shape}")
    if op.kind == "identity":
        return x.copy()
    if op.kind == "gaussian":
        return op.matrix @ x
    padded = np.zeros((op.padded,) + x.shape[1:])
    padded[: op.n] = x
    if x.ndim == 1:
        padded *= op.signs
    else:
        padded *= op.signs[:, None]
    return fwht(padded)[op.rows] / np.sqrt(op.s)


def to_dense(op: SketchOperator) -> np.ndarray:
    return apply(op, np.eye(op.n))


def embedding_distortion(op: SketchOperator, basis) -> float:
    """Smallest eps with (1-eps)|v|^2 <= |Sv|^2 <= (1+eps)|v|^2 on range(basis)."""
    basis = np.asarray(basis, dtype=np.float64)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.shape[1] > op.s:
        raise ValueError("subspace dimension exceeds the sketch size")
    q, _ = np.linalg.qr(basis)
    sigma = singular_values(apply(op, q))
    return max(0.0, 1.0 - sigma[-1] ** 2, sigma[0] ** 2 - 1.0)
