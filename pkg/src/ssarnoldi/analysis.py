"""Condition-number growth bounds, worst-case basis extensions,
singular-value histograms and Dolan-More performance profiles.

The bound functions assume a basis ``V`` with unit-norm columns (as the
sketched basis of sketch-and-select Arnoldi has) and a unit vector ``v``
appended to it; ``alpha`` is ``|V^T v|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import cond2, jacobi_svd, singular_values


class BoundDomainError(ValueError):
    """Raised when alpha >= sigma_min, where the bounds say nothing."""


def _svd(v):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    q, r = np.linalg.qr(v)
    u, sigma, wt = jacobi_svd(r)
    return q @ u, sigma, wt


def eta_bound(v, vnew) -> tuple[float, float]:
    """Return (eta, growth) with eta = |(V^T V)^{-1/2} V^T vnew| and
    growth = sqrt((1 + eta) / (1 - eta)) bounding cond([V, vnew]) / cond(V).
    """
    u, sigma, _ = _svd(v)
    # (V^T V)^{-1/2} V^T = W U^T, so eta is the norm of U^T vnew
    eta = float(np.linalg.norm(u.T @ np.asarray(vnew, dtype=np.float64)))
    growth = math.sqrt((1 + eta) / (1 - eta)) if eta < 1 else math.inf
    return eta, growth


def _check_domain(sigma_min, alpha) -> float:
    if not 0 < sigma_min <= 1 + 1e-12:
        raise BoundDomainError(f"sigma_min={sigma_min} outside (0, 1]; columns must have unit norm")
    # unit columns force sigma_min <= 1; clip rounding so alpha = 1 cannot slip through
    sigma_min = min(sigma_min, 1.0)
    if not 0 <= alpha < sigma_min:
        raise BoundDomainError(f"need 0 <= alpha < sigma_min, got alpha={alpha}, sigma_min={sigma_min}")
    return sigma_min


def sigma_min_lower_bound(sigma_min: float, alpha: float) -> float:
    """Lower bound on sigma_min([V, v])^2; attained by :func:`adversarial_next_vector`."""
    sigma_min = _check_domain(sigma_min, alpha)
    if alpha == 0:
        return sigma_min**2
    s2 = sigma_min**2
    # (1 + s2 - sqrt(D)) / 2 rewritten without cancellation
    return 2 * (s2 - alpha**2) / (1 + s2 + math.sqrt((1 - s2) ** 2 + 4 * alpha**2))


def sigma_max_upper_bound(sigma_max: float, alpha: float) -> float:
    """Upper bound on sigma_max([V, v])^2."""
    s2 = sigma_max**2
    return (1 + s2 + math.sqrt((s2 - 1) ** 2 + 4 * alpha**2)) / 2


def cond_upper_bound(sigma_min: float, sigma_max: float, alpha: float) -> float:
    """Upper bound on cond([V, v])^2."""
    return sigma_max_upper_bound(sigma_max, alpha) / sigma_min_lower_bound(sigma_min, alpha)


def attainable_cond_lower_bound(sigma_min: float, alpha: float) -> float:
    """cond([V, v*])^2 is at least this for the worst-case v* (uses sigma_max >= 1)."""
    return 1.0 / sigma_min_lower_bound(sigma_min, alpha)


@dataclass(frozen=True)
class BoundReport:
    sigma_min_v: float
    sigma_max_v: float
    alpha: float
    eta: float
    lower_bound_sigma_min_sq: float
    upper_bound_cond_sq: float
    attainable_lower_cond_sq: float
    measured_sigma_min_sq: float
    measured_cond_sq: float

    @property
    def gap_factor(self) -> float:
        return self.upper_bound_cond_sq / self.attainable_lower_cond_sq


def bound_report(v, vnew) -> BoundReport:
    v = np.asarray(v, dtype=np.float64)
    vnew = np.asarray(vnew, dtype=np.float64)
    sigma = singular_values(v)
    alpha = float(np.linalg.norm(v.T @ vnew))
    eta, _ = eta_bound(v, vnew)
    ext = singular_values(np.column_stack([v, vnew]))
    smin, smax = float(sigma[-1]), float(sigma[0])
    return BoundReport(
        sigma_min_v=smin,
        sigma_max_v=smax,
        alpha=alpha,
        eta=eta,
        lower_bound_sigma_min_sq=sigma_min_lower_bound(smin, alpha),
        upper_bound_cond_sq=cond_upper_bound(smin, smax, alpha),
        attainable_lower_cond_sq=attainable_cond_lower_bound(smin, alpha),
        measured_sigma_min_sq=float(ext[-1] ** 2),
        measured_cond_sq=float((ext[0] / ext[-1]) ** 2),
    )


def adversarial_next_vector(v, alpha: float, ambient_dim: int | None = None) -> np.ndarray:
    """Unit vector v* with |V^T v*| = alpha that minimizes sigma_min([V, v*]).

    V^T v* = -alpha * x where x is the unit eigenvector of V^T V for its
    smallest eigenvalue; the rest of v* lies along the first direction of
    an orthonormal complement of range(V). ``ambient_dim`` larger than
    the row count of V zero-pads V first.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    n, m = v.shape
    if ambient_dim is not None and ambient_dim != n:
        if ambient_dim < n:
            raise ValueError("ambient_dim smaller than the row count of V")
        v = np.vstack([v, np.zeros((ambient_dim - n, m))])
        n = ambient_dim
    if n <= m:
        raise ValueError("no room for an orthogonal component")
    u, sigma, wt = _svd(v)
    smin = float(sigma[-1])
    if not 0 <= alpha < smin:
        raise BoundDomainError(f"need 0 <= alpha < sigma_min={smin}")
    q, _ = np.linalg.qr(v, mode="complete")
    z = q[:, m]
    # V^T (V x) = lambda_min x, so -alpha/lambda_min * V x has V^T-image -alpha x
    x = wt[-1]
    inside = -(alpha / smin**2) * (v @ x)
    norm_in = float(np.linalg.norm(inside))
    if norm_in > 1:
        raise ValueError("required in-range component exceeds unit norm")
    return inside + math.sqrt(max(0.0, 1 - norm_in**2)) * z


def half_sigma(x: float) -> float:
    return x / 2


def decay_recurrence(x0: float, m0: int, m: int, alpha_rule=half_sigma) -> np.ndarray:
    """Worst-case sigma_min series x_{m0}, ..., x_m with alpha_j = alpha_rule(x_j)."""
    if not 0 < x0 <= 1:
        raise ValueError("x0 must lie in (0, 1]")
    if m < m0:
        raise ValueError("m must be at least m0")
    xs = [float(x0)]
    for _ in range(m - m0):
        xs.append(math.sqrt(sigma_min_lower_bound(xs[-1], alpha_rule(xs[-1]))))
    return np.array(xs)


def geometric_envelope(x0: float, steps: int, rate: float = 7 / 8) -> np.ndarray:
    """rate^{(m - m0)/2} * x0 for m - m0 = 0..steps."""
    return x0 * rate ** (np.arange(steps + 1) / 2)


def adversarial_replay(v0, steps: int, alpha_rule=half_sigma) -> tuple[np.ndarray, np.ndarray]:
    """Grow a basis by repeated worst-case vectors; return (basis, sigma_min series)."""
    v = np.asarray(v0, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    series = [float(singular_values(v)[-1])]
    for _ in range(steps):
        v = np.column_stack([v, adversarial_next_vector(v, alpha_rule(series[-1]))])
        series.append(float(singular_values(v)[-1]))
    return v, np.array(series)


def project_single(v, w, idx: int) -> np.ndarray:
    """w with its component along column ``idx`` removed, (I - v_i v_i^+) w."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    vi = v[:, idx]
    return w - vi * (vi @ w) / (vi @ vi)


def cond_after_projection(v, w, idx: int) -> tuple[float, float]:
    """cond([V, w_hat]) and cond([V, w_hat / |w_hat|]) after projecting w against one column."""
    what = project_single(v, w, idx)
    return cond2(np.column_stack([v, what])), cond2(np.column_stack([v, what / np.linalg.norm(what)]))


def orthogonality_metrics(v, vnew, normalize: bool = True) -> dict:
    """Loss-of-orthogonality measures of [V, vnew]: |I - G| and |G| (G the Gram
    matrix) in the 2-norm and Frobenius norm."""
    vnew = np.asarray(vnew, dtype=np.float64)
    if normalize:
        vnew = vnew / np.linalg.norm(vnew)
    ext = np.column_stack([v, vnew])
    gram = ext.T @ ext
    gap = np.eye(gram.shape[0]) - gram
    return {
        "identity_gap_2": float(np.linalg.norm(gap, 2)),
        "identity_gap_fro": float(np.linalg.norm(gap, "fro")),
        "gram_2": float(np.linalg.norm(gram, 2)),
        "gram_fro": float(np.linalg.norm(gram, "fro")),
    }


def singular_value_histogram(v, bins=None) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of log10 singular values; returns (counts, log10 bin edges).

    The default bins are one decade wide and centred on powers of ten, so
    singular values within rounding of 1 share the bin around 10^0.
    """
    sigma = singular_values(v)
    logs = np.log10(np.maximum(sigma, np.finfo(float).tiny))
    if bins is None:
        bins = np.arange(round(logs.min()) - 0.5, round(logs.max()) + 1.0)
    counts, edges = np.histogram(logs, bins=bins)
    return counts, edges


@dataclass
class ProfileData:
    methods: list
    problems: list
    metric: np.ndarray
    ratios: np.ndarray
    curves: dict

    def csv_rows(self):
        for name in self.methods:
            for theta, y in self.curves[name]:
                yield name, theta, y


def performance_profile(metric, methods=None, problems=None, larger_is_better: bool = True) -> ProfileData:
    """Dolan-More profiles from a (methods x problems) table.

    Failures (NaN, inf, or non-positive entries) get ratio +inf. Each curve
    is the step function y(theta) = fraction of problems with ratio <= theta,
    listed at theta = 1 and at every finite ratio.
    """
    metric = np.asarray(metric, dtype=np.float64)
    if metric.ndim != 2:
        raise ValueError("metric must be a methods x problems table")
    n_methods, n_problems = metric.shape
    methods = list(methods) if methods is not None else [f"method{i}" for i in range(n_methods)]
    problems = list(problems) if problems is not None else [f"problem{i}" for i in range(n_problems)]
    valid = np.isfinite(metric) & (metric > 0)
    ratios = np.full(metric.shape, np.inf)
    for p in range(n_problems):
        ok = valid[:, p]
        if not ok.any():
            continue
        col = metric[ok, p]
        best = col.max() if larger_is_better else col.min()
        ratios[ok, p] = best / col if larger_is_better else col / best
    curves = {}
    for i, name in enumerate(methods):
        finite = np.sort(ratios[i][np.isfinite(ratios[i])])
        thetas = np.unique(np.concatenate([[1.0], finite]))
        curves[name] = [(float(t), float(np.count_nonzero(ratios[i] <= t) / n_problems)) for t in thetas]
    return ProfileData(methods, problems, metric, ratios, curves)
