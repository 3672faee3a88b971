"""Numeric kernels shared by the resolvent, control and dilation labs.

Smallest singular values drive everything here: operator norms of inverses
are computed as 1/sigma_min of the forward matrix, never by forming the
inverse.  Dense SVD handles matrices up to a side threshold; beyond it an
LU-based inverse power iteration on A^H A takes over, with an explicit
residual acceptance.  A stalled iteration falls back to the dense route
instead of reporting an uncertified number.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svdvals

from .errors import InvalidArgumentError

__all__ = [
    "smallest_singular_value",
    "smallest_singular_pair",
    "operator_norm",
    "fit_linear",
    "fit_exponent",
    "fit_log_linear",
]

DENSE_THRESHOLD = 512
_RESIDUAL_TOL = 1e-9
_MAX_ITER = 400


def smallest_singular_value(a: np.ndarray, dense_threshold: int = DENSE_THRESHOLD) -> float:
    return smallest_singular_pair(a, dense_threshold)[0]


def smallest_singular_pair(a: np.ndarray, dense_threshold: int = DENSE_THRESHOLD):
    """(sigma_min, right singular vector).  0 with a near-kernel vector if singular.

    Square matrices above the dense threshold use inverse power iteration
    on A^H A through one LU factorization; convergence requires the
    relative residual ||A^H A v - sigma^2 v|| / (||A||_1 sigma) <= 1e-9.
    """
    a = np.asarray(a)
    n = min(a.shape)
    if a.shape[0] != a.shape[1] or n <= dense_threshold:
        # economy SVD also covers rectangular inputs
        u, s, vh = np.linalg.svd(a, full_matrices=False)
        return float(s[-1]), vh[-1].conj()
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix contains non-finite entries")
    try:
        lu = lu_factor(a)
    except np.linalg.LinAlgError:
        return 0.0, None
    if not np.all(np.isfinite(lu[0])):
        return 0.0, None
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    norm_a1 = np.max(np.abs(a).sum(axis=0))
    sigma = None
    for _ in range(_MAX_ITER):
        # one application of (A^H A)^{-1}
        y = lu_solve(lu, v, trans=2)
        w = lu_solve(lu, y, trans=0)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            return 0.0, None
        v = w / nw
        av = a @ v
        sigma = float(np.linalg.norm(av))
        res = np.linalg.norm(a.conj().T @ av - sigma**2 * v)
        if res <= _RESIDUAL_TOL * max(norm_a1 * sigma, 1e-300):
            return sigma, v
    # clustered singular values stall plain inverse iteration; the dense
    # route always certifies, it is just slower
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return float(s[-1]), vh[-1].conj()


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm.  Dense path only; callers keep sizes moderate."""
    return float(svdvals(np.asarray(a))[0])


def fit_linear(x: np.ndarray, y: np.ndarray):
    """Least squares y ~ slope*x + intercept, with R^2.

    A perfect fit (zero total variance or zero residual) reports R^2 = 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise InvalidArgumentError("need at least two points to fit a line")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-300 or ss_res <= 1e-300 * max(ss_tot, 1.0):
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)


def fit_exponent(grid, values, window: float = 1.0):
    """Power-law fit on the top `window` decades of the grid.

    Returns (slope, intercept, r2) of log10(values) against log10(grid),
    restricted to grid points within `window` decades of the top; the
    intercept is at log10(grid) = 0.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.size < 8:
        raise InvalidArgumentError(f"need at least 8 grid points, got {grid.size}")
    if np.any(grid <= 0) or np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise InvalidArgumentError("fit_exponent needs positive finite grid and values")
    lg = np.log10(grid)
    keep = lg >= lg.max() - window
    if np.count_nonzero(keep) < 2:
        raise InvalidArgumentError("fit window keeps fewer than two points")
    return fit_linear(lg[keep], np.log10(values[keep]))


def fit_log_linear(t, values):
    """Exponential fit: log(values) against t.  Returns (rate, intercept, r2).

    rate is the coefficient in values ~ exp(rate * t) * const.
    """
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        raise InvalidArgumentError("exponential fit needs positive values")
    slope, intercept, r2 = fit_linear(np.asarray(t, dtype=float), np.log(values))
    return slope, intercept, r2
