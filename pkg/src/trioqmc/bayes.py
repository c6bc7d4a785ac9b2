"""Bayesian cubature with a product Matern covariance.

The integrand is modelled as a zero-mean Gaussian process with covariance
``s^2 C_theta``.  Given nodes and values ``y``:

* optimal weights ``w = C^{-1} c`` minimize the Bayesian discrepancy
  ``sqrt(c_0 - 2 c^T w + w^T C w)`` and make the error unbiased given ``y``;
* ``s`` and ``theta`` are fitted by maximum likelihood, the profile
  objective in ``theta`` being ``log det(C)/n + log(y^T C^{-1} y)``;
* ``|mu - mu_hat| <= 2.58 * DSC * s`` holds with probability 99% under the
  model.

``kernel_scale`` multiplies ``C``, ``c`` and ``c_0`` by a positive constant.
It has no effect on fitted ``theta`` or on the error bound, and exists so that
this invariance can be checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import double_integral, gram, matern_kernel, mean_embedding
from .linalg import NotPositiveDefiniteError, cholesky, logdet, spd_solve
from .rand import standard_normal
from .sequences import SamplerSpec, generate

__all__ = [
    "Z99",
    "THETA_GRID",
    "MAX_BAYES_N",
    "BayesFit",
    "IllConditionedError",
    "bayes_cubature",
    "mle_objective",
    "mle_fit",
    "bayes_mle_cubature",
    "credible_bound",
    "gp_joint_sample",
    "bayes_squared_discrepancy",
    "randomized_bayes_discrepancy",
]

Z99 = 2.58
THETA_GRID = np.logspace(-2.0, 3.0, 25)
MAX_BAYES_N = 4096
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class IllConditionedError(NotPositiveDefiniteError):
    pass


@dataclass(frozen=True, eq=False)
class BayesFit:
    theta: float
    s: float
    weight_mode: str
    mu_hat: float
    dsc: float
    half_width_99: float
    jitter: float
    n: int
    d: int
    weights: np.ndarray

    @property
    def interval(self) -> tuple[float, float]:
        return (self.mu_hat - self.half_width_99, self.mu_hat + self.half_width_99)


def _pieces(nodes, theta, kernel_scale):
    spec = matern_kernel(nodes.shape[1], theta)
    C = kernel_scale * gram(spec, nodes)
    c = kernel_scale * mean_embedding(spec, nodes)
    c0 = kernel_scale * double_integral(spec)
    return C, c, c0


def _factor(C, theta):
    try:
        return cholesky(C)
    except NotPositiveDefiniteError as exc:
        raise IllConditionedError(f"Matern gram at theta={theta:g} is ill-conditioned: {exc}") from None


def _as_nodes(nodes):
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    if nodes.shape[0] > MAX_BAYES_N:
        raise ValueError(f"Bayesian cubature is capped at n={MAX_BAYES_N}")
    return nodes


def bayes_cubature(nodes, y, theta: float, weight_mode: str = "optimal",
                   kernel_scale: float = 1.0) -> BayesFit:
    """Bayesian cubature at a fixed shape parameter.

    ``s`` is the maximum-likelihood scale at this ``theta``.  In ``"equal"``
    mode the estimate is the sample mean and the discrepancy is that of the
    equal-weight rule.
    """
    nodes = _as_nodes(nodes)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, d = nodes.shape
    if y.shape != (n,):
        raise ValueError("need one value per node")
    C, c, c0 = _pieces(nodes, theta, kernel_scale)
    L, eps = _factor(C, theta)
    Cinv_c = spd_solve(L, c)
    if weight_mode == "optimal":
        w = Cinv_c
        sq = c0 - float(c @ Cinv_c)
    elif weight_mode == "equal":
        w = np.full(n, 1.0 / n)
        sq = c0 - 2.0 * float(c @ w) + float(w @ C @ w)
    else:
        raise ValueError("weight_mode must be 'optimal' or 'equal'")
    dsc = math.sqrt(max(0.0, sq))
    s = math.sqrt(max(0.0, float(y @ spd_solve(L, y))) / n)
    w.setflags(write=False)
    return BayesFit(float(theta), s, weight_mode, float(w @ y), dsc, Z99 * dsc * s, eps, n, d, w)


def mle_objective(nodes, y, theta: float, kernel_scale: float = 1.0) -> float:
    """``log det(C_theta)/n + log(y^T C_theta^{-1} y)``."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    C, _, _ = _pieces(nodes, theta, kernel_scale)
    L, _ = _factor(C, theta)
    quad = float(y @ spd_solve(L, y))
    return logdet(L) / nodes.shape[0] + math.log(quad)


def _safe_objective(nodes, y, theta, kernel_scale):
    try:
        return mle_objective(nodes, y, theta, kernel_scale)
    except IllConditionedError as exc:
        warnings.warn(f"skipping theta={theta:g}: {exc}", RuntimeWarning, stacklevel=3)
        return math.inf


def mle_fit(nodes, y, kernel_scale: float = 1.0, grid=THETA_GRID, rtol: float = 1e-3):
    """Maximum-likelihood ``(theta, s)``.

    A coarse search over ``grid`` brackets the minimum of the profile
    objective; golden-section search in ``log(theta)`` then narrows the
    bracket to relative width ``rtol``.  The best point seen is returned.
    """
    nodes = _as_nodes(nodes)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = nodes.shape[0]
    if n < 2:
        raise ValueError("MLE needs at least two nodes")
    if not np.any(y != 0.0):
        raise ValueError("MLE is degenerate for identically zero data")
    grid = np.asarray(grid, dtype=float)
    vals = np.array([_safe_objective(nodes, y, t, kernel_scale) for t in grid])
    if not np.any(np.isfinite(vals)):
        raise IllConditionedError("Matern gram failed to factor at every grid point")
    i = int(np.argmin(vals))
    best_t, best_v = grid[i], vals[i]
    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, grid.size - 1)])

    def obj(u):
        return _safe_objective(nodes, y, math.exp(u), kernel_scale)

    a, b = lo, hi
    x1, x2 = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    f1, f2 = obj(x1), obj(x2)
    while b - a > math.log1p(rtol):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = obj(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = obj(x2)
    for u, v in ((x1, f1), (x2, f2)):
        if v < best_v:
            best_t, best_v = math.exp(u), v
    fit = bayes_cubature(nodes, y, best_t, "optimal", kernel_scale)
    return float(best_t), fit.s


def bayes_mle_cubature(nodes, y, weight_mode: str = "optimal", kernel_scale: float = 1.0) -> BayesFit:
    """:func:`mle_fit` followed by :func:`bayes_cubature` at the fitted ``theta``."""
    theta, _ = mle_fit(nodes, y, kernel_scale)
    return bayes_cubature(nodes, y, theta, weight_mode, kernel_scale)


def credible_bound(fit: BayesFit) -> tuple[float, float]:
    """99% interval ``mu_hat -/+ 2.58 * DSC * s``."""
    return fit.interval


def gp_joint_sample(theta: float, s: float, nodes, key, size: int | None = None,
                    kernel_scale: float = 1.0):
    """Exact joint draw of ``(int f, f(x_1), ..., f(x_n))`` for ``f ~ GP(0, s^2 C)``.

    Parameters
    ----------
    nodes : array_like, shape (n, d)
        May have zero rows (``n = 0``); then only the integral is drawn and
        ``d`` is taken from the second axis.
    key : StreamKey or numpy Generator
    size : int, optional
        Number of independent draws; ``None`` gives a single draw.

    Returns
    -------
    mu : float or ndarray of shape (size,)
    y : ndarray of shape (n,) or (size, n)
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2:
        raise ValueError("nodes must be an (n, d) array")
    n, d = nodes.shape
    spec = matern_kernel(d, theta)
    c0 = double_integral(spec)
    J = np.empty((n + 1, n + 1))
    J[0, 0] = c0
    if n:
        c = mean_embedding(spec, nodes)
        J[0, 1:] = J[1:, 0] = c
        J[1:, 1:] = gram(spec, nodes)
    J *= kernel_scale * s**2
    L, _ = _factor(J, theta)
    count = 1 if size is None else int(size)
    z = standard_normal(key, (count, n + 1))
    v = z @ L.T
    if size is None:
        return float(v[0, 0]), v[0, 1:]
    return v[:, 0], v[:, 1:]


def bayes_squared_discrepancy(nodes, theta: float, weights=None, kernel_scale: float = 1.0) -> float:
    """``c_0 - 2 c^T w + w^T C w``; equal weights by default."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    C, c, c0 = _pieces(nodes, theta, kernel_scale)
    w = np.full(nodes.shape[0], 1.0 / nodes.shape[0]) if weights is None else np.asarray(weights)
    return c0 - 2.0 * float(c @ w) + float(w @ C @ w)


def randomized_bayes_discrepancy(theta: float, sampler: SamplerSpec, m: int, replications: int,
                                 weight_mode: str = "equal", kernel_scale: float = 1.0) -> float:
    """Root of the mean Bayesian squared discrepancy over random designs.

    Replication ``r`` uses ``sampler`` re-keyed to ``sampler.key.child("rep", r)``.
    """
    if replications < 2:
        raise ValueError("need at least two replications")
    sq = []
    for r in range(replications):
        nodes = generate(sampler.with_key(sampler.key.child("rep", r)), m).nodes
        if weight_mode == "equal":
            sq.append(bayes_squared_discrepancy(nodes, theta, kernel_scale=kernel_scale))
        else:
            fit = bayes_cubature(nodes, np.zeros(nodes.shape[0]), theta, weight_mode, kernel_scale)
            sq.append(fit.dsc**2)
    return math.sqrt(max(0.0, float(np.mean(sq))))
