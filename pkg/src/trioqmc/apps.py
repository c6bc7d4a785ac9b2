"""Application integrands: multivariate normal box probabilities and Asian calls.

Both problems are rewritten as integrals over a unit cube.  Uniform inputs
are pushed through the normal quantile, so every evaluator clamps its
quantile arguments to ``[1e-15, 1 - 1e-15]``; that keeps designs that contain
the origin (unscrambled Sobol', unshifted lattices) finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .core import Integrand, estimate
from .linalg import as_symmetric, cholesky, sym_eigen
from .rand import StreamKey, phi, phi_inv
from .sequences import SamplerSpec, generate, iid_nodes

__all__ = [
    "CLAMP",
    "MVN_REFERENCE",
    "ASIAN_REFERENCE",
    "GaussianProblem",
    "box_probability_problem",
    "genz_integrand",
    "affine_integrand",
    "OptionProblem",
    "asian_call_problem",
    "brownian_cov",
    "path_factor",
    "asian_call_integrand",
    "asian_level_difference",
    "multilevel_estimate",
    "asian_reference_price",
]

CLAMP = 1e-15

#: probability for :func:`box_probability_problem`, from many scrambled Sobol' replications
MVN_REFERENCE = 0.6763373243578

#: price for :func:`asian_call_problem` (either construction); median of 10
#: scrambled Sobol' estimates with n = 2^20 under the PCA construction, see
#: :func:`asian_reference_price`
ASIAN_REFERENCE = 13.12197792


def _clamped_quantile(u):
    return phi_inv(np.clip(u, CLAMP, 1.0 - CLAMP))


@dataclass(frozen=True, eq=False)
class GaussianProblem:
    """``P(a <= Z <= b)`` for ``Z ~ N(0, sigma)``.

    ``factor`` defaults to the Cholesky factor of ``sigma``; a supplied factor
    must satisfy ``L L^T = sigma``.
    """

    a: np.ndarray
    b: np.ndarray
    sigma: np.ndarray
    factor: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        sigma = as_symmetric(np.atleast_2d(self.sigma), tol=1e-12)
        d = a.size
        if b.shape != (d,) or sigma.shape != (d, d):
            raise ValueError("a, b and sigma must have matching dimension")
        if not np.all(a < b):
            raise ValueError("need a_j < b_j in every coordinate")
        if self.factor is None:
            L, _ = cholesky(sigma, jitter=False)
        else:
            L = np.array(self.factor, dtype=float)
            if np.max(np.abs(L @ L.T - sigma)) > 1e-9 * max(1.0, np.max(np.abs(sigma))):
                raise ValueError("factor does not reproduce sigma")
        for arr in (a, b, sigma, L):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "factor", L)

    @property
    def d(self) -> int:
        return self.a.size


def box_probability_problem() -> GaussianProblem:
    """The three-dimensional box probability used throughout the demos."""
    a = [-6.0, -2.0, -2.0]
    b = [5.0, 2.0, 1.0]
    sigma = [[16.0, 4.0, 4.0], [4.0, 2.0, 1.5], [4.0, 1.5, 1.3125]]
    return GaussianProblem(a, b, sigma)


def genz_integrand(p: GaussianProblem) -> Integrand:
    """Genz's sequential conditioning transform, an integrand on ``[0,1]^(d-1)``.

    Coordinate ``j`` of the box is scaled by ``1/l_jj``, including the first.
    A univariate problem gives a constant integrand on ``[0, 1]``.
    """
    L = p.factor
    if np.any(np.triu(L, 1) != 0.0) or np.any(np.diag(L) <= 0.0):
        raise ValueError("Genz transform needs a lower-triangular factor with positive diagonal")
    d = p.d
    a, b = p.a, p.b

    def f(x):
        n = x.shape[0]
        alpha = np.full(n, phi(a[0] / L[0, 0]))
        beta = np.full(n, phi(b[0] / L[0, 0]))
        out = beta - alpha
        ys = np.empty((n, d))
        for j in range(1, d):
            ys[:, j - 1] = _clamped_quantile(alpha + x[:, j - 1] * (beta - alpha))
            shift = ys[:, : j] @ L[j, :j]
            alpha = phi((a[j] - shift) / L[j, j])
            beta = phi((b[j] - shift) / L[j, j])
            out = out * (beta - alpha)
        return out

    exact = None
    if d == 1:
        exact = float(phi(b[0] / L[0, 0]) - phi(a[0] / L[0, 0]))
    return Integrand(max(d - 1, 1), f, exact_mean=exact, label="mvn-genz")


def affine_integrand(p: GaussianProblem) -> Integrand:
    """Gaussian density times box volume after ``z = a + (b - a) x``."""
    if not (np.all(np.isfinite(p.a)) and np.all(np.isfinite(p.b))):
        raise ValueError("affine transform needs a bounded box")
    L = p.factor
    width = p.b - p.a
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    const = float(np.prod(width)) * math.exp(-0.5 * (p.d * math.log(2 * math.pi) + logdet))
    def f(x):
        z = p.a + width * x
        u = solve_triangular(L, z.T, lower=True, check_finite=False)
        return const * np.exp(-0.5 * np.sum(u * u, axis=0))

    return Integrand(p.d, f, label="mvn-affine")


# option pricing -------------------------------------------------------------

CONSTRUCTIONS = ("pca", "cholesky")


@dataclass(frozen=True)
class OptionProblem:
    """Arithmetic-mean Asian call monitored at ``t_j = j * horizon / d``."""

    spot: float = 100.0
    strike: float = 100.0
    rate: float = 0.05
    volatility: float = 0.5
    horizon: float = 1.0
    d: int = 12
    construction: str = "pca"

    def __post_init__(self):
        if min(self.spot, self.volatility, self.horizon) <= 0 or self.d < 1:
            raise ValueError("spot, volatility, horizon and d must be positive")
        if self.strike < 0 or self.rate < 0:
            raise ValueError("strike and rate must be nonnegative")
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"construction must be one of {CONSTRUCTIONS}")

    @property
    def times(self) -> np.ndarray:
        return self.horizon * np.arange(1, self.d + 1) / self.d


def asian_call_problem(construction: str = "pca") -> OptionProblem:
    """At-the-money call, ``S_0 = K = 100``, ``r = 0.05``, ``sigma = 0.5``, 12 dates over one year."""
    return OptionProblem(construction=construction)


def brownian_cov(d: int, horizon: float = 1.0) -> np.ndarray:
    """Covariance ``min(t_j, t_k)`` of Brownian motion at ``t_j = j * horizon / d``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    t = horizon * np.arange(1, d + 1) / d
    return np.minimum.outer(t, t)


def path_factor(sigma, construction: str) -> np.ndarray:
    """Square ``L`` with ``L L^T = sigma``: PCA ``V Lambda^(1/2)`` or Cholesky."""
    if construction == "pca":
        vals, vecs = sym_eigen(sigma)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))
    if construction == "cholesky":
        L, _ = cholesky(sigma, jitter=False)
        return L
    raise ValueError(f"construction must be one of {CONSTRUCTIONS}")


def _asian_payoff(p: OptionProblem, times, z):
    drift = (p.rate - 0.5 * p.volatility**2) * times
    S = p.spot * np.exp(drift + p.volatility * z)
    return np.maximum(S.mean(axis=1) - p.strike, 0.0) * math.exp(-p.rate * p.horizon)


def asian_call_integrand(p: OptionProblem) -> Integrand:
    """Discounted Asian call payoff as a function on ``[0, 1]^d``."""
    L = path_factor(brownian_cov(p.d, p.horizon), p.construction)
    times = p.times
    exact = None
    if p.strike == 0:
        exact = math.exp(-p.rate * p.horizon) * p.spot * float(np.mean(np.exp(p.rate * times)))

    def f(x):
        return _asian_payoff(p, times, _clamped_quantile(x) @ L.T)

    return Integrand(p.d, f, exact_mean=exact, label=f"asian-{p.construction}")


def asian_level_difference(p: OptionProblem, d_coarse: int) -> Integrand:
    """``f^(d) - f^(d_coarse)`` on one shared Brownian path, ``d = p.d``.

    The coarse path is the fine path read off at the coarse monitoring
    dates, so coarse increments are sums of fine increments.
    """
    if d_coarse < 1 or p.d % d_coarse:
        raise ValueError(f"coarse level {d_coarse} does not divide fine level {p.d}")
    L = path_factor(brownian_cov(p.d, p.horizon), p.construction)
    r = p.d // d_coarse
    fine_t = p.times
    coarse_t = fine_t[r - 1 :: r]

    def f(x):
        z = _clamped_quantile(x) @ L.T
        return _asian_payoff(p, fine_t, z) - _asian_payoff(p, coarse_t, z[:, r - 1 :: r])

    return Integrand(p.d, f, label=f"asian-diff-{p.d}-{d_coarse}")


def _level_problem(p: OptionProblem, d: int) -> OptionProblem:
    return OptionProblem(p.spot, p.strike, p.rate, p.volatility, p.horizon, d, p.construction)


def multilevel_estimate(p: OptionProblem, levels: Sequence[int], sizes: Sequence[int],
                        kind: str = "iid", randomization: str = "none",
                        key: StreamKey = StreamKey()) -> float:
    """Telescoping multilevel estimate of the Asian call price.

    Level 1 estimates ``f^(d_1)``; level ``l > 1`` estimates the coupled
    difference ``f^(d_l) - f^(d_{l-1})``.  Each level uses its own design of
    ``sizes[l]`` points from substream ``("level", l)`` of ``key``; Sobol'
    and lattice sizes must be powers of two.  ``p.d`` is ignored.
    """
    levels = [int(v) for v in levels]
    if len(levels) != len(sizes) or not levels:
        raise ValueError("need one sample size per level")
    for lo, hi in zip(levels, levels[1:]):
        if not (lo < hi and hi % lo == 0):
            raise ValueError(f"levels must be nested: {lo} does not divide {hi}")
    total = 0.0
    for l, (d_l, n_l) in enumerate(zip(levels, sizes)):
        spec = SamplerSpec(kind, d_l, randomization, key.child("level", l))
        if kind == "iid":
            design = iid_nodes(spec, int(n_l))
        else:
            m = int(n_l).bit_length() - 1
            if 1 << m != n_l:
                raise ValueError(f"{kind} level sizes must be powers of two, got {n_l}")
            design = generate(spec, m)
        fine = _level_problem(p, d_l)
        f = asian_call_integrand(fine) if l == 0 else asian_level_difference(fine, levels[l - 1])
        total += estimate(design, f)
    return total


def asian_reference_price(p: OptionProblem = OptionProblem(), m: int = 20, reps: int = 10,
                          key: StreamKey = StreamKey(20170401)) -> float:
    """Median of ``reps`` scrambled Sobol' estimates with ``2^m`` points."""
    f = asian_call_integrand(p)
    ests = [estimate(generate(SamplerSpec("sobol", p.d, "scramble+shift", key.child("rep", r)), m), f)
            for r in range(reps)]
    return float(np.median(ests))
