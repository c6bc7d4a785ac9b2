"""Product kernels on ``[0, 1]^d`` with closed-form integrals under the uniform measure.

Three kinds are supported, each a product of one-dimensional factors:

``l2``
    ``2 - max(x, t)``; the kernel whose discrepancy is the L2-discrepancy.
``weighted_l2``
    ``1 + gamma_k^2 (1 - max(x, t))`` with coordinate weights ``gamma_k``.
``matern``
    ``(1 + theta |x - t|) exp(-theta |x - t|)``, the Matern covariance with
    smoothness 3/2 and a single shape parameter shared by all coordinates.

For each kind the module provides the kernel, its mean embedding
``k(x) = int K(x, t) dt`` and the double integral ``k_0``.  The Matern formulas
come from the antiderivative ``-(2/theta + u) exp(-theta u)`` of
``(1 + theta u) exp(-theta u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "KernelSpec",
    "l2_kernel",
    "weighted_kernel",
    "matern_kernel",
    "gamma_from_decay",
    "kernel_matrix",
    "kernel_eval",
    "mean_embedding",
    "double_integral",
    "diagonal_integral",
    "gram",
]

KINDS = ("l2", "weighted_l2", "matern")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    kind: str
    d: int
    gamma: Optional[np.ndarray] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.kind == "weighted_l2":
            g = np.array(self.gamma, dtype=float).reshape(-1)
            if g.shape != (self.d,) or not np.all(g > 0):
                raise ValueError("weighted_l2 needs d positive coordinate weights")
            g.setflags(write=False)
            object.__setattr__(self, "gamma", g)
        if self.kind == "matern":
            if self.theta is None or not self.theta > 0:
                raise ValueError("matern needs a positive shape parameter theta")
            object.__setattr__(self, "theta", float(self.theta))

    def __repr__(self):
        extra = ""
        if self.kind == "weighted_l2":
            extra = f", gamma={self.gamma.tolist()}"
        elif self.kind == "matern":
            extra = f", theta={self.theta:g}"
        return f"KernelSpec({self.kind!r}, d={self.d}{extra})"


def l2_kernel(d: int) -> KernelSpec:
    return KernelSpec("l2", d)


def gamma_from_decay(d: int, decay: float) -> np.ndarray:
    """Coordinate weights with ``gamma_k^2 = k^-decay``."""
    k = np.arange(1, d + 1, dtype=float)
    return k ** (-decay / 2.0)


def weighted_kernel(gamma) -> KernelSpec:
    g = np.asarray(gamma, dtype=float).reshape(-1)
    return KernelSpec("weighted_l2", g.size, gamma=g)


def matern_kernel(d: int, theta: float) -> KernelSpec:
    return KernelSpec("matern", d, theta=theta)


def _check_cube(x, d, name):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != d:
        raise ValueError(f"{name} has {x.shape[1]} coordinates, kernel has d={d}")
    if not np.all(np.isfinite(x)) or x.min(initial=0.0) < 0.0 or x.max(initial=0.0) > 1.0:
        raise ValueError(f"{name} lies outside [0, 1]^d")
    return x


def _factor(spec: KernelSpec, k: int, xk, tk):
    """One-coordinate kernel factor on broadcast arrays."""
    if spec.kind == "l2":
        return 2.0 - np.maximum(xk, tk)
    if spec.kind == "weighted_l2":
        # (1 + g^2) - g^2 max: for g = 1 this is exactly the l2 factor
        g2 = spec.gamma[k] ** 2
        return (1.0 + g2) - g2 * np.maximum(xk, tk)
    u = spec.theta * np.abs(xk - tk)
    return (1.0 + u) * np.exp(-u)


def kernel_matrix(spec: KernelSpec, X, T) -> np.ndarray:
    """Matrix ``K(X_i, T_j)`` for point arrays ``X`` (n, d) and ``T`` (m, d)."""
    X = _check_cube(X, spec.d, "x")
    T = _check_cube(T, spec.d, "t")
    K = np.ones((X.shape[0], T.shape[0]))
    for k in range(spec.d):
        K *= _factor(spec, k, X[:, k][:, None], T[:, k][None, :])
    return K


def kernel_eval(spec: KernelSpec, x, t) -> float:
    """``K(x, t)`` for two single points."""
    return float(kernel_matrix(spec, np.reshape(x, (1, -1)), np.reshape(t, (1, -1)))[0, 0])


def gram(spec: KernelSpec, nodes) -> np.ndarray:
    """Symmetric matrix of pairwise kernel values at ``nodes``.

    Every factor depends on ``max(x, t)`` or ``|x - t|``, so the result is
    exactly symmetric without any averaging.
    """
    return kernel_matrix(spec, nodes, nodes)


def _matern_partial(theta: float, a):
    """``int_0^a (1 + theta u) exp(-theta u) du``."""
    e = np.exp(-theta * a)
    return -(2.0 / theta) * np.expm1(-theta * a) - a * e


def _matern_double_1d(theta: float) -> float:
    """``int_0^1 int_0^1 (1 + theta|x-t|) exp(-theta|x-t|) dx dt``."""
    if theta < 0.05:
        # Taylor series; the closed form loses ~1/theta^2 digits to cancellation
        coef = (1.0, 0.0, -1 / 12, 1 / 30, -1 / 120, 1 / 630, -1 / 4032, 1 / 30240,
                -1 / 259200, 1 / 2494800)
        return float(np.polyval(coef[::-1], theta))
    e = math.exp(-theta)
    return 2.0 * (2.0 / theta - 3.0 / theta**2 + e * (3.0 / theta**2 + 1.0 / theta))


def mean_embedding(spec: KernelSpec, x) -> np.ndarray:
    """``k(x) = int K(x, t) dt`` for each row of ``x`` (scalar for a single point)."""
    single = np.ndim(x) == 1
    X = _check_cube(x, spec.d, "x")
    out = np.ones(X.shape[0])
    for k in range(spec.d):
        xk = X[:, k]
        if spec.kind == "l2":
            out *= (3.0 - xk**2) / 2.0
        elif spec.kind == "weighted_l2":
            out *= 1.0 + spec.gamma[k] ** 2 * (1.0 - xk**2) / 2.0
        else:
            out *= _matern_partial(spec.theta, xk) + _matern_partial(spec.theta, 1.0 - xk)
    return float(out[0]) if single else out


def double_integral(spec: KernelSpec) -> float:
    """``k_0 = int int K(x, t) dx dt``."""
    if spec.kind == "l2":
        return (4.0 / 3.0) ** spec.d
    if spec.kind == "weighted_l2":
        return float(np.prod(1.0 + spec.gamma**2 / 3.0))
    return _matern_double_1d(spec.theta) ** spec.d


def diagonal_integral(spec: KernelSpec) -> float:
    """``int K(x, x) dx``."""
    if spec.kind == "l2":
        return 1.5**spec.d
    if spec.kind == "weighted_l2":
        return float(np.prod(1.0 + spec.gamma**2 / 2.0))
    return 1.0
