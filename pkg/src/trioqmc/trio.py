"""Discrepancies, optimal weights, kernel-section integrands and trio decompositions.

The squared discrepancy of ``nu - nu_hat`` for a reproducing kernel ``K``
is the quadratic form ``k_0 - 2 k^T w + w^T K w``.  :func:`discrepancy_quadratic`
evaluates it for any kernel and weights; :func:`l2_discrepancy_closed` and
:func:`weighted_l2_discrepancy` are the equal-weight closed forms written out
coordinate by coordinate.

Kernel-section integrands ``f = sum_j a_j K(., z_j)`` have an exactly known
mean and variation ``||f - f(1)||``, so every factor of the deterministic
decomposition can be checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Integrand, SampleDesign, TrioReport, estimate
from .kernels import (
    KernelSpec,
    diagonal_integral,
    double_integral,
    gram,
    kernel_matrix,
    mean_embedding,
)
from .linalg import cholesky, spd_solve

__all__ = [
    "KernelSectionIntegrand",
    "random_section_integrand",
    "squared_discrepancy",
    "discrepancy_quadratic",
    "l2_discrepancy_closed",
    "weighted_l2_discrepancy",
    "iid_expected_sq_disc",
    "optimal_weights",
    "section_variation",
    "trio_decompose",
    "randomized_discrepancy_iid",
    "randomized_discrepancy_empirical",
]

_NEG_WARN = -1e-10


def _clamped_sqrt(sq: float, what: str = "squared discrepancy") -> float:
    if sq < _NEG_WARN:
        warnings.warn(f"{what} {sq:.3e} is negative beyond round-off; clamped to 0",
                      RuntimeWarning, stacklevel=3)
    return math.sqrt(max(0.0, sq))


def squared_discrepancy(spec: KernelSpec, design: SampleDesign) -> float:
    """``k_0 - 2 k^T w + w^T K w``, unclamped."""
    if spec.d != design.d:
        raise ValueError(f"kernel has d={spec.d} but design has d={design.d}")
    w = design.weights
    k = mean_embedding(spec, design.nodes)
    K = gram(spec, design.nodes)
    return double_integral(spec) - 2.0 * float(k @ w) + float(w @ K @ w)


def discrepancy_quadratic(spec: KernelSpec, design: SampleDesign) -> float:
    """Discrepancy of ``design`` for kernel ``spec`` via the quadratic form."""
    return _clamped_sqrt(squared_discrepancy(spec, design))


def _require_equal_weights(design: SampleDesign):
    if not design.equal_weights:
        raise ValueError("closed form assumes weights 1/n; use discrepancy_quadratic instead")


_BLOCK = 512


def _equal_weight_sq(first, single_terms, pair_factor, X) -> float:
    n = X.shape[0]
    total = 0.0
    # row blocks keep the pair matrix small for large n
    for lo in range(0, n, _BLOCK):
        rows = X[lo : lo + _BLOCK]
        pair = np.ones((rows.shape[0], n))
        for k in range(X.shape[1]):
            pair *= pair_factor(k, np.maximum.outer(rows[:, k], X[:, k]))
        total += float(pair.sum())
    return first - 2.0 / n * float(np.sum(single_terms)) + total / n**2


def l2_discrepancy_closed(design: SampleDesign) -> float:
    """L2-discrepancy of an equally weighted design, written coordinatewise."""
    _require_equal_weights(design)
    X = design.nodes
    single = np.prod((3.0 - X**2) / 2.0, axis=1)
    sq = _equal_weight_sq((4.0 / 3.0) ** design.d, single, lambda k, m: 2.0 - m, X)
    return _clamped_sqrt(sq)


def weighted_l2_discrepancy(design: SampleDesign, gamma) -> float:
    """Coordinate-weighted L2-discrepancy of an equally weighted design."""
    _require_equal_weights(design)
    g2 = np.asarray(gamma, dtype=float).reshape(-1) ** 2
    if g2.shape != (design.d,):
        raise ValueError(f"need {design.d} coordinate weights, got {g2.size}")
    X = design.nodes
    single = np.prod(1.0 + g2 * (1.0 - X**2) / 2.0, axis=1)
    first = float(np.prod(1.0 + g2 / 3.0))
    sq = _equal_weight_sq(first, single, lambda k, m: 1.0 + g2[k] * (1.0 - m), X)
    return _clamped_sqrt(sq)


def iid_expected_sq_disc(spec: KernelSpec, n: int) -> float:
    """Mean squared discrepancy of ``n`` equally weighted IID uniform points."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return (diagonal_integral(spec) - double_integral(spec)) / n


def optimal_weights(spec: KernelSpec, nodes) -> np.ndarray:
    """Weights ``w = K^{-1} k`` minimizing the discrepancy at fixed nodes.

    Wrap the result with :meth:`SampleDesign.with_weights`; the design is a
    probability design only if the weights happen to sum to one.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    L, _ = cholesky(gram(spec, nodes))
    return spd_solve(L, mean_embedding(spec, nodes))


@dataclass(frozen=True, eq=False)
class KernelSectionIntegrand:
    """``f(x) = sum_j a_j K(x, z_j)`` for an ``l2`` or ``weighted_l2`` kernel.

    For these kernels ``K(., 1) = 1``, so the constant 1 has unit norm and
    ``<f, 1> = f(1)``; that makes ``||f - f(1)||`` computable exactly.
    """

    spec: KernelSpec
    anchors: np.ndarray
    coeffs: np.ndarray
    label: str = "kernel-section"
    exact_mean: float = field(init=False)
    exact_variation: float = field(init=False)

    def __post_init__(self):
        if self.spec.kind not in ("l2", "weighted_l2"):
            raise ValueError("kernel sections need an l2 or weighted_l2 kernel")
        z = np.atleast_2d(np.array(self.anchors, dtype=float))
        a = np.array(self.coeffs, dtype=float).reshape(-1)
        if z.shape != (a.size, self.spec.d):
            raise ValueError("need one coefficient per anchor and d coordinates per anchor")
        z.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "anchors", z)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "exact_mean", float(a @ mean_embedding(self.spec, z)))
        object.__setattr__(self, "exact_variation", section_variation(self))

    @property
    def d(self) -> int:
        return self.spec.d

    def __call__(self, x) -> np.ndarray:
        return kernel_matrix(self.spec, x, self.anchors) @ self.coeffs

    def as_integrand(self) -> Integrand:
        return Integrand(self.d, self.__call__, self.exact_mean, self.exact_variation, self.label)

    def scaled(self, c: float) -> KernelSectionIntegrand:
        return KernelSectionIntegrand(self.spec, self.anchors, c * self.coeffs, self.label)


def random_section_integrand(spec: KernelSpec, n_anchors: int, rng) -> KernelSectionIntegrand:
    """Uniform anchors and standard normal coefficients."""
    z = rng.random((n_anchors, spec.d))
    a = rng.standard_normal(n_anchors)
    return KernelSectionIntegrand(spec, z, a)


def section_variation(f: KernelSectionIntegrand) -> float:
    """``||f - f(1)||`` in the kernel's Hilbert space."""
    if f.spec.kind not in ("l2", "weighted_l2"):
        raise ValueError("variation anchored at f(1) needs an l2 or weighted_l2 kernel")
    Kzz = gram(f.spec, f.anchors)
    f1 = float(kernel_matrix(f.spec, np.ones((1, f.d)), f.anchors)[0] @ f.coeffs)
    sq = float(f.coeffs @ Kzz @ f.coeffs) - f1**2
    if sq < -1e-12 * max(1.0, f1**2):
        raise ArithmeticError(f"squared variation {sq:.3e} is negative beyond round-off")
    return math.sqrt(max(0.0, sq))


_RANDOM_FLAVORS = ("randomized", "randomized-bayesian")


def trio_decompose(design: SampleDesign, f, dsc: float, var: Optional[float] = None,
                   flavor: str = "deterministic") -> TrioReport:
    """Split the cubature error of ``f`` on ``design`` into three factors.

    Parameters
    ----------
    design, f
        The cubature rule and integrand; ``f.exact_mean`` gives the error.
    dsc : float
        Discrepancy matching ``flavor``.
    var : float, optional
        Variation of ``f``.  For the deterministic and randomized flavors it
        is anchored at ``T(f) = f(1)``, which requires a probability design.
    flavor : str

    Returns
    -------
    TrioReport
        Confounding is ``error / (var * dsc)``, or 0 when that product is 0.
        Without ``var`` the report carries no confounding; without an exact
        mean it carries no error either.
    """
    if var is not None and flavor in ("deterministic", "randomized") and not design.probability:
        raise ValueError("variation anchored at f(1) needs weights summing to one")
    mu_hat = estimate(design, f)
    mean = getattr(f, "exact_mean", None)
    if mean is None:
        return TrioReport(mu_hat, dsc, flavor, variation=var)
    error = mean - mu_hat
    if var is None:
        return TrioReport(mu_hat, dsc, flavor, error=error)
    prod = var * dsc
    cnf = error / prod if prod != 0.0 else 0.0
    return TrioReport(mu_hat, dsc, flavor, error=error, variation=var, confounding=cnf)


def randomized_discrepancy_iid(n: int) -> float:
    """Randomized discrepancy of simple Monte Carlo, ``1/sqrt(n)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 / math.sqrt(n)


def randomized_discrepancy_empirical(designs: Iterable[SampleDesign],
                                     integrands: Sequence[KernelSectionIntegrand]) -> float:
    """Estimate the randomized discrepancy of a random design family.

    For each test integrand, the root mean square error over ``designs``
    divided by its variation; the largest ratio is returned.  Over a finite
    family of integrands this estimates the supremum from below.
    """
    designs = list(designs)
    if not designs:
        raise ValueError("need at least one design")
    best = 0.0
    for f in integrands:
        if f.exact_variation == 0.0:
            continue
        errs = np.array([f.exact_mean - estimate(des, f) for des in designs])
        best = max(best, math.sqrt(float(np.mean(errs**2))) / f.exact_variation)
    return best
