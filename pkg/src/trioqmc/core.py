"""Sampling designs, integrands, trio reports and the weighted-sum estimator."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Provenance",
    "SampleDesign",
    "Integrand",
    "TrioReport",
    "FLAVORS",
    "NonFiniteIntegrandError",
    "estimate",
    "write_points",
    "read_points",
    "format_points",
    "parse_points",
]

FLAVORS = ("deterministic", "randomized", "bayesian", "randomized-bayesian")

_PROBABILITY_TOL = 1e-12


class NonFiniteIntegrandError(ValueError):
    """An integrand returned NaN or an infinity at some node."""

    def __init__(self, index: int, value: float):
        super().__init__(f"integrand value {value!r} at node {index} is not finite")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class Provenance:
    """Where a design came from: sampler name, master seed, stream path."""

    sampler: str = "explicit"
    seed: Optional[int] = None
    path: tuple = ()


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SampleDesign:
    """A sampling measure ``sum_i w_i delta_{x_i}`` on the unit cube.

    Parameters
    ----------
    nodes : array_like, shape (n, d)
        One point per row, every coordinate in ``[0, 1]``.
    weights : array_like, shape (n,), optional
        Defaults to equal weights ``1/n``.
    probability : bool, optional
        Declare that the weights sum to one.  Defaults to True for equal
        weights and False for explicit weights.
    provenance : Provenance, optional
    """

    nodes: np.ndarray
    weights: Optional[np.ndarray] = None
    probability: Optional[bool] = None
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim == 1:
            nodes = _frozen(nodes[:, None])
        if nodes.ndim != 2 or nodes.shape[0] < 1 or nodes.shape[1] < 1:
            raise ValueError(f"nodes must be a nonempty (n, d) array, got shape {nodes.shape}")
        if not np.all(np.isfinite(nodes)) or nodes.min() < 0.0 or nodes.max() > 1.0:
            raise ValueError("every node coordinate must lie in [0, 1]")
        n = nodes.shape[0]
        if self.weights is None:
            weights = _frozen(np.full(n, 1.0 / n))
            probability = True if self.probability is None else bool(self.probability)
        else:
            weights = _frozen(self.weights)
            probability = bool(self.probability)
        if weights.shape != (n,):
            raise ValueError(f"expected {n} weights, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        if probability and abs(weights.sum() - 1.0) > _PROBABILITY_TOL:
            raise ValueError(f"probability design weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "probability", probability)

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def d(self) -> int:
        return self.nodes.shape[1]

    @property
    def equal_weights(self) -> bool:
        return bool(np.all(self.weights == 1.0 / self.n))

    def with_weights(self, weights) -> SampleDesign:
        """Same nodes, new weights; flagged probability only if they sum to one."""
        w = np.asarray(weights, dtype=float)
        prob = abs(w.sum() - 1.0) <= _PROBABILITY_TOL
        return SampleDesign(self.nodes, w, probability=prob, provenance=self.provenance)


@dataclass(frozen=True, eq=False)
class Integrand:
    """A real function on ``[0, 1]^d``, evaluated row-wise on ``(n, d)`` arrays.

    ``func`` must be vectorized: it receives an ``(n, d)`` array and returns
    ``n`` values.
    """

    d: int
    func: Callable[[np.ndarray], np.ndarray]
    exact_mean: Optional[float] = None
    exact_variation: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("integrand dimension must be positive")
        if self.exact_mean is not None and not math.isfinite(self.exact_mean):
            raise ValueError("exact_mean must be finite")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.func(x), dtype=float).reshape(x.shape[0])

    def scaled(self, c: float, label: Optional[str] = None) -> Integrand:
        """The integrand ``c * f`` with mean and variation rescaled."""
        mean = None if self.exact_mean is None else c * self.exact_mean
        var = None if self.exact_variation is None else abs(c) * self.exact_variation
        func = self.func
        return Integrand(self.d, lambda x: c * func(x), mean, var, label or f"{c}*{self.label}")


def estimate(design: SampleDesign, f) -> float:
    """Cubature estimate ``sum_i w_i f(x_i)``.

    Raises
    ------
    ValueError
        On a dimension mismatch.
    NonFiniteIntegrandError
        If ``f`` is NaN or infinite at some node; the error names the node.
    """
    if design.d != f.d:
        raise ValueError(f"design has d={design.d} but integrand has d={f.d}")
    y = f(design.nodes)
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise NonFiniteIntegrandError(int(bad[0]), float(y[bad[0]]))
    return float(design.weights @ y)


@dataclass(frozen=True)
class TrioReport:
    """One cubature run split as ``error = confounding * discrepancy * variation``.

    ``error``, ``variation`` and ``confounding`` are None when undefined
    (unknown exact mean, or no computable variation).
    """

    mu_hat: float
    discrepancy: float
    flavor: str
    error: Optional[float] = None
    variation: Optional[float] = None
    confounding: Optional[float] = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not self.discrepancy >= 0.0:
            raise ValueError("discrepancy must be nonnegative")
        if self.variation is not None and not self.variation >= 0.0:
            raise ValueError("variation must be nonnegative")
        if None not in (self.error, self.variation, self.confounding):
            rebuilt = self.confounding * self.discrepancy * self.variation
            if abs(self.error - rebuilt) > 1e-12 * (1.0 + abs(self.error)):
                raise ValueError("trio factors do not reproduce the error")

    @property
    def cnf_times_var(self) -> Optional[float]:
        """``error / discrepancy``: what is left when the variation is unknown."""
        if self.error is None or self.discrepancy == 0.0:
            return None
        return self.error / self.discrepancy


# point-set interchange format ------------------------------------------------

def format_points(design: SampleDesign, explicit_weights: Optional[bool] = None) -> str:
    """Render a design in the plain-text point-set format."""
    if explicit_weights is None:
        explicit_weights = not design.equal_weights
    kind = "explicit" if explicit_weights else "uniform"
    out = io.StringIO()
    out.write(f"# d={design.d} n={design.n} weights={kind}\n")
    cols = design.nodes
    if explicit_weights:
        cols = np.column_stack([design.nodes, design.weights])
    np.savetxt(out, cols, fmt="%.17g", delimiter=" ")
    return out.getvalue()


def parse_points(text: str) -> SampleDesign:
    """Inverse of :func:`format_points`."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("point-set file must start with a '# d=.. n=.. weights=..' header")
    header = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
    try:
        d, n, kind = int(header["d"]), int(header["n"]), header["weights"]
    except KeyError as exc:
        raise ValueError(f"header is missing {exc.args[0]!r}") from None
    if kind not in ("uniform", "explicit"):
        raise ValueError(f"weights must be 'uniform' or 'explicit', got {kind!r}")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.startswith("#")]
    data = np.loadtxt(body, ndmin=2) if body else np.empty((0, d))
    ncol = d + (kind == "explicit")
    if data.shape != (n, ncol):
        raise ValueError(f"expected {n} rows of {ncol} columns, got {data.shape}")
    if kind == "uniform":
        return SampleDesign(data, provenance=Provenance("file"))
    w = data[:, d]
    prob = abs(w.sum() - 1.0) <= _PROBABILITY_TOL
    return SampleDesign(data[:, :d], w, probability=prob, provenance=Provenance("file"))


def write_points(path: str | PathLike, design: SampleDesign, explicit_weights=None) -> None:
    with open(path, "w") as fh:
        fh.write(format_points(design, explicit_weights))


def read_points(path: str | PathLike) -> SampleDesign:
    with open(path) as fh:
        return parse_points(fh.read())
