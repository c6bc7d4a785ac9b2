"""Reproducible random streams, the standard normal CDF/quantile, slope fits.

Every random quantity in the package is drawn from a :class:`StreamKey`: a
master seed plus a path of ``(label, index)`` pairs such as
``(("study", 2), ("rep", 17), ("scramble", 0))``.  The key is hashed into a
:class:`numpy.random.SeedSequence` spawn key and drives a counter-based
Philox generator, so a replication's stream depends only on its own path and
never on which other replications exist or which thread runs them.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

__all__ = [
    "StreamKey",
    "as_generator",
    "uniform01",
    "open_uniform01",
    "standard_normal",
    "phi",
    "phi_inv",
    "fit_slope",
]

_MASK64 = (1 << 64) - 1


def _label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class StreamKey:
    """Identifies one deterministic random stream.

    Parameters
    ----------
    master_seed : int
        Unsigned 64-bit experiment seed (``--seed`` on the command line).
    path : tuple of (str, int)
        Labels locating the stream, e.g. experiment -> replication -> purpose.
    """

    master_seed: int = 0
    path: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        for label, index in self.path:
            if not isinstance(label, str) or int(index) < 0:
                raise ValueError(f"bad path element {(label, index)!r}")

    def child(self, label: str, index: int = 0) -> StreamKey:
        """Key one level deeper along ``path``."""
        return StreamKey(self.master_seed, self.path + ((label, int(index)),))

    def seed_sequence(self) -> np.random.SeedSequence:
        spawn_key = []
        for label, index in self.path:
            spawn_key.extend((_label_code(label), int(index)))
        return np.random.SeedSequence(int(self.master_seed), spawn_key=tuple(spawn_key))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))


def as_generator(stream) -> np.random.Generator:
    """Accept a :class:`StreamKey` or an existing generator."""
    if isinstance(stream, StreamKey):
        return stream.generator()
    if isinstance(stream, np.random.Generator):
        return stream
    raise TypeError(f"expected StreamKey or numpy Generator, got {type(stream).__name__}")


def uniform01(stream, count) -> np.ndarray:
    """Reals in ``[0, 1)``; ``count`` may be an int or a shape tuple."""
    if np.any(np.asarray(count) < 0):
        raise ValueError("count must be nonnegative")
    return as_generator(stream).random(count)


def open_uniform01(stream, count) -> np.ndarray:
    """Reals in the open interval ``(0, 1)``, on the grid ``(k + 1/2) 2^-53``."""
    raw = as_generator(stream).integers(0, 1 << 53, size=count, dtype=np.int64)
    return (raw + 0.5) * 2.0**-53


def standard_normal(stream, count) -> np.ndarray:
    """Standard normal variates by inversion of :func:`open_uniform01`."""
    return phi_inv(open_uniform01(stream, count))


def phi(x):
    """Standard normal cumulative distribution function."""
    return ndtr(x)


# Acklam's rational approximation, relative error below 1.15e-9.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671039971798e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _lower_half_quantile(q):
    """Quantile for ``q`` in ``(0, 1/2]``, before polishing."""
    x = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        r = np.sqrt(-2.0 * np.log(q[tail]))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        x[tail] = num / den
    mid = ~tail
    if np.any(mid):
        u = q[mid] - 0.5
        r = u * u
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den
    return x


def phi_inv(p):
    """Standard normal quantile.

    Acklam's rational approximation followed by one Newton step against
    :func:`phi`.  The upper half is computed by symmetry from ``1 - p``,
    which is exact in floating point for ``p >= 1/2``, so both tails keep
    full relative accuracy.

    Raises
    ------
    ValueError
        If any ``p`` lies outside the open interval ``(0, 1)``.
    """
    p_arr = np.asarray(p, dtype=float)
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    if not np.all((p_arr > 0.0) & (p_arr < 1.0)):
        raise ValueError("phi_inv is defined only on the open interval (0, 1)")
    upper = p_arr > 0.5
    q = np.where(upper, 1.0 - p_arr, p_arr)
    x = _lower_half_quantile(q)
    err = ndtr(x) - q
    x = x - err * _SQRT_2PI * np.exp(0.5 * x * x)
    x = np.where(upper, -x, x)
    return float(x[0]) if scalar else x.reshape(np.shape(p))


def fit_slope(log2n, log2err) -> float:
    """Least-squares slope of ``log2err`` against ``log2n``."""
    xs = np.asarray(log2n, dtype=float)
    ys = np.asarray(log2err, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("log2n and log2err must be 1-d arrays of equal length")
    if xs.size < 3:
        raise ValueError("at least 3 points are needed to fit a slope")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("slope fit needs finite inputs")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
