"""IID, rank-1 lattice and Sobol' sampling designs on the unit cube.

Randomizations:

* lattice: ``"shift"`` adds one uniform vector modulo 1 to every node;
* sobol: ``"scramble+shift"`` multiplies each coordinate's generator matrix
  by a random lower-triangular binary matrix with unit diagonal (a linear
  matrix scramble) and then XORs a random digital shift.  This is cheaper
  than Owen's nested uniform scrambling and keeps the same mean-square
  behaviour for the L2-type kernels used in this package.

Lattice and Sobol' sizes are powers of two, ``n = 2^m`` with ``m <= 20``; up
to 32 coordinates are supported.  Points come back in natural index order,
so unscrambled Sobol' and unshifted lattice sets start at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._tables import LATTICE_GENERATOR, MAX_DIM, MAX_M, SOBOL_BITS, SOBOL_PRIMITIVES
from .core import Provenance, SampleDesign
from .rand import StreamKey, as_generator

__all__ = [
    "SamplerSpec",
    "KINDS",
    "RANDOMIZATIONS",
    "iid_nodes",
    "lattice_nodes",
    "sobol_nodes",
    "sobol_direction_integers",
    "generate",
    "sample_design",
]

KINDS = ("iid", "lattice", "sobol")
RANDOMIZATIONS = ("none", "shift", "scramble+shift")
_ALIASES = {"scramble": "scramble+shift"}


@dataclass(frozen=True)
class SamplerSpec:
    """Which generator, in what dimension, with what randomization."""

    kind: str
    d: int
    randomization: str = "none"
    key: StreamKey = field(default_factory=StreamKey)

    def __post_init__(self):
        rnd = _ALIASES.get(self.randomization, self.randomization)
        object.__setattr__(self, "randomization", rnd)
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if rnd not in RANDOMIZATIONS:
            raise ValueError(f"unknown randomization {self.randomization!r}")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.kind != "iid" and self.d > MAX_DIM:
            raise ValueError(f"{self.kind} supports at most {MAX_DIM} dimensions, got {self.d}")
        if self.kind == "lattice" and rnd == "scramble+shift":
            raise ValueError("lattices support randomization 'none' or 'shift'")
        if self.kind == "sobol" and rnd == "shift":
            raise ValueError("sobol supports randomization 'none' or 'scramble+shift'")

    @property
    def name(self) -> str:
        if self.kind == "iid" or self.randomization == "none":
            return self.kind
        return f"{self.kind}-{self.randomization}"

    def with_key(self, key: StreamKey) -> SamplerSpec:
        return SamplerSpec(self.kind, self.d, self.randomization, key)


def _provenance(spec: SamplerSpec) -> Provenance:
    return Provenance(spec.name, spec.key.master_seed, spec.key.path)


def _check_m(m: int) -> int:
    if not 0 <= m <= MAX_M:
        raise ValueError(f"m must be in 0..{MAX_M}, got {m}")
    return 1 << m


def iid_nodes(spec: SamplerSpec, n: int) -> SampleDesign:
    """``n`` independent uniform points with weights ``1/n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = as_generator(spec.key).random((n, spec.d))
    return SampleDesign(x, provenance=_provenance(spec))


def lattice_nodes(spec: SamplerSpec, m: int, z=None) -> SampleDesign:
    """Rank-1 lattice ``frac(i z / n + shift)`` for ``i = 0..n-1``.

    ``z`` overrides the embedded generating vector; it needs ``spec.d``
    integer entries.
    """
    if spec.kind != "lattice":
        raise ValueError("spec.kind must be 'lattice'")
    n = _check_m(m)
    if z is None:
        z = LATTICE_GENERATOR[: spec.d]
    z = np.asarray(z, dtype=np.int64).reshape(-1)
    if z.shape != (spec.d,):
        raise ValueError(f"generating vector needs {spec.d} entries, got {z.size}")
    i = np.arange(n, dtype=np.int64)
    x = ((i[:, None] * z[None, :]) % n) / n
    if spec.randomization == "shift":
        shift = as_generator(spec.key).random(spec.d)
        x = (x + shift) % 1.0
    return SampleDesign(x, provenance=_provenance(spec))


def sobol_direction_integers(d: int) -> np.ndarray:
    """Direction integers ``V[j, k]``, 32-bit, for coordinates ``j < d``.

    ``V[j, k]`` is column ``k`` of the generator matrix of coordinate ``j``
    with its most significant bit carrying the ``2^-1`` digit.
    """
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"sobol supports 1..{MAX_DIM} dimensions, got {d}")
    bits = SOBOL_BITS
    V = np.zeros((d, bits), dtype=np.uint64)
    V[0] = [1 << (bits - 1 - k) for k in range(bits)]
    for j in range(1, d):
        s, a, m = SOBOL_PRIMITIVES[j - 1]
        v = [m[k] << (bits - 1 - k) for k in range(s)]
        for k in range(s, bits):
            new = v[k - s] ^ (v[k - s] >> s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    new ^= v[k - i]
            v.append(new)
        V[j] = v
    return V


def _linear_scramble(V: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Left-multiply each coordinate's generator matrix by random lower-triangular L."""
    d, bits = V.shape
    # L[j, i, k] for digit rows i and columns k, k <= i, unit diagonal
    L = np.tril(rng.integers(0, 2, size=(d, bits, bits), dtype=np.uint64), -1)
    L[:, np.arange(bits), np.arange(bits)] = 1
    place = np.array([1 << (bits - 1 - k) for k in range(bits)], dtype=np.uint64)
    rows = (L * place).sum(axis=2, dtype=np.uint64)
    # digit i of each scrambled column = parity(rows[i] & column)
    parity = np.bitwise_count(rows[:, :, None] & V[:, None, :]) & np.uint64(1)
    return (parity * place[None, :, None]).sum(axis=1, dtype=np.uint64)


def _digital_net(V: np.ndarray, m: int) -> np.ndarray:
    """Integer points of the first ``2^m`` Sobol' indices, in natural order."""
    d = V.shape[0]
    n = 1 << m
    X = np.zeros((n, d), dtype=np.uint64)
    if n > 1:
        i = np.arange(1, n, dtype=np.int64)
        ctz = np.log2(i & -i).astype(np.intp)
        gray = np.bitwise_xor.accumulate(V[:, ctz].T, axis=0)
        X[(i ^ (i >> 1))] = gray
    return X


def sobol_nodes(spec: SamplerSpec, m: int) -> SampleDesign:
    """First ``2^m`` Sobol' points, optionally scrambled and digitally shifted."""
    if spec.kind != "sobol":
        raise ValueError("spec.kind must be 'sobol'")
    _check_m(m)
    V = sobol_direction_integers(spec.d)
    shift = np.zeros(spec.d, dtype=np.uint64)
    if spec.randomization == "scramble+shift":
        rng = as_generator(spec.key)
        V = _linear_scramble(V, rng)
        shift = rng.integers(0, 1 << SOBOL_BITS, size=spec.d, dtype=np.uint64)
    X = _digital_net(V, m) ^ shift[None, :]
    x = X.astype(np.float64) * 2.0**-SOBOL_BITS
    return SampleDesign(x, provenance=_provenance(spec))


def generate(spec: SamplerSpec, m: int) -> SampleDesign:
    """A design of size ``2^m`` from any sampler kind."""
    if spec.kind == "iid":
        return iid_nodes(spec, _check_m(m))
    if spec.kind == "lattice":
        return lattice_nodes(spec, m)
    return sobol_nodes(spec, m)


_DEFAULT_RANDOMIZATION = {"iid": "none", "lattice": "shift", "sobol": "scramble+shift"}


def sample_design(kind: str, d: int, m: int, key: StreamKey, randomize: bool = True) -> SampleDesign:
    """Shorthand: ``2^m`` points of ``kind`` with its usual randomization."""
    rnd = _DEFAULT_RANDOMIZATION[kind] if randomize else "none"
    return generate(SamplerSpec(kind, d, rnd, key), m)
