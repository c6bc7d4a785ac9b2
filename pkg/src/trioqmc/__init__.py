"""Quasi-Monte Carlo cubature with error = confounding x discrepancy x variation.

Submodules
----------
core       sampling designs, integrands, trio reports, point-set files
rand       reproducible random streams, normal CDF and quantile
sequences  IID, rank-1 lattice and Sobol' designs
linalg     Cholesky with jitter, Jacobi eigendecomposition
kernels    L2, weighted L2 and Matern kernels with closed-form integrals
trio       discrepancies, optimal weights, kernel-section integrands
apps       Gaussian box probabilities, Asian options, multilevel estimates
bayes      Bayesian cubature with maximum-likelihood shape parameter
studies    replicated studies written as CSV
cli        the ``trioqmc`` command
"""

from .core import Integrand, Provenance, SampleDesign, TrioReport, estimate, read_points, write_points
from .kernels import KernelSpec, l2_kernel, matern_kernel, weighted_kernel
from .rand import StreamKey
from .sequences import SamplerSpec, generate, sample_design
from .trio import discrepancy_quadratic, l2_discrepancy_closed, trio_decompose

__version__ = "0.1.0"

__all__ = [
    "Integrand",
    "KernelSpec",
    "Provenance",
    "SampleDesign",
    "SamplerSpec",
    "StreamKey",
    "TrioReport",
    "discrepancy_quadratic",
    "estimate",
    "generate",
    "l2_discrepancy_closed",
    "l2_kernel",
    "matern_kernel",
    "read_points",
    "sample_design",
    "trio_decompose",
    "weighted_kernel",
    "write_points",
]
