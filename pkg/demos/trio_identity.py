"""Error = confounding x discrepancy x variation, checked on random integrands.

Draws kernel-section integrands for the L2 kernel, integrates them with
IID and scrambled Sobol' points, and prints the three factors next to the
error they multiply to.  Confounding never leaves [-1, 1].
"""

import numpy as np

from trioqmc.kernels import l2_kernel
from trioqmc.rand import StreamKey
from trioqmc.sequences import sample_design
from trioqmc.trio import discrepancy_quadratic, random_section_integrand, trio_decompose


def main(d=3, m=8, count=4, seed=0):
    spec = l2_kernel(d)
    rng = np.random.default_rng(seed)
    integrands = [random_section_integrand(spec, 5, rng) for _ in range(count)]
    print(f"{'sampler':>8} {'f':>2} {'error':>12} {'CNF':>9} {'DSC':>10} {'VAR':>9}")
    for kind in ("iid", "sobol"):
        design = sample_design(kind, d, m, StreamKey(seed).child(kind))
        dsc = discrepancy_quadratic(spec, design)
        for j, f in enumerate(integrands):
            rep = trio_decompose(design, f, dsc, f.exact_variation)
            print(f"{kind:>8} {j:>2} {rep.error:12.4e} {rep.confounding:9.4f} {rep.discrepancy:10.3e} "
                  f"{rep.variation:9.4f}")


if __name__ == "__main__":
    main()
