"""Bayesian cubature with a fitted Matern covariance on the 3-d box probability.

For a handful of scrambled Sobol' designs, fits (theta, s) by maximum
likelihood and reports whether the 99% bound contains the reference value.
"""

from trioqmc.apps import MVN_REFERENCE, genz_integrand, box_probability_problem
from trioqmc.bayes import bayes_mle_cubature
from trioqmc.rand import StreamKey
from trioqmc.sequences import SamplerSpec, generate


def main(m=7, reps=8, seed=0):
    f = genz_integrand(box_probability_problem())
    sampler = SamplerSpec("sobol", f.d, "scramble+shift")
    hits = 0
    print(f"{'rep':>3} {'theta':>8} {'mu_hat':>12} {'half-width':>11} {'|err|':>10} covered")
    for r in range(reps):
        x = generate(sampler.with_key(StreamKey(seed).child("rep", r)), m).nodes
        fit = bayes_mle_cubature(x, f(x))
        err = abs(MVN_REFERENCE - fit.mu_hat)
        hits += err <= fit.half_width_99
        print(f"{r:>3} {fit.theta:8.3f} {fit.mu_hat:12.8f} {fit.half_width_99:11.3e} {err:10.3e} "
              f"{err <= fit.half_width_99}")
    print(f"coverage {hits}/{reps}")


if __name__ == "__main__":
    main()
