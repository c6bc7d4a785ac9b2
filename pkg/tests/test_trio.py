import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from trioqmc.core import Integrand, SampleDesign, estimate
from trioqmc.kernels import (
    gamma_from_decay,
    gram,
    kernel_eval,
    l2_kernel,
    matern_kernel,
    mean_embedding,
    weighted_kernel,
)
from trioqmc.rand import StreamKey
from trioqmc.sequences import SamplerSpec, generate, iid_nodes
from trioqmc.trio import (
    KernelSectionIntegrand,
    discrepancy_quadratic,
    iid_expected_sq_disc,
    l2_discrepancy_closed,
    optimal_weights,
    random_section_integrand,
    randomized_discrepancy_empirical,
    randomized_discrepancy_iid,
    section_variation,
    squared_discrepancy,
    trio_decompose,
    weighted_l2_discrepancy,
)


def design_of(x, w=None):
    return SampleDesign(np.atleast_2d(x), w)


class TestQuadraticForm:
    def test_single_midpoint(self):
        assert discrepancy_quadratic(l2_kernel(1), design_of([[0.5]])) == pytest.approx(math.sqrt(1 / 12), abs=1e-15)

    def test_single_midpoint_geometric(self):
        # brute-force oracle: L2 norm of the local discrepancy x - 1{x >= 0.5}
        # (the l2 kernel's discrepancy is the L2 norm of nu([x,1]) - nu_hat([x,1]))
        sq, _ = integrate.quad(lambda x: ((1 - x) - (1.0 if x <= 0.5 else 0.0)) ** 2, 0, 1, points=[0.5])
        assert discrepancy_quadratic(l2_kernel(1), design_of([[0.5]])) == pytest.approx(math.sqrt(sq), abs=1e-12)

    def test_single_one(self):
        assert discrepancy_quadratic(l2_kernel(1), design_of([[1.0]])) == pytest.approx(math.sqrt(1 / 3), abs=1e-15)

    def test_origin_d2(self):
        expected = math.sqrt(16 / 9 - 2 * (3 / 2) ** 2 + 4)
        assert l2_discrepancy_closed(design_of([[0.0, 0.0]])) == pytest.approx(expected, abs=1e-15)
        assert discrepancy_quadratic(l2_kernel(2), design_of([[0.0, 0.0]])) == pytest.approx(expected, abs=1e-15)

    def test_weighted_unit_gamma_matches_l2(self, rng):
        for _ in range(20):
            des = design_of(rng.random((rng.integers(1, 40), 4)))
            assert abs(weighted_l2_discrepancy(des, np.ones(4)) - l2_discrepancy_closed(des)) <= 1e-12
            assert abs(discrepancy_quadratic(weighted_kernel(np.ones(4)), des)
                       - discrepancy_quadratic(l2_kernel(4), des)) <= 1e-12

    def test_weighted_tiny_gamma_vanishes(self, rng):
        des = design_of(rng.random((9, 3)))
        assert weighted_l2_discrepancy(des, [1e-8] * 3) <= 1e-7

    def test_closed_forms_need_equal_weights(self):
        des = design_of([[0.2], [0.4]], [0.3, 0.7])
        with pytest.raises(ValueError):
            l2_discrepancy_closed(des)
        with pytest.raises(ValueError):
            weighted_l2_discrepancy(des, [1.0])

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            squared_discrepancy(l2_kernel(3), design_of([[0.1, 0.2]]))

    def test_negative_roundoff_clamped(self):
        # a huge design whose exact squared discrepancy is tiny
        x = generate(SamplerSpec("lattice", 1), 12)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert discrepancy_quadratic(l2_kernel(1), x) >= 0.0

    @given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_closed_forms_agree_with_quadratic(self, n, d, seed):
        rng = np.random.default_rng(seed)
        des = design_of(rng.random((n, d)))
        g = gamma_from_decay(d, 2.0)
        assert abs(l2_discrepancy_closed(des) - discrepancy_quadratic(l2_kernel(d), des)) <= 1e-10
        assert abs(weighted_l2_discrepancy(des, g) - discrepancy_quadratic(weighted_kernel(g), des)) <= 1e-10


class TestIIDExpectation:
    def test_values(self):
        assert iid_expected_sq_disc(l2_kernel(1), 1) == pytest.approx(1 / 6, abs=1e-15)
        assert iid_expected_sq_disc(l2_kernel(3), 64) == pytest.approx((1.5**3 - (4 / 3) ** 3) / 64, rel=1e-14)
        spec = matern_kernel(2, 3.0)
        from trioqmc.kernels import double_integral
        assert iid_expected_sq_disc(spec, 10) == pytest.approx((1 - double_integral(spec)) / 10, rel=1e-14)

    def test_monte_carlo(self):
        spec = l2_kernel(2)
        sq = np.array([l2_discrepancy_closed(iid_nodes(SamplerSpec("iid", 2, key=StreamKey(5).child("r", r)), 16)) ** 2
                       for r in range(2000)])
        se = sq.std(ddof=1) / math.sqrt(sq.size)
        assert abs(sq.mean() - iid_expected_sq_disc(spec, 16)) <= 3 * se

    def test_n_positive(self):
        with pytest.raises(ValueError):
            iid_expected_sq_disc(l2_kernel(1), 0)


class TestOptimalWeights:
    def test_single_node_at_one(self):
        w = optimal_weights(l2_kernel(1), [[1.0]])
        assert w == pytest.approx([1.0], abs=1e-15)

    def test_residual_and_minimality(self, rng):
        for trial in range(50):
            d = int(rng.integers(1, 5))
            n = int(rng.integers(1, 30))
            spec = l2_kernel(d) if trial % 2 else weighted_kernel(gamma_from_decay(d, 3))
            x = rng.random((n, d))
            w = optimal_weights(spec, x)
            K, k = gram(spec, x), mean_embedding(spec, x)
            assert np.linalg.norm(K @ w - k) <= 1e-9 * np.linalg.norm(k) * max(1.0, np.linalg.cond(K) * 1e-6)
            des = design_of(x)
            opt = discrepancy_quadratic(spec, des.with_weights(w))
            assert opt <= discrepancy_quadratic(spec, des) + 1e-12

    def test_probability_flag(self, rng):
        x = rng.random((6, 2))
        des = design_of(x).with_weights(optimal_weights(l2_kernel(2), x))
        assert des.probability == (abs(des.weights.sum() - 1) <= 1e-12)


class TestSections:
    def test_constant_section_has_no_variation(self):
        f = KernelSectionIntegrand(l2_kernel(2), [[1.0, 1.0]], [1.0])
        assert f.exact_variation == 0.0
        np.testing.assert_allclose(f(np.random.default_rng(0).random((5, 2))), 1.0)

    def test_origin_section_d1(self):
        f = KernelSectionIntegrand(l2_kernel(1), [[0.0]], [1.0])
        assert f.exact_variation == pytest.approx(1.0, abs=1e-15)

    def test_variation_double_loop(self, rng):
        spec = weighted_kernel([1.0, 0.6, 0.3])
        z, a = rng.random((5, 3)), rng.normal(size=5)
        f = KernelSectionIntegrand(spec, z, a)
        one = np.ones(3)
        quad = sum(a[i] * a[j] * kernel_eval(spec, z[i], z[j]) for i in range(5) for j in range(5))
        f1 = sum(a[j] * kernel_eval(spec, one, z[j]) for j in range(5))
        assert f.exact_variation == pytest.approx(math.sqrt(quad - f1**2), rel=1e-12)
        assert section_variation(f) == f.exact_variation

    def test_variation_as_derivative_norm(self):
        # for d = 1 the squared norm of f - f(1) is int_0^1 f'(x)^2 dx
        z, a = np.array([[0.2], [0.7]]), np.array([1.5, -0.8])
        f = KernelSectionIntegrand(l2_kernel(1), z, a)
        deriv = lambda x: -sum(aj for aj, zj in zip(a, z[:, 0]) if x > zj)  # noqa: E731
        sq, _ = integrate.quad(lambda x: deriv(x) ** 2, 0, 1, points=[0.2, 0.7])
        assert f.exact_variation == pytest.approx(math.sqrt(sq), rel=1e-12)

    def test_exact_mean(self, rng):
        # tensor Gauss-Legendre on cells split at the anchor coordinates is
        # exact for this piecewise-polynomial integrand
        f = random_section_integrand(l2_kernel(2), 3, rng)
        g, w = np.polynomial.legendre.leggauss(3)
        axes = []
        for k in range(2):
            cuts = np.unique(np.r_[0.0, f.anchors[:, k], 1.0])
            pts = np.concatenate([lo + (hi - lo) * (g + 1) / 2 for lo, hi in zip(cuts, cuts[1:])])
            wts = np.concatenate([(hi - lo) / 2 * w for lo, hi in zip(cuts, cuts[1:])])
            axes.append((pts, wts))
        X, Y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
        W = np.outer(axes[0][1], axes[1][1])
        ref = float(np.sum(W * f(np.column_stack([X.ravel(), Y.ravel()])).reshape(W.shape)))
        assert f.exact_mean == pytest.approx(ref, abs=1e-12)

    def test_matern_rejected(self):
        with pytest.raises(ValueError):
            KernelSectionIntegrand(matern_kernel(1, 1.0), [[0.5]], [1.0])

    def test_scaled(self, rng):
        f = random_section_integrand(l2_kernel(2), 3, rng)
        g = f.scaled(-2.5)
        assert g.exact_variation == pytest.approx(2.5 * f.exact_variation, rel=1e-12)
        assert g.exact_mean == pytest.approx(-2.5 * f.exact_mean, rel=1e-12)


def random_pair(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 6))
    spec = l2_kernel(d) if seed % 2 else weighted_kernel(gamma_from_decay(d, 2))
    f = random_section_integrand(spec, int(rng.integers(1, 6)), rng)
    des = design_of(rng.random((int(rng.integers(1, 50)), d)))
    return spec, f, des


class TestDecompose:
    def test_constant_integrand(self):
        f = Integrand(2, lambda x: np.full(x.shape[0], 3.0), exact_mean=3.0, exact_variation=0.0)
        des = design_of(np.random.default_rng(0).random((8, 2)))
        rep = trio_decompose(des, f, l2_discrepancy_closed(des), 0.0)
        assert rep.error == pytest.approx(0.0, abs=1e-15) and rep.variation == 0.0 and rep.confounding == 0.0

    @given(st.integers(0, 10**6))
    @settings(max_examples=100, deadline=None)
    def test_identity_and_bound(self, seed):
        spec, f, des = random_pair(seed)
        rep = trio_decompose(des, f, discrepancy_quadratic(spec, des), f.exact_variation)
        assert abs(rep.error - rep.confounding * rep.discrepancy * rep.variation) <= 1e-12 * (1 + abs(rep.error))
        assert abs(rep.confounding) <= 1 + 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_error_as_representer(self, seed):
        spec, f, des = random_pair(seed)
        z, a = f.anchors, f.coeffs
        direct = sum(a[j] * (mean_embedding(spec, z[j]) - sum(des.weights[i] * kernel_eval(spec, des.nodes[i], z[j])
                                                             for i in range(des.n))) for j in range(len(a)))
        err = f.exact_mean - estimate(des, f)
        assert abs(err - direct) <= 1e-10 * max(1.0, abs(direct))

    @given(st.integers(0, 10**6), st.floats(-20, 20).filter(lambda c: abs(c) > 1e-3))
    @settings(max_examples=50, deadline=None)
    def test_scaling(self, seed, c):
        spec, f, des = random_pair(seed)
        dsc = discrepancy_quadratic(spec, des)
        a = trio_decompose(des, f, dsc, f.exact_variation)
        g = f.scaled(c)
        b = trio_decompose(des, g, dsc, g.exact_variation)
        assert b.variation == pytest.approx(abs(c) * a.variation, rel=1e-12)
        assert b.confounding == pytest.approx(math.copysign(1, c) * a.confounding, rel=1e-9, abs=1e-12)

    def test_refuses_anchored_variation_on_signed_design(self, rng):
        spec, f, des = random_pair(1)
        signed = des.with_weights(des.weights * 1.1)
        with pytest.raises(ValueError):
            trio_decompose(signed, f, 0.1, f.exact_variation)
        trio_decompose(signed, f, 0.1, f.exact_variation, flavor="bayesian")

    def test_without_mean_or_variation(self, rng):
        des = design_of(rng.random((4, 1)))
        f = Integrand(1, lambda x: x[:, 0])
        rep = trio_decompose(des, f, 0.1)
        assert rep.error is None and rep.confounding is None
        g = Integrand(1, lambda x: x[:, 0], exact_mean=0.5)
        rep = trio_decompose(des, g, 0.1)
        assert rep.error is not None and rep.confounding is None
        assert rep.cnf_times_var == pytest.approx(rep.error / 0.1)


class TestRandomized:
    def test_iid(self):
        assert randomized_discrepancy_iid(1) == 1.0
        assert randomized_discrepancy_iid(100) == pytest.approx(0.1, abs=1e-16)
        with pytest.raises(ValueError):
            randomized_discrepancy_iid(0)

    def test_iid_confounding_second_moment(self):
        # CNF^R = -(1/(sqrt(n) std f)) sum (f(x_i) - mu) for f(x) = x has E CNF^2 = 1
        n, std = 32, math.sqrt(1 / 12)
        f = Integrand(1, lambda x: x[:, 0], exact_mean=0.5, exact_variation=std)
        cnf = []
        for r in range(2000):
            des = iid_nodes(SamplerSpec("iid", 1, key=StreamKey(17).child("rep", r)), n)
            rep = trio_decompose(des, f, randomized_discrepancy_iid(n), std, flavor="randomized")
            cnf.append(rep.confounding)
            assert rep.confounding == pytest.approx(
                -(des.nodes[:, 0] - 0.5).sum() / (math.sqrt(n) * std), rel=1e-10)
        assert 0.9 <= np.mean(np.square(cnf)) <= 1.1

    def test_empirical_randomized_discrepancy_of_iid(self):
        # for IID points and any f, RMS error / std(f) is 1/sqrt(n); the section
        # variation is at least std(f), so the empirical value sits below 1/sqrt(n)
        spec = l2_kernel(2)
        tests = [random_section_integrand(spec, 3, np.random.default_rng(j)) for j in range(8)]
        n = 16
        designs = [iid_nodes(SamplerSpec("iid", 2, key=StreamKey(4).child("rep", r)), n) for r in range(500)]
        value = randomized_discrepancy_empirical(designs, tests)
        assert 0.0 < value <= 1.1 / math.sqrt(n)

    def test_empirical_needs_designs(self):
        with pytest.raises(ValueError):
            randomized_discrepancy_empirical([], [])
