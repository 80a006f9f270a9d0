import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balescu.config import DomainError, OverflowGuardError, PlasmaConfig
from balescu.kernel import (jay, jay_oracle, jay_scaled,
                            kernel_B, kernel_B_times_mumu, kernel_B_times_sqrt_mumu,
                            kernel_from_weights, landau_kernel, make_frame,
                            weights_scaled_quadrature, xi_matrices)
from balescu.radial import maxwellian

J0_K1 = 2.0 * math.log(2.0) - 1.0
SQRT_8PI = math.sqrt(8.0 * math.pi)
# frozen with mpmath (40 digits) from the closed form
J_REFS = {0.5: 0.45083494230740273, 2.0: 4.1911270724537277,
          5.0: 12441.752943709969, 12.0: 5.5088041531142486e+28}
JTILDE_30 = 0.00018629855451461969


class TestJay:
    def test_value_at_zero(self):
        assert jay(0.0) == pytest.approx(J0_K1, abs=1e-14)

    def test_value_at_zero_k2(self):
        cfg2 = PlasmaConfig(k0=2.0)
        assert jay(0.0, cfg2) == pytest.approx(2.0 * math.log(5.0) - 1.6, abs=1e-13)

    @pytest.mark.parametrize("x,ref", sorted(J_REFS.items()))
    def test_frozen_references(self, x, ref):
        assert jay(x) == pytest.approx(ref, rel=1e-12)

    def test_even(self, rng):
        xs = rng.uniform(0.0, 24.0, 200)
        assert np.array_equal(jay(xs), jay(-xs))

    def test_asymptote_at_12(self):
        # true limit correction 1 + 3/x^2 + ... puts this 2.16% above sqrt(8 pi)
        ratio = 12.0 ** 3 * math.exp(-72.0) * jay(12.0) / SQRT_8PI
        assert ratio == pytest.approx(1.0216, abs=5e-4)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError):
            jay(26.0)

    def test_positive(self, rng):
        assert np.all(jay(rng.uniform(-25.0, 25.0, 500)) > 0.0)


class TestJayScaled:
    def test_matches_jay_at_zero(self):
        assert jay_scaled(0.0) == jay(0.0)

    def test_tail_value(self):
        assert jay_scaled(30.0) == pytest.approx(JTILDE_30, rel=1e-12)
        assert jay_scaled(30.0) == pytest.approx(SQRT_8PI / 27000.0, rel=2e-2)

    def test_consistency_with_jay(self, rng):
        xs = rng.uniform(-24.0, 24.0, 300)
        lhs = jay_scaled(xs) * np.exp(0.5 * xs * xs)
        assert np.max(np.abs(lhs / jay(xs) - 1.0)) < 1e-12

    def test_finite_beyond_unscaled_range(self):
        # e^{x^2/2} overflows past x ~ 38; the scaled form keeps going
        for x in (40.0, 60.0, 100.0):
            val = jay_scaled(x)
            assert np.isfinite(val) and val > 0.0
        assert jay_scaled(60.0) == pytest.approx(SQRT_8PI / 60.0 ** 3, rel=1e-2)


class TestJayOracle:
    def test_at_zero(self):
        assert jay_oracle(0.0) == pytest.approx(J0_K1, abs=1e-8)

    def test_at_zero_k2(self):
        assert jay_oracle(0.0, PlasmaConfig(k0=2.0)) == pytest.approx(
            2.0 * math.log(5.0) - 1.6, abs=1e-8)

    def test_agreement_sixty_points(self, cfg):
        worst = 0.0
        for x in np.linspace(0.0, 12.0, 60):
            a, b = jay(float(x), cfg), jay_oracle(float(x), cfg)
            worst = max(worst, abs(a - b) / abs(b))
        assert worst < cfg.quad_rel_tol


class TestWeights:
    def test_at_zero(self, wtable):
        w1, w2, w1s, w2s = wtable.weights_w(0.0)
        expect = math.pi * J0_K1 / 4.0
        assert w1 == pytest.approx(expect, rel=1e-12)
        assert w2 == pytest.approx(expect, rel=1e-12)
        assert w1s == pytest.approx(expect, rel=1e-12)

    def test_sum_identity_at_three(self, wtable, cfg):
        # sin^2 + cos^2 = 1: w1 + w2 equals the plain theta-integral of J
        w1, w2, _, _ = wtable.weights_w(3.0)
        gl_x, gl_w = np.polynomial.legendre.leggauss(200)
        th = (gl_x + 1.0) * math.pi / 4.0
        rhs = float(np.sum(gl_w * math.pi / 4.0 * jay(3.0 * np.cos(th), cfg)))
        assert w1 + w2 == pytest.approx(rhs, rel=1e-10)

    def test_scaling_identity(self, wtable):
        # w_i~ = e^{-r^2/2} w_i holds node-by-node in the fused quadrature
        for r in (0.5, 2.0, 5.0):
            w1, w2, w1s, w2s = wtable.weights_w(r)
            assert w1s == pytest.approx(math.exp(-0.5 * r * r) * w1, rel=1e-12)
            assert w2s == pytest.approx(math.exp(-0.5 * r * r) * w2, rel=1e-12)

    def test_tabulation_error(self, wtable, cfg, rng):
        worst = 0.0
        for r in rng.uniform(0.0, 14.0, 30):
            a1, a2 = wtable.w_scaled(float(r))
            b1, b2 = weights_scaled_quadrature(float(r), cfg, order=wtable.order)
            worst = max(worst, abs(a1 - b1) / b1, abs(a2 - b2) / b2)
        assert worst < 1e-6

    def test_selfcheck_doubled_order(self, wtable):
        assert wtable.selfcheck_rel < 1e-8

    def test_positive_and_monotone_envelope(self, wtable):
        rs = np.linspace(0.0, 10.0, 60)
        w1s, w2s = wtable.w_scaled(rs)
        assert np.all(w1s > 0.0) and np.all(w2s > 0.0)
        # scaled weights decay like (1+r)^{-3-3/4}; envelope stays bounded
        env = w1s * (1.0 + rs) ** 3.75
        assert env.max() < 100.0

    def test_unscaled_overflow_guard(self, wtable):
        with pytest.raises(OverflowGuardError):
            wtable.weights_w(38.0)


class TestFrameAndXi:
    def test_frame_invariants(self, rng):
        for _ in range(200):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            if np.linalg.norm(v - vs) < 1e-10:
                continue
            fr = make_frame(v, vs)
            assert fr.v_R_mag ** 2 == pytest.approx(
                float(v @ v) - fr.v_par ** 2, abs=1e-12 * max(1.0, float(v @ v)))
            # |v_R| computed from v equals |v_R| computed from v*
            p_star = vs - (fr.u_hat @ vs) * fr.u_hat
            assert np.linalg.norm(p_star) == pytest.approx(fr.v_R_mag, abs=1e-10)

    def test_xi_projections(self, rng):
        for _ in range(200):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            fr = make_frame(v, vs)
            xi = xi_matrices(fr, v)
            if xi.degenerate:
                continue
            assert np.trace(xi.xi1) == pytest.approx(1.0, abs=1e-12)
            assert np.trace(xi.xi2) == pytest.approx(1.0, abs=1e-12)
            proj = np.eye(3) - np.outer(fr.u_hat, fr.u_hat)
            assert np.linalg.norm(xi.xi1 + xi.xi2 - proj) < 1e-12
            assert np.abs(xi.xi1 @ fr.u).max() < 1e-12
            assert np.abs(xi.xi2 @ fr.u).max() < 1e-12
            assert np.abs(xi.xi1 @ xi.xi2).max() < 1e-12

    def test_basis_independence(self, rng):
        # rotating (u1, u2) in-plane leaves the projections unchanged
        from dataclasses import replace

        for _ in range(50):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            fr = make_frame(v, vs)
            if fr.v_R_mag < 1e-6:
                continue
            alpha = rng.uniform(0.0, 2.0 * math.pi)
            u1 = math.cos(alpha) * fr.u1 + math.sin(alpha) * fr.u2
            u2 = -math.sin(alpha) * fr.u1 + math.cos(alpha) * fr.u2
            fr2 = replace(fr, u1=u1, u2=u2)
            xi_a = xi_matrices(fr, v)
            xi_b = xi_matrices(fr2, v)
            assert np.abs(xi_a.xi1 - xi_b.xi1).max() < 1e-13
            assert np.abs(xi_a.xi2 - xi_b.xi2).max() < 1e-13

    def test_degenerate_flag(self):
        fr = make_frame(np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]))
        assert xi_matrices(fr, np.array([1.0, 0, 0])).degenerate


class TestKernelB:
    def test_point_value(self, wtable):
        km = kernel_B(np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]), wtable)
        c = math.pi * J0_K1 / 8.0
        assert np.allclose(km.b, np.diag([0.0, c, c]), atol=1e-8)
        assert abs(km.b[1, 1] - c) < 1e-6

    def test_singularity_error(self, wtable):
        with pytest.raises(DomainError):
            kernel_B(np.ones(3), np.ones(3), wtable)

    def test_sweep_psd_null_symmetry(self, wtable, rng):
        for _ in range(1000):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            if np.linalg.norm(v - vs) < 1e-8:
                continue
            km = kernel_B(v, vs, wtable)
            u = v - vs
            assert np.linalg.eigvalsh(km.b_scaled).min() > -1e-12
            assert np.abs(km.b_scaled @ u).max() / np.linalg.norm(u) < 1e-12
            swap = kernel_B(vs, v, wtable)
            assert np.abs(km.b_scaled - swap.b_scaled).max() < 1e-12 * max(
                1.0, np.abs(km.b_scaled).max())

    def test_lower_bound_direction(self, wtable, rng):
        # z -|- u: z^T b z >= min(w1, w2)|z|^2 / |u| > 0
        for _ in range(100):
            v, vs = rng.normal(0, 1.5, 3), rng.normal(0, 1.5, 3)
            fr = make_frame(v, vs)
            z = np.cross(fr.u_hat, rng.normal(0, 1, 3))
            if np.linalg.norm(z) < 1e-8:
                continue
            z /= np.linalg.norm(z)
            km = kernel_B(v, vs, wtable)
            assert z @ km.b @ z > 0.0

    def test_fused_sqrt_mumu(self, wtable):
        v, vs = np.array([1.0, 0, 0]), np.array([-1.0, 0, 0])
        M = kernel_B_times_sqrt_mumu(v, vs, wtable)
        c = math.pi * J0_K1 / 8.0 * (2.0 * math.pi) ** -1.5 * math.exp(-0.5)
        assert np.allclose(M, np.diag([0.0, c, c]), atol=1e-9)

    def test_fused_equals_product_in_safe_range(self, wtable, rng):
        for _ in range(100):
            v, vs = rng.normal(0, 1.5, 3), rng.normal(0, 1.5, 3)
            if np.linalg.norm(v - vs) < 1e-6:
                continue
            km = kernel_B(v, vs, wtable)
            direct = km.b * math.sqrt(maxwellian(v) * maxwellian(vs))
            fused = kernel_B_times_sqrt_mumu(v, vs, wtable)
            assert np.abs(direct - fused).max() < 1e-13 * max(np.abs(direct).max(), 1e-30)
            direct2 = km.b * maxwellian(v) * maxwellian(vs)
            fused2 = kernel_B_times_mumu(v, vs, wtable)
            assert np.abs(direct2 - fused2).max() < 1e-13 * max(np.abs(direct2).max(), 1e-30)

    def test_swap_invariance_fused(self, wtable, rng):
        for _ in range(50):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            a = kernel_B_times_sqrt_mumu(v, vs, wtable)
            b = kernel_B_times_sqrt_mumu(vs, v, wtable)
            assert np.abs(a - b).max() < 1e-14

    def test_envelope_bound_reported(self, wtable, rng):
        # |B_ij| |u| (1+|v_R|)^{3+3/4} e^{-|v_R|^2/2} stays bounded
        worst = 0.0
        for _ in range(1000):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            if np.linalg.norm(v - vs) < 1e-8:
                continue
            km = kernel_B(v, vs, wtable)
            fr = km.frame
            worst = max(worst, np.abs(km.b_scaled).max() * fr.u_mag
                        * (1.0 + fr.v_R_mag) ** 3.75)
        assert worst < 100.0

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_psd_property(self, wtable, seed):
        r = np.random.default_rng(seed)
        v, vs = r.normal(0, 2, 3), r.normal(0, 2, 3)
        if np.linalg.norm(v - vs) < 1e-8:
            return
        km = kernel_B(v, vs, wtable)
        z = r.normal(0, 1, 3)
        assert z @ km.b_scaled @ z > -1e-12 * (z @ z)


class TestLandau:
    def test_projection_and_trace(self, rng):
        v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
        u = v - vs
        ld = landau_kernel(v, vs, 2.5)
        assert abs(u @ ld @ u) < 1e-12
        assert np.trace(ld) == pytest.approx(2.0 * 2.5 / np.linalg.norm(u), rel=1e-12)

    def test_unit_shielding_reduces_to_landau(self, rng):
        # J == 4 (rho-integral == 1) gives w1 = w2 = pi, the Landau kernel
        # with L = pi via the sphere-integral identity
        for _ in range(20):
            v, vs = rng.normal(0, 2, 3), rng.normal(0, 2, 3)
            if np.linalg.norm(v - vs) < 1e-6:
                continue
            forced = kernel_from_weights(v, vs, math.pi, math.pi)
            ld = landau_kernel(v, vs, math.pi)
            assert np.abs(forced - ld).max() < 1e-12
