import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import dawsn

from balescu.config import DomainError
from balescu.dispersion import (dawson_scaled, epsilon, psi, psi_arrays,
                                psi_r_pv_oracle)

# frozen with mpmath: e^{-1/2} int_0^1 e^{t^2/2} dt
F_AT_1 = 0.72477845900707633
# frozen with mpmath: 100 * (1 - 10 F(10))
X2_PSI_R_AT_10 = -1.0316156491859887


class TestDawson:
    def test_odd_at_zero(self):
        assert dawson_scaled(0.0) == 0.0

    def test_value_at_one(self):
        assert dawson_scaled(1.0) == pytest.approx(F_AT_1, abs=1e-8)

    def test_asymptotic_regime(self):
        # F ~ 1/x + 1/x^3 + ..., so x F(x) slightly above 1
        val = 20.0 * dawson_scaled(20.0)
        assert 1.0 <= val <= 1.01

    def test_against_scipy_dawson(self):
        # independent oracle: F(x) = sqrt(2) D(x / sqrt(2))
        xs = np.concatenate([np.linspace(1e-3, 8.0, 300),
                             np.linspace(8.01, 40.0, 150)])
        ours = dawson_scaled(xs)
        ref = math.sqrt(2.0) * dawsn(xs / math.sqrt(2.0))
        assert np.max(np.abs(ours - ref) / np.abs(ref)) < 5e-13

    def test_branches_agree_at_switch(self, cfg):
        below = dawson_scaled(cfg.psi_switch_x)
        above = dawson_scaled(np.nextafter(cfg.psi_switch_x, np.inf))
        assert abs(below - above) / below < 1e-12

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            dawson_scaled(float("nan"))


class TestPsi:
    def test_at_zero(self):
        p = psi(0.0)
        assert (p.re, p.im) == (1.0, 0.0)

    def test_im_at_one(self):
        assert psi(1.0).im == pytest.approx(-math.sqrt(math.pi / 2.0) * math.exp(-0.5),
                                            abs=1e-14)

    def test_tail_at_ten(self):
        assert 100.0 * psi(10.0).re == pytest.approx(X2_PSI_R_AT_10, abs=1e-3)

    def test_parity_bit_exact(self, rng):
        xs = rng.uniform(-10.0, 10.0, 200)
        rp, ip = psi_arrays(xs)
        rm, im = psi_arrays(-xs)
        assert np.array_equal(rp, rm)
        assert np.array_equal(ip, -im)

    @pytest.mark.parametrize("x", [10.0, 15.0, 20.0])
    def test_jdecay_limit_envelope(self, x):
        # x^2 Psi_R -> -1 with true correction -3/x^2 - O(x^-4),
        # enveloped by 4/x^2
        assert abs(x * x * psi(x).re + 1.0) < 4.0 / (x * x)

    def test_limit_at_twenty_within_one_percent(self):
        assert abs(400.0 * psi(20.0).re + 1.0) < 1e-2


class TestEpsilon:
    def test_trivial_points(self):
        assert epsilon(1.0, 0.0).re == 2.0
        assert epsilon(2.0, 0.0).re == 1.25

    def test_rejects_bad_k(self):
        with pytest.raises(DomainError):
            epsilon(0.0, 1.0)
        with pytest.raises(DomainError):
            epsilon(-1.0, 1.0)

    def test_real_part_can_vanish_but_not_modulus(self):
        # root-find Psi_R(x) = -0.25 so that eps(0.5, x) has zero real part
        from scipy.optimize import brentq

        x0 = brentq(lambda x: psi(x).re + 0.25, 1.4, 2.0, xtol=1e-14)
        e = epsilon(0.5, x0)
        assert abs(e.re) < 1e-12
        assert abs(e.im) > 1e-6
        assert abs(e.im - psi(x0).im / 0.25) < 1e-14

    def test_nonvanishing_sweep(self, rng):
        kmag = rng.uniform(0.01, 10.0, 10_000)
        x = rng.uniform(-20.0, 20.0, 10_000)
        re, im = psi_arrays(x)
        er = 1.0 + re / kmag ** 2
        ei = im / kmag ** 2
        mod = np.hypot(er, ei)
        assert np.all(mod > 0.0)
        near = np.abs(er) < 1e-6
        assert np.all(np.abs(ei[near]) > 0.0)

    @given(st.floats(min_value=-20.0, max_value=20.0),
           st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=100, deadline=None)
    def test_modulus_positive_property(self, x, kmag):
        e = epsilon(kmag, x)
        assert e.abs2 > 0.0


class TestPVOracle:
    def test_at_zero(self):
        assert psi_r_pv_oracle(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_matches_closed_form_at_one(self):
        assert abs(psi_r_pv_oracle(1.0) - psi(1.0).re) < 1e-7

    def test_even(self):
        for x in (0.7, 2.5, 6.0):
            assert psi_r_pv_oracle(x) == pytest.approx(psi_r_pv_oracle(-x), abs=1e-12)

    def test_grid_agreement(self, cfg):
        worst = 0.0
        for x in np.linspace(-8.0, 8.0, 50):
            a = psi_r_pv_oracle(float(x), cfg)
            b = psi(float(x), cfg).re
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        assert worst < cfg.quad_rel_tol

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            psi_r_pv_oracle(9.0)
