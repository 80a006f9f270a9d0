import math

import numpy as np
import pytest
from scipy.integrate import quad

from balescu.config import DomainError
from balescu.frequency import (R_SMALL, SQRT_8PI, SQRT_PI_2, SQRT_PI_8,
                               sigma_k_oracle)
from balescu.kernel import jay_scaled

LAMBDA0 = math.sqrt(math.pi / 2.0) * (2.0 * math.log(2.0) - 1.0) / 3.0
# frozen with mpmath from the reduced 1-D integrals at k0 = 1
LAMBDA1_AT_2 = 0.21216110614739872
LAMBDA2_AT_2 = 0.17837867752906588
I2_15_30 = 3.5003468895348206
C2_TAIL = 1.0887930436790568


class TestEigenvalues:
    def test_zero_limit_equality(self, freq):
        pair = freq.lambda_pair(0.0)
        assert abs(pair.lambda1 - pair.lambda2) / pair.lambda1 < 1e-8
        assert pair.lambda1 == pytest.approx(LAMBDA0, abs=1e-10)

    def test_frozen_references_at_two(self, freq):
        pair = freq.lambda_pair(2.0)
        assert pair.lambda1 == pytest.approx(LAMBDA1_AT_2, rel=1e-10)
        assert pair.lambda2 == pytest.approx(LAMBDA2_AT_2, rel=1e-10)

    def test_positive_on_grid(self, freq):
        l1, l2 = freq.lambda_pair_arrays(np.linspace(0.0, 30.0, 200))
        assert np.all(l1 > 0.0) and np.all(l2 > 0.0)

    def test_branch_continuity_at_switch(self, freq):
        l1s, l2s = freq._lambda_small(np.array([R_SMALL]))
        l1t = SQRT_PI_2 * float(freq._i2(R_SMALL)) / R_SMALL ** 3
        l2t = SQRT_PI_8 * (float(freq._i0(R_SMALL))
                           - float(freq._i2(R_SMALL)) / R_SMALL ** 2) / R_SMALL
        assert abs(l1t / l1s[0] - 1.0) < 1e-9
        assert abs(l2t / l2s[0] - 1.0) < 1e-9

    def test_small_branch_against_adaptive_quadrature(self, freq):
        # deep inside the Taylor regime: compare against direct quadrature
        r = 1e-3
        l1s, _ = freq._lambda_small(np.array([r]))
        i2, _ = quad(lambda y: y * y * jay_scaled(y), 0.0, r,
                     epsabs=1e-18, epsrel=1e-12)
        assert abs(l1s[0] - SQRT_PI_2 * i2 / r ** 3) / l1s[0] < 1e-9

    def test_cumulative_monotone(self, freq):
        rs = np.linspace(0.0, 100.0, 400)
        i0 = freq.I0(rs)
        i2 = freq.I2(rs)
        assert np.all(np.diff(i0) >= 0.0)
        assert np.all(np.diff(i2) >= 0.0)
        assert np.all(i2[1:] <= rs[1:] ** 2 * i0[1:])

    def test_lambda1_identity_with_i2(self, freq):
        for r in (0.5, 2.0, 10.0):
            pair = freq.lambda_pair(r)
            assert pair.lambda1 == pytest.approx(
                SQRT_PI_2 * float(freq.I2(r)) / r ** 3, rel=1e-12)

    def test_differenced_asymptote(self, freq):
        diff = float(freq.I2(30.0) - freq.I2(15.0))
        assert diff == pytest.approx(I2_15_30, rel=1e-9)
        assert diff == pytest.approx(SQRT_8PI * math.log(2.0), rel=1e-2)

    def test_lambda2_tail(self, freq):
        c2 = freq.lambda2_tail_constant
        assert c2 == pytest.approx(C2_TAIL, rel=1e-8)
        assert 100.0 * freq.lambda_pair(100.0).lambda2 == pytest.approx(c2, rel=1e-2)


class TestDerivatives:
    @pytest.mark.parametrize("r", [0.5, 2.0, 8.0])
    def test_matches_finite_differences(self, freq, r):
        d1, d2 = freq.lambda_derivatives(r)
        h = 1e-5
        f1 = (freq.lambda_pair(r + h).lambda1 - freq.lambda_pair(r - h).lambda1) / (2 * h)
        f2 = (freq.lambda_pair(r + h).lambda2 - freq.lambda_pair(r - h).lambda2) / (2 * h)
        assert abs(d1 - f1) <= max(1e-6, 1e-4 * abs(d1))
        assert abs(d2 - f2) <= max(1e-6, 1e-4 * abs(d2))

    def test_decay_envelope_and_sign(self, freq):
        rs = np.linspace(1.0, 30.0, 120)
        d1, _ = freq.lambda_derivatives_arrays(rs)
        env = np.abs(d1) * (1.0 + rs) ** 4 / np.log(2.0 + rs)
        assert np.isfinite(env).all() and env.max() < 100.0
        # observed numerically: lambda1 peaks near r = 2.22 and decays beyond
        assert np.all(d1[rs >= 2.5] < 0.0)

    def test_origin_domain_error(self, freq):
        with pytest.raises(DomainError):
            freq.lambda_derivatives(0.0)


class TestSigmaMatrix:
    def test_at_zero(self, freq):
        S = freq.sigma_matrix(np.zeros(3))
        assert np.allclose(S, LAMBDA0 * np.eye(3), atol=1e-10)

    def test_eigenvector(self, freq, rng):
        for _ in range(20):
            v = rng.normal(0, 2, 3)
            S = freq.sigma_matrix(v)
            pair = freq.lambda_pair(float(np.linalg.norm(v)))
            assert np.abs(S @ v - pair.lambda1 * v).max() < 1e-12
            assert np.linalg.eigvalsh(S).min() > 0.0

    def test_rotation_equivariance(self, freq, rng):
        from scipy.stats import special_ortho_group

        v = rng.normal(0, 2, 3)
        for R in special_ortho_group.rvs(3, size=5, random_state=1):
            left = freq.sigma_matrix(R @ v)
            right = R @ freq.sigma_matrix(v) @ R.T
            assert np.abs(left - right).max() < 1e-13

    def test_vec_and_div(self, freq, rng):
        vec0, div0 = freq.sigma_vec_and_div(np.zeros(3))
        assert np.all(vec0 == 0.0)
        assert div0 == pytest.approx(1.5 * LAMBDA0, rel=1e-10)
        # FD divergence of sigma(v) v / 2
        h = 1e-5
        for _ in range(10):
            v = rng.normal(0, 2, 3)
            _, div = freq.sigma_vec_and_div(v)
            fd = 0.0
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                fd += (freq.sigma_vec_and_div(v + e)[0][i]
                       - freq.sigma_vec_and_div(v - e)[0][i]) / (2 * h)
            assert div == pytest.approx(fd, abs=1e-6, rel=1e-5)

    def test_div_envelope(self, freq):
        rs = np.linspace(1.0, 30.0, 60)
        div = freq.div_sigma_vec_arrays(rs)
        env = np.abs(div) * (1.0 + rs) ** 3 / np.log(2.0 + rs)
        assert np.isfinite(env).all() and env.max() < 100.0


class TestSigmaKOracle:
    def test_at_zero(self, freq):
        S = sigma_k_oracle(np.zeros(3))
        assert np.abs(S - LAMBDA0 * np.eye(3)).max() < 1e-4 * LAMBDA0

    def test_offdiagonals_by_symmetry(self):
        S = sigma_k_oracle(np.array([2.0, 0, 0]))
        off = S - np.diag(np.diag(S))
        assert np.abs(off).max() < 1e-10

    @pytest.mark.parametrize("v", [[1.0, 0, 0], [0.0, 2, 1], [3.0, 3, 0]])
    def test_agreement_with_closed_form(self, freq, v):
        v = np.array(v)
        so = sigma_k_oracle(v)
        sm = freq.sigma_matrix(v)
        assert np.linalg.norm(so - sm) / np.linalg.norm(sm) < 1e-3

    def test_restricted_domain(self):
        with pytest.raises(DomainError):
            sigma_k_oracle(np.array([11.0, 0, 0]))
