r"""Collision frequency sigma(v) and its eigenvalues.

sigma^{ij}(v) = int B_ij(v, v - v*) mu(v*) dv* has eigenvalue lambda_1
along v and a double eigenvalue lambda_2 perpendicular to it.  After the
k-space reduction both collapse to 1-D integrals of the shielding
function:

    lambda_1(r) = sqrt(pi/2) r^{-3} I_2(r),
    lambda_2(r) = sqrt(pi/8) r^{-1} (I_0(r) - r^{-2} I_2(r)),
    I_m(r)      = int_0^r y^m e^{-y^2/2} J(y) dy.

The integrands are bounded (they are y^m jay_scaled(y)), so the
cumulative tables are cheap to build once and everything downstream is
table lookups.  Asymptotically lambda_1 ~ sqrt(8 pi) log(r)/r^3 and
r lambda_2 -> sqrt(pi/8) int_0^inf e^{-y^2/2} J dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .config import DEFAULT_CONFIG, DomainError, PlasmaConfig, QuadratureError
from .kernel import jay_scaled
from .dispersion import psi_arrays

SQRT_PI_2 = math.sqrt(math.pi / 2.0)
SQRT_PI_8 = math.sqrt(math.pi / 8.0)
SQRT_8PI = math.sqrt(8.0 * math.pi)
R_SMALL = 0.05   # below this the rescaled-quadrature (Taylor-exact) branch is used


@dataclass(frozen=True)
class EigenvaluePair:
    r: float
    lambda1: float
    lambda2: float


class FrequencyTable:
    """Cumulative integrals I_0, I_2 plus eigenvalue/derivative evaluators.

    Immutable after construction; all evaluators are pure and accept
    scalars or arrays.
    """

    def __init__(self, cfg: PlasmaConfig = DEFAULT_CONFIG, y_max: float = 120.0,
                 gl_order: int = 8):
        self.cfg = cfg
        self.y_max = float(y_max)
        edges = np.concatenate([
            np.arange(0.0, 4.0, 0.01),
            np.arange(4.0, 12.0, 0.02),
            np.arange(12.0, 40.0, 0.1),
            np.arange(40.0, self.y_max + 0.25, 0.5),
        ])
        edges = np.unique(np.clip(edges, 0.0, self.y_max))
        gl_x, gl_w = np.polynomial.legendre.leggauss(gl_order)
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        nodes = lo[:, None] + half[:, None] * (gl_x[None, :] + 1.0)
        wts = half[:, None] * gl_w[None, :]
        jt = jay_scaled(nodes.ravel(), cfg).reshape(nodes.shape)
        seg0 = np.sum(wts * jt, axis=1)
        seg2 = np.sum(wts * nodes * nodes * jt, axis=1)
        self.y_nodes = edges
        i0 = np.concatenate([[0.0], np.cumsum(seg0)])
        i2 = np.concatenate([[0.0], np.cumsum(seg2)])
        self._i0 = CubicSpline(edges, i0)
        self._i2 = CubicSpline(edges, i2)
        # small-r quadrature rule, reused by the Taylor-exact branch
        self._gl_t, self._gl_tw = np.polynomial.legendre.leggauss(48)
        self._gl_t = 0.5 * (self._gl_t + 1.0)
        self._gl_tw = 0.5 * self._gl_tw

    # -- cumulative integrals ------------------------------------------------

    def I0(self, r):
        return self._eval_I(self._i0, r)

    def I2(self, r):
        return self._eval_I(self._i2, r)

    def _eval_I(self, spline, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0.0) or np.any(r_arr > self.y_max):
            raise DomainError(f"cumulative integrals tabulated on [0, {self.y_max}]")
        return spline(r_arr)

    # -- eigenvalues ----------------------------------------------------------

    def _lambda_small(self, r):
        """Rescaled form lambda_i = c_i int_0^1 f_i(t) e^{-(rt)^2/2} J(rt) dt.

        Substituting y = r t removes the r -> 0 singularity analytically,
        so this branch realizes the Taylor limit
        lambda_1 = lambda_2 = (1/3) sqrt(pi/2) J(0) (1 + O(r^2)) to
        quadrature precision, including exactly at r = 0.
        """
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        t = self._gl_t[None, :]
        w = self._gl_tw[None, :]
        y = r_arr[:, None] * t
        f = jay_scaled(y.ravel(), self.cfg).reshape(y.shape)
        l1 = SQRT_PI_2 * np.sum(w * t * t * f, axis=1)
        l2 = SQRT_PI_8 * np.sum(w * (1.0 - t * t) * f, axis=1)
        return l1, l2

    def lambda_pair_arrays(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < 0.0):
            raise DomainError("lambda_pair requires r >= 0")
        l1 = np.empty_like(r_arr)
        l2 = np.empty_like(r_arr)
        small = r_arr < R_SMALL
        if small.any():
            l1[small], l2[small] = self._lambda_small(r_arr[small])
        big = ~small
        if big.any():
            rb = r_arr[big]
            i0 = self._i0(rb)
            i2 = self._i2(rb)
            l1[big] = SQRT_PI_2 * i2 / rb ** 3
            l2[big] = SQRT_PI_8 * (i0 - i2 / rb ** 2) / rb
        return l1, l2

    def lambda_pair(self, r: float) -> EigenvaluePair:
        l1, l2 = self.lambda_pair_arrays(float(r))
        return EigenvaluePair(r=float(r), lambda1=float(l1[0]), lambda2=float(l2[0]))

    def lambda_derivatives_arrays(self, r):
        """(dlambda1, dlambda2) by exact differentiation of the integral forms:

            dlambda1 = sqrt(pi/2) (-3 r^{-4} I_2 + r^{-1} Jtilde(r)),
            dlambda2 = sqrt(pi/8) ( 3 r^{-4} I_2 - r^{-2} I_0 )

        (the boundary terms of lambda_2 cancel).  Below R_SMALL those
        forms subtract near-equal O(1/r) pieces, so a centered stencil on
        the smooth rescaled branch is used instead.
        """
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr <= 0.0):
            raise DomainError("lambda_derivatives requires r > 0 "
                              "(both derivatives vanish at r = 0 by symmetry)")
        d1 = np.empty_like(r_arr)
        d2 = np.empty_like(r_arr)
        small = r_arr < R_SMALL
        if small.any():
            h = 0.01
            rs = r_arr[small]
            a1, a2 = self._lambda_small(np.abs(rs - h))
            b1, b2 = self._lambda_small(rs + h)
            d1[small] = (b1 - a1) / (2.0 * h)
            d2[small] = (b2 - a2) / (2.0 * h)
        big = ~small
        if big.any():
            rb = r_arr[big]
            i0 = self._i0(rb)
            i2 = self._i2(rb)
            jt = jay_scaled(rb, self.cfg)
            d1[big] = SQRT_PI_2 * (-3.0 * i2 / rb ** 4 + jt / rb)
            d2[big] = SQRT_PI_8 * (3.0 * i2 / rb ** 4 - i0 / rb ** 2)
        return d1, d2

    def lambda_derivatives(self, r: float):
        d1, d2 = self.lambda_derivatives_arrays(float(r))
        return float(d1[0]), float(d2[0])

    # -- matrix / vector forms -----------------------------------------------

    def sigma_matrix(self, v) -> np.ndarray:
        """sigma(v) = vhat vhat^T lambda1 + (I - vhat vhat^T) lambda2; SPD."""
        v = np.asarray(v, dtype=float)
        r = float(np.linalg.norm(v))
        pair = self.lambda_pair(r)
        if r == 0.0:
            return pair.lambda1 * np.eye(3)
        vhat = v / r
        proj = np.outer(vhat, vhat)
        return pair.lambda1 * proj + pair.lambda2 * (np.eye(3) - proj)

    def sigma_vec_and_div(self, v):
        """(sigma^i, d_i sigma^i) = (lambda1 v / 2, (3 lambda1 + r dlambda1)/2).

        v is an eigenvector of sigma, so sigma v / 2 is radial; the
        divergence follows from div(f(r) v) = 3 f + r f'.  Finite
        everywhere (no finite singularities of the eigenvalues).
        """
        v = np.asarray(v, dtype=float)
        r = float(np.linalg.norm(v))
        pair = self.lambda_pair(r)
        if r == 0.0:
            return np.zeros(3), 1.5 * pair.lambda1
        d1, _ = self.lambda_derivatives(r)
        return 0.5 * pair.lambda1 * v, 0.5 * (3.0 * pair.lambda1 + r * d1)

    def div_sigma_vec_arrays(self, r):
        """(3 lambda1 + r dlambda1)/2 on an array of radii (r = 0 allowed)."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r_arr)
        zero = r_arr == 0.0
        if zero.any():
            l1, _ = self.lambda_pair_arrays(r_arr[zero])
            out[zero] = 1.5 * l1
        pos = ~zero
        if pos.any():
            l1, _ = self.lambda_pair_arrays(r_arr[pos])
            d1, _ = self.lambda_derivatives_arrays(r_arr[pos])
            out[pos] = 0.5 * (3.0 * l1 + r_arr[pos] * d1)
        return out

    def table_on(self, radial_grid) -> dict:
        """Eigenvalues and derivatives sampled on an increasing radial grid."""
        rs = np.asarray(radial_grid, dtype=float)
        l1, l2 = self.lambda_pair_arrays(rs)
        d1 = np.zeros_like(rs)
        d2 = np.zeros_like(rs)
        pos = rs > 0.0
        if pos.any():
            d1[pos], d2[pos] = self.lambda_derivatives_arrays(rs[pos])
        return {"radial_grid": rs, "lambda1": l1, "lambda2": l2,
                "dlambda1": d1, "dlambda2": d2}

    # -- asymptotic constants --------------------------------------------------

    @cached_property
    def lambda2_tail_constant(self) -> float:
        """sqrt(pi/8) int_0^inf e^{-y^2/2} J(y) dy, the limit of r lambda_2.

        I_0(y_max) plus the analytic tail of Jtilde ~ sqrt(8 pi) y^{-3}
        (1 + 3/y^2 + ...), integrated: sqrt(8 pi)[1/(2 Y^2) + 3/(4 Y^4)].
        Accurate to ~1e-10 at Y = 120.
        """
        Y = self.y_max
        tail = SQRT_8PI * (0.5 / Y ** 2 + 0.75 / Y ** 4)
        return SQRT_PI_8 * (float(self._i0(Y)) + tail)


def lambda_pair(r: float, table: FrequencyTable) -> EigenvaluePair:
    return table.lambda_pair(r)


# ---------------------------------------------------------------------------
# 3-D k-space oracle
# ---------------------------------------------------------------------------

def _rho_line_integral(s: float, cfg: PlasmaConfig) -> float:
    """int_0^{k0} drho / (rho |eps(rho, s)|^2) by direct quadrature.

    Equals J(s)/4 but is computed from the permittivity itself, with the
    same sinh flattening of the shielding peak as jay_oracle.
    """
    re, im = psi_arrays(float(s), cfg)
    pr, pi_ = float(re[0]), float(im[0])
    k2 = cfg.k0 * cfg.k0
    if pr < 0.0 and pi_ != 0.0:
        s0, a = -pr, abs(pi_)
        w0 = math.asinh(-s0 / a)
        w1 = math.asinh((k2 - s0) / a)
        val, err = quad(lambda w: 0.5 * (s0 + a * math.sinh(w)) / (a * math.cosh(w)),
                        w0, w1, points=[0.0] if w0 < 0.0 < w1 else None,
                        limit=400, epsabs=0.0, epsrel=1e-10)
    else:
        def integrand(rho):
            rho2 = rho * rho
            return rho2 * rho / ((rho2 + pr) ** 2 + pi_ * pi_)

        val, err = quad(integrand, 0.0, cfg.k0, limit=400,
                        epsabs=cfg.quad_abs_tol, epsrel=1e-10)
    if err > max(cfg.quad_abs_tol, 1e-8 * abs(val)):
        raise QuadratureError(f"rho line integral at s={s} reached only {err:.3e}",
                              achieved=val)
    return val


def sigma_k_oracle(v, cfg: PlasmaConfig = DEFAULT_CONFIG,
                   n_mu: int = 96, n_phi: int = 64, n_s: int = 161) -> np.ndarray:
    """sigma(v) by direct quadrature of the 3-D k-integral

        (2 pi)^{-1/2} int_{|k|<=k0} k_i k_j |k|^{-5}
            e^{-(v.khat)^2/2} / |eps(|k|, khat.v)|^2 dk.

    In spherical k-coordinates the radial factor 1/|k| is integrable and
    is integrated adaptively along each ray; the angular integral uses a
    lab-frame Gauss x trapezoid product rule.  The radial line integral
    depends on the single scalar s = khat.v, so it is sampled on a
    Chebyshev grid of s and spline-interpolated across angular nodes.
    Independent of the closed-form J and of the lambda tables.
    """
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed > 10.0:
        raise DomainError("sigma_k_oracle is restricted to |v| <= 10")

    if speed == 0.0:
        line = _rho_line_integral(0.0, cfg)
        def line_of_s(s):
            return np.full_like(np.asarray(s, dtype=float), line)
    else:
        s_nodes = speed * np.cos(np.linspace(0.0, math.pi, n_s))
        s_nodes = np.unique(s_nodes)
        vals = np.array([_rho_line_integral(float(s), cfg) for s in s_nodes])
        spline = CubicSpline(s_nodes, vals)
        def line_of_s(s):
            return spline(np.clip(s, s_nodes[0], s_nodes[-1]))

    mu, mu_w = np.polynomial.legendre.leggauss(n_mu)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    phi_w = 2.0 * math.pi / n_phi
    st = np.sqrt(1.0 - mu ** 2)
    omega = np.empty((n_mu, n_phi, 3))
    omega[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
    omega[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
    omega[:, :, 2] = mu[:, None]
    s = omega @ v
    f = np.exp(-0.5 * s * s) * line_of_s(s)
    wts = mu_w[:, None] * phi_w * f
    sigma = np.einsum("mp,mpi,mpj->ij", wts, omega, omega) / math.sqrt(2.0 * math.pi)
    return sigma
