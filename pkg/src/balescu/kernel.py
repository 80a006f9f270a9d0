r"""Reduced Balescu-Lenard collision kernel at Maxwellian.

The kernel factorizes (after extracting the contact delta and two in-plane
rotations) as

    B(v, v - v*) = [xi^1 w1(|v_R|) + xi^2 w2(|v_R|)] / |v - v*|,

with |v_R| the speed of v perpendicular to the relative velocity,
xi^1 + xi^2 = I - u_hat u_hat^T the Landau projection, and scalar weights

    w_i(r) = int_0^{pi/2} trig_i^2(theta) J(r cos theta) dtheta,

where J collects the shielding:

    J(x) = int_0^{k0} 4 rho^3 / [(rho^2 + Psi_R)^2 + Psi_I^2] drho
         = log(1 + (k0^4 + 2 Psi_R k0^2)/(Psi_R^2 + Psi_I^2))
           + 2 (Psi_R/Psi_I) [atan(Psi_R/Psi_I) - atan((k0^2+Psi_R)/Psi_I)].

J grows like sqrt(8 pi) e^{x^2/2} / x^3, so every consumer-facing product
is built from the scaled J~ = e^{-x^2/2} J and the scaled weights
w_i~ = e^{-r^2/2} w_i, with all compensating exponentials fused
analytically (never multiplied out numerically).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .config import DEFAULT_CONFIG, DomainError, OverflowGuardError, PlasmaConfig, QuadratureError
from .dispersion import SQRT_2_OVER_PI, psi_arrays

JAY_X_MAX = 25.0          # beyond this the unscaled J(x) is handed to jay_scaled
UNSCALED_R_MAX = 37.0     # e^{r^2/2} representable below this
SINGULAR_TOL = 1e-8       # |v_R| below which the xi split is ill-conditioned
INV_TWO_PI_32 = (2.0 * math.pi) ** -1.5


# ---------------------------------------------------------------------------
# J(x)
# ---------------------------------------------------------------------------

def _atan_difference(a, b):
    """atan(a) - atan(b), evaluated stably when both magnitudes are large.

    Uses atan(t) = sign(t) pi/2 - atan(1/t), so the near-cancelling pi/2
    contributions are handled exactly and the residual is computed from
    the small reciprocals.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    big = (np.abs(a) > 2.0) & (np.abs(b) > 2.0)
    with np.errstate(divide="ignore"):
        inv_a = np.where(big, 1.0 / a, 0.0)
        inv_b = np.where(big, 1.0 / b, 0.0)
    stable = np.arctan(inv_b) - np.arctan(inv_a) + (np.sign(a) - np.sign(b)) * (np.pi / 2.0)
    direct = np.arctan(a) - np.arctan(b)
    return np.where(big, stable, direct)


def _jay_pieces(x, cfg):
    """(log term, atan-difference, Psi_R, Psi_I, degenerate mask) for J.

    The arctan term has a removable singularity only at x = 0 (the single
    zero of Psi_I, where Psi_R = 1); the mask therefore requires
    Psi_R > 0 in addition to the relative Psi_I threshold, otherwise it
    would also fire at large |x| where Psi_I merely underflows.
    """
    re, im = psi_arrays(x, cfg)
    k2 = cfg.k0 * cfg.k0
    num = (re + k2) ** 2 + im * im
    den = re * re + im * im
    log_term = np.log(num / den)
    degenerate = (np.abs(im) < 1e-12 * (np.abs(re) + k2)) & (re > 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = np.where(degenerate, 1.0, re / im)
        b = np.where(degenerate, 1.0, (k2 + re) / im)
    return log_term, _atan_difference(a, b), re, im, degenerate


def jay(x, cfg: PlasmaConfig = DEFAULT_CONFIG):
    """Closed-form J(x); strictly positive, even, |x| <= 25.

    At the removable singularity the arctan term is replaced by its
    analytic limit -2 k0^2/(k0^2 + Psi_R), which at x = 0, k0 = 1 gives
    J(0) = 2 ln 2 - 1.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    scalar = np.ndim(x) == 0
    if np.any(np.abs(x_arr) > JAY_X_MAX):
        raise OverflowGuardError(
            f"jay is guarded to |x| <= {JAY_X_MAX}; use jay_scaled for larger arguments")
    log_term, diff, re, im, degenerate = _jay_pieces(x_arr, cfg)
    k2 = cfg.k0 * cfg.k0
    with np.errstate(invalid="ignore"):
        atan_term = np.where(degenerate, -2.0 * k2 / (k2 + re), 2.0 * (re / np.where(degenerate, 1.0, im)) * diff)
    out = log_term + atan_term
    return float(out[0]) if scalar else out


def jay_scaled(x, cfg: PlasmaConfig = DEFAULT_CONFIG):
    """J~(x) = e^{-x^2/2} J(x), finite for every finite x.

    The prefactor e^{-x^2/2} Psi_R/Psi_I collapses exactly to
    -sqrt(2/pi) Psi_R / x, so no intermediate exceeds
    O(1/x^3) * (arctan difference <= pi).
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    scalar = np.ndim(x) == 0
    log_term, diff, re, im, degenerate = _jay_pieces(x_arr, cfg)
    k2 = cfg.k0 * cfg.k0
    scale = np.exp(-0.5 * x_arr * x_arr)
    with np.errstate(invalid="ignore"):
        safe_x = np.where(degenerate, 1.0, x_arr)
        prefactor = np.where(degenerate, 1.0, -2.0 * SQRT_2_OVER_PI * re / safe_x)
        atan_term = np.where(degenerate, scale * (-2.0 * k2 / (k2 + re)), prefactor * diff)
    out = scale * log_term + atan_term
    return float(out[0]) if scalar else out


def jay_oracle(x: float, cfg: PlasmaConfig = DEFAULT_CONFIG) -> float:
    """J(x) by adaptive quadrature of the defining rho-integral.

    In the variable s = rho^2 the integrand is 2s/((s + Psi_R)^2 + Psi_I^2).
    When Psi_R < 0 the integrand carries a Lorentzian peak of half-width
    |Psi_I| (as small as 1e-135 within the guarded range) at s = -Psi_R;
    the substitution s = -Psi_R + |Psi_I| sinh(w) flattens it into a
    smooth O(exp(-|w|)) profile that adaptive quadrature resolves in
    double precision.  Independent of the closed form in jay().
    """
    x = float(x)
    if abs(x) > JAY_X_MAX:
        raise OverflowGuardError(f"jay_oracle is guarded to |x| <= {JAY_X_MAX}")
    re, im = psi_arrays(x, cfg)
    pr, pi_ = float(re[0]), float(im[0])
    k2 = cfg.k0 * cfg.k0
    rel = min(1e-10, cfg.quad_rel_tol)
    if pr < 0.0 and pi_ != 0.0:
        s0, a = -pr, abs(pi_)
        w0 = math.asinh(-s0 / a)
        w1 = math.asinh((k2 - s0) / a)

        def integrand(w):
            return 2.0 * (s0 + a * math.sinh(w)) / (a * math.cosh(w))

        val, err = quad(integrand, w0, w1, points=[0.0] if w0 < 0.0 < w1 else None,
                        limit=400, epsabs=0.0, epsrel=rel)
    else:
        def integrand(rho):
            s = rho * rho
            return 4.0 * rho * s / ((s + pr) ** 2 + pi_ * pi_)

        val, err = quad(integrand, 0.0, cfg.k0, limit=400,
                        epsabs=cfg.quad_abs_tol, epsrel=rel)
    if err > max(cfg.quad_abs_tol, 10.0 * cfg.quad_rel_tol * abs(val)):
        raise QuadratureError(
            f"jay_oracle({x}) reached only {err:.3e} absolute error", achieved=val)
    return val


# ---------------------------------------------------------------------------
# Angular weights w1, w2
# ---------------------------------------------------------------------------

def _panel_nodes(r, order):
    """Composite Gauss-Legendre nodes/weights on [0, pi/2], graded so the
    e^{-(r sin theta)^2/2} boundary layer of width ~1/r is resolved."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    rr = max(float(r), 1.0)
    e1 = min(math.pi / 4.0, 5.0 / rr)
    e2 = min(math.pi / 3.0, 15.0 / rr)
    edges = [0.0, e1, e2, math.pi / 2.0]
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (gl_x + 1.0))
        weights.append(half * gl_w)
    return np.concatenate(nodes), np.concatenate(weights)


def weights_scaled_quadrature(r: float, cfg: PlasmaConfig = DEFAULT_CONFIG, order: int = 64):
    """(w1~, w2~) at a single r by direct composite-GL quadrature.

    w_i~(r) = int_0^{pi/2} trig_i^2 J~(r cos th) e^{-(r sin th)^2/2} dth,
    which equals e^{-r^2/2} w_i(r) exactly because the two exponentials
    fuse node-by-node: e^{-(r cos)^2/2} e^{-(r sin)^2/2} = e^{-r^2/2}.
    """
    if r < 0.0:
        raise DomainError("weights require v_R_mag >= 0")
    theta, wts = _panel_nodes(r, order)
    st, ct = np.sin(theta), np.cos(theta)
    f = jay_scaled(r * ct, cfg) * np.exp(-0.5 * (r * st) ** 2)
    w1 = float(np.sum(wts * st * st * f))
    w2 = float(np.sum(wts * ct * ct * f))
    return w1, w2


class WeightTable:
    """Dense table of the scaled weights on [0, vr_max], built once.

    Kernel evaluation sits inside 3-D quadratures, so lookups go through
    linear interpolation on a 0.002-spaced grid (relative error < 1e-6,
    asserted in the tests); the direct quadrature stays available as the
    slow path and as the tabulation oracle.
    """

    def __init__(self, cfg: PlasmaConfig = DEFAULT_CONFIG, vr_max: float = 16.0,
                 dr: float = 0.001, order: int = 64):
        self.cfg = cfg
        self.vr_max = float(vr_max)
        self.order = order
        self.r_grid = np.arange(0.0, self.vr_max + dr, dr)
        w1, w2 = self._quadrature_batch(self.r_grid, order)
        self.w1_scaled = w1
        self.w2_scaled = w2
        # spectral self-check at doubled order on a thinned grid
        sample = self.r_grid[:: max(1, len(self.r_grid) // 40)]
        w1d, w2d = self._quadrature_batch(sample, 2 * order)
        ref1 = np.interp(sample, self.r_grid, w1)
        ref2 = np.interp(sample, self.r_grid, w2)
        self.selfcheck_rel = float(max(
            np.max(np.abs(w1d - ref1) / w1d), np.max(np.abs(w2d - ref2) / w2d)))

    def _quadrature_batch(self, r_values, order):
        gl_x, gl_w = np.polynomial.legendre.leggauss(order)
        r_values = np.asarray(r_values, dtype=float)
        rr = np.maximum(r_values, 1.0)[:, None]
        e0 = np.zeros_like(rr)
        e1 = np.minimum(math.pi / 4.0, 5.0 / rr)
        e2 = np.minimum(math.pi / 3.0, 15.0 / rr)
        e3 = np.full_like(rr, math.pi / 2.0)
        theta_list, wt_list = [], []
        for lo, hi in ((e0, e1), (e1, e2), (e2, e3)):
            half = 0.5 * (hi - lo)
            theta_list.append(lo + half * (gl_x[None, :] + 1.0))
            wt_list.append(half * gl_w[None, :])
        theta = np.concatenate(theta_list, axis=1)
        wts = np.concatenate(wt_list, axis=1)
        st, ct = np.sin(theta), np.cos(theta)
        f = jay_scaled((r_values[:, None] * ct).ravel(), self.cfg).reshape(theta.shape)
        f = f * np.exp(-0.5 * (r_values[:, None] * st) ** 2)
        w1 = np.sum(wts * st * st * f, axis=1)
        w2 = np.sum(wts * ct * ct * f, axis=1)
        return w1, w2

    def w_scaled(self, r):
        """(w1~, w2~) interpolated; falls back to quadrature beyond the table."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < 0.0):
            raise DomainError("weights require v_R_mag >= 0")
        w1 = np.interp(r_arr, self.r_grid, self.w1_scaled)
        w2 = np.interp(r_arr, self.r_grid, self.w2_scaled)
        over = r_arr > self.vr_max
        if over.any():
            for idx in np.nonzero(over)[0]:
                w1[idx], w2[idx] = weights_scaled_quadrature(r_arr[idx], self.cfg, self.order)
        if np.ndim(r) == 0:
            return float(w1[0]), float(w2[0])
        return w1, w2

    def weights_w(self, r):
        """(w1, w2, w1_scaled, w2_scaled) at v_R_mag = r; all positive.

        The unscaled pair multiplies back e^{+r^2/2} and is guarded to
        r <= 37 where that factor is representable.
        """
        w1s, w2s = self.w_scaled(r)
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr > UNSCALED_R_MAX):
            raise OverflowGuardError(
                f"unscaled weights overflow beyond r = {UNSCALED_R_MAX}; use the scaled pair")
        grow = np.exp(0.5 * r_arr * r_arr)
        return w1s * grow, w2s * grow, w1s, w2s


# ---------------------------------------------------------------------------
# Geometry: relative-velocity frame and xi projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelVelFrame:
    """Orthonormal frame attached to the relative velocity u = v - v*."""

    u: np.ndarray
    u_mag: float
    u_hat: np.ndarray
    v_par: float
    vstar_par: float
    v_R_mag: float
    u1: np.ndarray
    u2: np.ndarray


def make_frame(v, vstar) -> RelVelFrame:
    v = np.asarray(v, dtype=float)
    vstar = np.asarray(vstar, dtype=float)
    u = v - vstar
    u_mag = float(np.linalg.norm(u))
    if u_mag == 0.0:
        raise DomainError("kernel is singular at v = v*")
    u_hat = u / u_mag
    v_par = float(u_hat @ v)
    vstar_par = float(u_hat @ vstar)
    p = v - v_par * u_hat
    v_R_mag = float(np.linalg.norm(p))
    # deterministic in-plane basis: reflect the least-aligned axis
    k = int(np.argmin(np.abs(u_hat)))
    e = np.zeros(3)
    e[k] = 1.0
    u1 = e - (e @ u_hat) * u_hat
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(u_hat, u1)
    return RelVelFrame(u=u, u_mag=u_mag, u_hat=u_hat, v_par=v_par,
                       vstar_par=vstar_par, v_R_mag=v_R_mag, u1=u1, u2=u2)


@dataclass(frozen=True)
class XiMatrices:
    xi1: np.ndarray | None
    xi2: np.ndarray | None
    degenerate: bool


def xi_matrices(frame: RelVelFrame, v, singular_tol: float = SINGULAR_TOL) -> XiMatrices:
    """Rank-1 projections xi^1 = q_hat q_hat^T, xi^2 = p_hat p_hat^T.

    p = (I - u_hat u_hat^T) v is the in-plane part of v and
    q = (u2.v) u1 - (u1.v) u2 its in-plane perpendicular, so
    xi^1 + xi^2 = I - u_hat u_hat^T and both annihilate u.  Below
    singular_tol the split is ill-conditioned but w1 = w2 makes the sum
    well defined; the degenerate flag tells the caller to use the
    projection form w1(0) (I - u_hat u_hat^T)/|u| instead.
    """
    if frame.v_R_mag < singular_tol:
        return XiMatrices(xi1=None, xi2=None, degenerate=True)
    v = np.asarray(v, dtype=float)
    p = v - (frame.u_hat @ v) * frame.u_hat
    p_hat = p / np.linalg.norm(p)
    q = (frame.u2 @ v) * frame.u1 - (frame.u1 @ v) * frame.u2
    q_hat = q / np.linalg.norm(q)
    return XiMatrices(xi1=np.outer(q_hat, q_hat), xi2=np.outer(p_hat, p_hat), degenerate=False)


# ---------------------------------------------------------------------------
# Kernel assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelMatrix:
    """Kernel at one (v, v*) pair, with its overflow-safe companion
    b_scaled = e^{-|v_R|^2/2} b."""

    b: np.ndarray
    b_scaled: np.ndarray
    frame: RelVelFrame


def _assemble(frame: RelVelFrame, v, w1, w2, singular_tol=SINGULAR_TOL):
    xi = xi_matrices(frame, v, singular_tol)
    if xi.degenerate:
        proj = np.eye(3) - np.outer(frame.u_hat, frame.u_hat)
        return w1 * proj / frame.u_mag
    return (w1 * xi.xi1 + w2 * xi.xi2) / frame.u_mag


def kernel_B(v, vstar, table: WeightTable, singular_tol: float = SINGULAR_TOL) -> KernelMatrix:
    """Full kernel B(v, v - v*): symmetric, PSD, annihilates v - v*.

    Swapping the roles of v and v* while holding u = v - v* fixed leaves
    the matrix unchanged (|v_R| = |v_R*| and the in-plane projections
    agree because (I - u_hat u_hat^T)(v - v*) = 0).
    """
    frame = make_frame(v, vstar)
    w1s, w2s = table.w_scaled(frame.v_R_mag)
    if frame.v_R_mag > UNSCALED_R_MAX:
        raise OverflowGuardError("unscaled kernel overflows; use kernel_B_times_sqrt_mumu")
    grow = math.exp(0.5 * frame.v_R_mag ** 2)
    b = _assemble(frame, v, w1s * grow, w2s * grow, singular_tol)
    b_scaled = _assemble(frame, v, w1s, w2s, singular_tol)
    return KernelMatrix(b=b, b_scaled=b_scaled, frame=frame)


def kernel_B_times_sqrt_mumu(v, vstar, table: WeightTable,
                             singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """B(v, v - v*) sqrt(mu(v) mu(v*)) with all exponentials fused.

    sqrt(mu mu*) e^{+|v_R|^2/2} = (2 pi)^{-3/2} e^{-(v_par^2 + vstar_par^2)/4}
    exactly, because |v|^2 = v_par^2 + |v_R|^2 and likewise for v*; the
    product is b_scaled times that bounded factor, so no intermediate
    exceeds O(1).  This is the only form the operator module consumes.
    """
    frame = make_frame(v, vstar)
    w1s, w2s = table.w_scaled(frame.v_R_mag)
    gauss = INV_TWO_PI_32 * math.exp(-0.25 * (frame.v_par ** 2 + frame.vstar_par ** 2))
    return _assemble(frame, v, w1s * gauss, w2s * gauss, singular_tol)


def kernel_B_times_mumu(v, vstar, table: WeightTable,
                        singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """B(v, v - v*) mu(v) mu(v*), fused the same way.

    mu mu* e^{+|v_R|^2/2} = (2 pi)^{-3} e^{-(v_par^2 + vstar_par^2)/2 - |v_R|^2/2}.
    Used by the 3-D bilinear form of K written in terms of g/sqrt(mu).
    """
    frame = make_frame(v, vstar)
    w1s, w2s = table.w_scaled(frame.v_R_mag)
    gauss = (2.0 * math.pi) ** -3 * math.exp(
        -0.5 * (frame.v_par ** 2 + frame.vstar_par ** 2) - 0.5 * frame.v_R_mag ** 2)
    return _assemble(frame, v, w1s * gauss, w2s * gauss, singular_tol)


def kernel_from_weights(v, vstar, w1: float, w2: float,
                        singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """Kernel assembled from caller-supplied constant weights.

    With w1 = w2 = c this is c (I - u_hat u_hat^T)/|u|, the Landau shape;
    forcing unit shielding (the rho-integral == 1, so w1 = w2 = pi)
    reproduces landau_kernel with L_const = pi, the sphere-integral
    identity of the unshielded limit.
    """
    frame = make_frame(v, vstar)
    return _assemble(frame, v, w1, w2, singular_tol)


def landau_kernel(v, vstar, L_const: float) -> np.ndarray:
    """Comparison Landau kernel (L/|u|)(I - u_hat u_hat^T)."""
    if not (L_const > 0.0):
        raise DomainError("landau_kernel requires L_const > 0")
    frame = make_frame(v, vstar)
    proj = np.eye(3) - np.outer(frame.u_hat, frame.u_hat)
    return (L_const / frame.u_mag) * proj
