r"""Plasma dispersion function at the Maxwellian equilibrium.

Everything here reduces to the scaled Dawson-type function

    F(x) = e^{-x^2/2} \int_0^x e^{t^2/2} dt,

through which the longitudinal permittivity reads

    eps(|k|, x) = 1 + |k|^{-2} (Psi_R(x) + i Psi_I(x)),
    Psi_R(x) = 1 - x F(x),
    Psi_I(x) = -sqrt(pi/2) x e^{-x^2/2},

with x the velocity component along the wavevector.  F is evaluated
without ever forming e^{+x^2/2}: the Maclaurin series of the integral has
all-positive terms (no cancellation) and is paired with the final
e^{-x^2/2} factor, while beyond ``psi_switch_x`` the optimally truncated
asymptotic series F ~ 1/x + 1/x^3 + 3/x^5 + ... takes over.

All evaluators are pure and accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .config import DEFAULT_CONFIG, DomainError, PlasmaConfig

SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class DispersionValue:
    """Complex dispersion-function value split into real/imaginary parts."""

    re: float
    im: float

    @property
    def as_complex(self) -> complex:
        return complex(self.re, self.im)

    @property
    def abs2(self) -> float:
        return self.re * self.re + self.im * self.im


def _dawson_series(ax):
    """F on |x| <= switch via the positive-term Maclaurin sum.

    int_0^x e^{t^2/2} dt = sum_n x^{2n+1} / ((2n+1) 2^n n!), every term
    positive, so the sum carries full relative precision; the e^{-x^2/2}
    multiplier is applied once at the end.
    """
    ax = np.asarray(ax, dtype=float)
    x2 = ax * ax
    term = ax.copy()
    total = ax.copy()
    # term ratio: x^2/(2(n+1)) * (2n+1)/(2n+3); at x=8 converges by n~100
    for n in range(200):
        term = term * x2 * (2 * n + 1) / (2.0 * (n + 1) * (2 * n + 3))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return np.exp(-0.5 * x2) * total


def _dawson_asymptotic(ax):
    """F on |x| > switch via the optimally truncated asymptotic series.

    F ~ sum_k (2k-1)!!/x^{2k+1}; terms are added while they keep
    decreasing, which leaves an error ~ sqrt(pi/2) e^{-x^2/2}.
    """
    ax = np.asarray(ax, dtype=float)
    inv_x2 = 1.0 / (ax * ax)
    term = 1.0 / ax
    total = term.copy()
    active = np.ones(ax.shape, dtype=bool)
    for k in range(120):
        new = term * (2 * k + 1) * inv_x2
        grow = new >= term
        active = active & ~grow
        total = np.where(active, total + new, total)
        term = new
        if not active.any():
            break
    return total


def dawson_scaled(x, switch_x: float | None = None):
    """Scaled Dawson function F(x) = e^{-x^2/2} int_0^x e^{t^2/2} dt.

    Odd in x (enforced bit-exactly by evaluating at |x|).  Equals
    sqrt(2) * D(x/sqrt(2)) with D the classical Dawson integral.
    """
    if switch_x is None:
        switch_x = DEFAULT_CONFIG.psi_switch_x
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if not np.all(np.isfinite(x_arr)):
        raise DomainError("dawson_scaled requires finite x")
    ax = np.abs(x_arr)
    out = np.empty_like(ax)
    small = ax <= switch_x
    if small.any():
        out[small] = _dawson_series(ax[small])
    if (~small).any():
        out[~small] = _dawson_asymptotic(ax[~small])
    out = np.sign(x_arr) * out
    return float(out[0]) if scalar else out


def _psi_r_tail(ax):
    """-Psi_R as its own asymptotic series, sum_k (2k-1)!!/x^{2k}, k >= 1.

    Avoids the 1 - xF(x) subtraction on the asymptotic branch.
    """
    inv_x2 = 1.0 / (ax * ax)
    term = inv_x2.copy()
    total = term.copy()
    active = np.ones(ax.shape, dtype=bool)
    for k in range(1, 120):
        new = term * (2 * k + 1) * inv_x2
        grow = new >= term
        active = active & ~grow
        total = np.where(active, total + new, total)
        term = new
        if not active.any():
            break
    return total


def psi_arrays(x, cfg: PlasmaConfig = DEFAULT_CONFIG):
    """(Psi_R, Psi_I) for scalar or array x; Psi_R even, Psi_I odd."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x_arr)):
        raise DomainError("psi requires finite x")
    ax = np.abs(x_arr)
    re = np.empty_like(ax)
    small = ax <= cfg.psi_switch_x
    if small.any():
        axs = ax[small]
        re[small] = 1.0 - axs * _dawson_series(axs)
    if (~small).any():
        re[~small] = -_psi_r_tail(ax[~small])
    im = -SQRT_PI_OVER_2 * x_arr * np.exp(-0.5 * x_arr * x_arr)
    return re, im


def psi(x, cfg: PlasmaConfig = DEFAULT_CONFIG) -> DispersionValue:
    """Psi(x) = Psi_R(x) + i Psi_I(x) at a single point."""
    re, im = psi_arrays(float(x), cfg)
    return DispersionValue(re=float(re[0]), im=float(im[0]))


def epsilon(k_mag: float, x: float, cfg: PlasmaConfig = DEFAULT_CONFIG) -> DispersionValue:
    """Longitudinal permittivity eps(|k|, x) = 1 + |k|^{-2} Psi(x).

    Its modulus is strictly positive for every finite x: wherever the
    real part crosses zero, Psi_I(x) != 0.
    """
    if not (k_mag > 0.0 and math.isfinite(k_mag)):
        raise DomainError(f"epsilon requires k_mag > 0, got {k_mag}")
    val = psi(x, cfg)
    inv_k2 = 1.0 / (k_mag * k_mag)
    return DispersionValue(re=1.0 + inv_k2 * val.re, im=inv_k2 * val.im)


def epsilon_abs2_arrays(k_mag, x, cfg: PlasmaConfig = DEFAULT_CONFIG):
    """|eps(|k|, x)|^2 for array arguments (hot path for the oracles)."""
    re, im = psi_arrays(x, cfg)
    inv_k2 = 1.0 / (np.asarray(k_mag, dtype=float) ** 2)
    er = 1.0 + inv_k2 * re
    ei = inv_k2 * im
    return er * er + ei * ei


def psi_r_pv_oracle(x: float, cfg: PlasmaConfig = DEFAULT_CONFIG) -> float:
    """Psi_R by direct principal-value quadrature; oracle for psi().re.

    The singular integral is rewritten through the symmetric subtraction

        P.V. int e^{-y^2/2}/(x-y) dy = int_0^T [g(x-t) - g(x+t)]/t dt,

    g(s) = e^{-s^2/2}, which removes the singularity analytically; the
    integrand tends to -2 g'(x) at t -> 0.  T = |x| + 12 bounds the
    Gaussian tail below 1e-31.
    """
    x = float(x)
    if abs(x) > 8.0:
        raise DomainError("psi_r_pv_oracle is restricted to |x| <= 8")

    def integrand(t):
        return (math.exp(-0.5 * (x - t) ** 2) - math.exp(-0.5 * (x + t) ** 2)) / t

    upper = abs(x) + 12.0
    pts = [p for p in (abs(x), abs(x) / 2.0) if 0.0 < p < upper]
    pv, _ = quad(integrand, 1e-300, upper, points=pts or None,
                 limit=300, epsabs=1e-13, epsrel=max(1e-13, 0.01 * cfg.quad_rel_tol))
    return 1.0 - x * pv / math.sqrt(2.0 * math.pi)
