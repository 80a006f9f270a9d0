r"""Small 3-D velocity grids: quadratic forms of L and the K oracle.

A full Galerkin assembly of K in 3-D is a six-dimensional quadrature, so
this module only supports what the desk-scale checks need: the bilinear
form <L g1, g2> on grids with n <= 17 nodes per axis, and a direct
evaluation of K g for radial profiles used as the oracle against the
radial reduction.

The bilinear form is computed through phi = g / sqrt(mu).  Since
(d_j + v_j/2)(sqrt(mu) phi) = sqrt(mu) d_j phi exactly, the split
<L g1, g2> = <g1, g2>_sigma - <(d_i sigma^i) g1, g2> - <K g1, g2>
condenses (after the exact integration by parts that absorbs the
d_i sigma^i term) into

    <L g1, g2> = int sigma^{ij} mu d_i phi2 d_j phi1 dv
                 - iint B_ij mu mu* (d_i phi2)(v) (d_j phi1)(v*) dv* dv,

with every Maxwellian fused into the kernel.  On the collision
invariants phi is a polynomial of degree <= 2, which the centered
differences and the fine-lattice gradient lookups reproduce exactly, so
the discrete null space is clean at coarse resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .config import DEFAULT_CONFIG, DomainError, PlasmaConfig
from .frequency import FrequencyTable
from .kernel import WeightTable
from .radial import maxwellian

INV_TWO_PI_32 = (2.0 * math.pi) ** -1.5


@dataclass(frozen=True)
class Grid3D:
    """Uniform cube [-extent, extent]^3 with an odd number of nodes per axis
    (so the origin is a node)."""

    n: int = 15
    extent: float = 8.0
    axis: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 5 or self.n % 2 == 0:
            raise DomainError("n must be odd and >= 5")
        if self.extent <= 0.0:
            raise DomainError("extent must be positive")
        axis = np.linspace(-self.extent, self.extent, self.n)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "h", axis[1] - axis[0])

    def nodes(self) -> np.ndarray:
        """(n^3, 3) array of node coordinates."""
        X, Y, Z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    @property
    def cell_volume(self) -> float:
        return self.h ** 3


@dataclass
class GridFunction3D:
    grid: Grid3D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.grid.n
        if self.values.shape != (n, n, n):
            raise DomainError("values must be (n, n, n)")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("values must be finite")

    @classmethod
    def from_callable(cls, grid: Grid3D, func) -> "GridFunction3D":
        vals = func(grid.nodes()).reshape(grid.n, grid.n, grid.n)
        return cls(grid, vals)

    def inner(self, other: "GridFunction3D") -> float:
        return float(np.sum(self.values * other.values)) * self.grid.cell_volume

    def norm_l2(self) -> float:
        return math.sqrt(float(np.sum(self.values ** 2)) * self.grid.cell_volume)


def sqrt_mu_grid(grid: Grid3D) -> np.ndarray:
    n = grid.n
    return np.sqrt(maxwellian(grid.nodes())).reshape(n, n, n)


def null_basis_3d(grid: Grid3D) -> np.ndarray:
    """Columns: orthonormalized {1, v1, v2, v3, |v|^2} sqrt(mu) under the
    nodal inner product (modified Gram-Schmidt, exactly idempotent P)."""
    nodes = grid.nodes()
    sm = np.sqrt(maxwellian(nodes))
    raw = [sm, nodes[:, 0] * sm, nodes[:, 1] * sm, nodes[:, 2] * sm,
           np.sum(nodes * nodes, axis=1) * sm]
    vol = grid.cell_volume
    cols = []
    for b in raw:
        b = b.copy()
        for c in cols:
            b -= vol * float(c @ b) * c
        b /= math.sqrt(vol * float(b @ b))
        cols.append(b)
    return np.stack(cols, axis=1)


def project_P_3d(g: GridFunction3D) -> GridFunction3D:
    """Orthogonal projection onto span{sqrt(mu), v_i sqrt(mu), |v|^2 sqrt(mu)}."""
    E = null_basis_3d(g.grid)
    flat = g.values.ravel()
    coeff = g.grid.cell_volume * (E.T @ flat)
    return GridFunction3D(g.grid, (E @ coeff).reshape(g.values.shape))


def _grad(grid: Grid3D, f: np.ndarray) -> np.ndarray:
    """(3, n, n, n) gradient: centered interior, one-sided second order at
    the faces (exact through quadratics, so exact on the invariant phis)."""
    out = np.empty((3,) + f.shape)
    h = grid.h
    for ax in range(3):
        d = np.empty_like(f)
        fm = np.moveaxis(f, ax, 0)
        dm = np.moveaxis(d, ax, 0)
        dm[1:-1] = (fm[2:] - fm[:-2]) / (2.0 * h)
        dm[0] = (-3.0 * fm[0] + 4.0 * fm[1] - fm[2]) / (2.0 * h)
        dm[-1] = (3.0 * fm[-1] - 4.0 * fm[-2] + fm[-3]) / (2.0 * h)
        out[ax] = d
    return out


def norm_sigma_3d(g: GridFunction3D, freq: FrequencyTable,
                  params=None) -> float:
    """|g|_{sigma,theta}^2 by the definition: central differences plus
    nodal quadrature of sigma^{ij} (d_i g d_j g + (v_i/2)(v_j/2) g^2).

    Contracting with the eigen-decomposition, the gradient part is
    lambda_1 |P_v grad g|^2 + lambda_2 |(I - P_v) grad g|^2 and the zero
    order part is lambda_1 (r^2/4) g^2.
    """
    from .radial import weight_of_speed

    grid = g.grid
    nodes = grid.nodes()
    r = np.sqrt(np.sum(nodes * nodes, axis=1))
    l1, l2 = freq.lambda_pair_arrays(r)
    grads = _grad(grid, g.values).reshape(3, -1)
    grad2 = np.sum(grads * grads, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial_comp = np.where(r > 0.0, np.einsum("ij,ji->i", nodes, grads) / np.where(r > 0, r, 1.0), 0.0)
    aligned = radial_comp ** 2
    core = l1 * aligned + l2 * (grad2 - aligned) + l1 * 0.25 * r * r * g.values.ravel() ** 2
    w2 = weight_of_speed(params, r) ** 2 if params is not None else 1.0
    return float(np.sum(w2 * core)) * grid.cell_volume


class Operator3D:
    """Quadratic forms of the linearized operator on a small 3-D grid."""

    def __init__(self, cfg: PlasmaConfig = DEFAULT_CONFIG, grid: Grid3D | None = None,
                 freq: FrequencyTable | None = None, wtable: WeightTable | None = None,
                 n_u: int = 24, n_t: int = 16, n_phi: int = 32, u_max: float | None = None,
                 chunk: int = 128):
        self.cfg = cfg
        self.grid = grid or Grid3D()
        if self.grid.n > 17:
            raise DomainError("3-D forms support n <= 17 (desk-scale budget)")
        self.freq = freq or FrequencyTable(cfg)
        self.wtable = wtable or WeightTable(cfg)
        self.chunk = chunk
        # fused Maxwellians kill contributions before |u| reaches 2 r_max
        u_max = u_max or 2.0 * self.grid.extent
        gu_x, gu_w = np.polynomial.legendre.leggauss(n_u)
        u = 0.5 * u_max * (gu_x + 1.0)
        uw = 0.5 * u_max * gu_w
        gt_x, gt_w = np.polynomial.legendre.leggauss(n_t)
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        phw = 2.0 * math.pi / n_phi
        st = np.sqrt(1.0 - gt_x ** 2)
        dirs = np.empty((n_t, n_phi, 3))
        dirs[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
        dirs[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
        dirs[:, :, 2] = gt_x[:, None]
        dirs = dirs.reshape(-1, 3)
        ang_w = np.repeat(gt_w * phw, n_phi)
        self.u_dirs = np.repeat(dirs, len(u), axis=0)
        self.u_mag = np.tile(u, len(dirs))
        # u^2 du dOmega measure against the 1/u kernel factor leaves one power of u
        self.u_weight = np.repeat(ang_w, len(u)) * np.tile(uw * u, len(dirs))
        self._sm = sqrt_mu_grid(self.grid)

    _REFINE = 4

    def _phi_and_grad(self, g: GridFunction3D):
        """phi = g/sqrt(mu), its nodal gradient, and the gradient
        cubic-upsampled onto a 4x finer lattice for fast off-grid lookups
        (trilinear on the fine lattice carries near-tricubic accuracy and
        stays exact on the polynomial gradients of the invariants)."""
        phi = g.values / self._sm
        grad = _grad(self.grid, phi)
        n_fine = self._REFINE * (self.grid.n - 1) + 1
        axis_fine = np.arange(n_fine) / self._REFINE
        mesh = np.stack(np.meshgrid(axis_fine, axis_fine, axis_fine,
                                    indexing="ij")).reshape(3, -1)
        fine = np.empty((3, n_fine, n_fine, n_fine))
        for k in range(3):
            coeff = ndimage.spline_filter(grad[k], order=3, mode="nearest")
            fine[k] = ndimage.map_coordinates(coeff, mesh, order=3, prefilter=False,
                                              mode="nearest").reshape(n_fine, n_fine, n_fine)
        return phi, grad, fine

    def _interp_grad(self, fine, points):
        """Gradient components at arbitrary points; zero outside the box
        (the fused kernel has already decayed there)."""
        coords = (points - (-self.grid.extent)) * (self._REFINE / self.grid.h)
        out = np.empty((len(points), 3))
        for k in range(3):
            out[:, k] = ndimage.map_coordinates(fine[k], coords.T, order=1,
                                                mode="constant", cval=0.0)
        return out

    def quadratic_form_L(self, g1: GridFunction3D, g2: GridFunction3D) -> float:
        """<L g1, g2> by nested quadrature (outer nodal, inner spherical in
        u = v - v*); symmetric in (g1, g2) within quadrature tolerance."""
        return self.quadratic_forms([(g1, g2)])[0]

    def quadratic_forms(self, pairs) -> list[float]:
        """Batch evaluation of <L g1, g2> for several (g1, g2) pairs.

        The inner-quadrature geometry (parallel components, |v_R|, fused
        Gaussians, weight lookups) is independent of the arguments, so it
        is built once per node chunk and shared across the pairs.
        """
        grid = self.grid
        nodes = grid.nodes()
        r = np.sqrt(np.sum(nodes * nodes, axis=1))
        l1, l2 = self.freq.lambda_pair_arrays(r)
        mu = maxwellian(nodes)
        rr = np.where(r > 0.0, r, 1.0)

        prepared = []
        results = []
        for g1, g2 in pairs:
            _, grad1, coeffs1 = self._phi_and_grad(g1)
            _, grad2, _ = self._phi_and_grad(g2)
            a = np.stack([grad2[k].ravel() for k in range(3)], axis=1)
            c_nodal = np.stack([grad1[k].ravel() for k in range(3)], axis=1)
            dot = np.sum(a * c_nodal, axis=1)
            ar = np.sum(a * nodes, axis=1) / rr
            cr = np.sum(c_nodal * nodes, axis=1) / rr
            aligned = np.where(r > 0.0, ar * cr, 0.0)
            sigma_part = float(np.sum(mu * (l1 * aligned + l2 * (dot - aligned)))) * grid.cell_volume
            prepared.append((a, coeffs1))
            results.append(sigma_part)

        w_r = self.wtable.r_grid
        w1_tab, w2_tab = self.wtable.w1_scaled, self.wtable.w2_scaled
        U, umag, uw = self.u_dirs, self.u_mag, self.u_weight
        k_parts = [0.0] * len(prepared)
        for lo in range(0, len(nodes), self.chunk):
            hi = min(lo + self.chunk, len(nodes))
            V = nodes[lo:hi]
            vpar = V @ U.T                                   # (B, Q)
            vspar = vpar - umag[None, :]
            vr2 = np.maximum(np.sum(V * V, axis=1)[:, None] - vpar ** 2, 0.0)
            vr = np.sqrt(vr2)
            common = (2.0 * math.pi) ** -3 * np.exp(
                -0.5 * (vpar ** 2 + vspar ** 2) - 0.5 * vr2) * uw[None, :]
            w1s = np.interp(vr, w_r, w1_tab)
            w2s = np.interp(vr, w_r, w2_tab)
            VS = (V[:, None, :] - U[None, :, :] * umag[None, :, None]).reshape(-1, 3)
            degenerate = vr2 <= 1e-16
            inv_vr2 = np.where(degenerate, 0.0, 1.0 / np.where(degenerate, 1.0, vr2))
            # q = u_hat x p = u_hat x v, |q| = |p| = |v_R|
            uxv = np.cross(np.broadcast_to(U[None, :, :], (hi - lo,) + U.shape),
                           V[:, None, :])
            deg_idx = np.nonzero(degenerate)
            for m, (a, coeffs1) in enumerate(prepared):
                A = a[lo:hi]
                C = self._interp_grad(coeffs1, VS).reshape(vpar.shape + (3,))
                a_dot_u = A @ U.T
                c_dot_u = np.sum(C * U[None, :, :], axis=2)
                a_dot_v = np.sum(A * V, axis=1)[:, None]
                c_dot_v = np.sum(C * V[:, None, :], axis=2)
                a_dot_p = a_dot_v - vpar * a_dot_u        # a.p with p = v - vpar u_hat
                c_dot_p = c_dot_v - vpar * c_dot_u
                a_dot_q = np.sum(A[:, None, :] * uxv, axis=2)
                c_dot_q = np.sum(C * uxv, axis=2)
                sandwich = (w1s * a_dot_q * c_dot_q + w2s * a_dot_p * c_dot_p) * inv_vr2
                if deg_idx[0].size:
                    bi, qi = deg_idx
                    a_dot_c = np.sum(A[bi] * C[bi, qi], axis=1)
                    sandwich[bi, qi] = w1s[bi, qi] * (
                        a_dot_c - a_dot_u[bi, qi] * c_dot_u[bi, qi])
                k_parts[m] += float(np.sum(common * sandwich))
        return [results[m] - k_parts[m] * grid.cell_volume for m in range(len(prepared))]


def apply_K_oracle_3d(profile, dprofile, grid: Grid3D,
                      cfg: PlasmaConfig = DEFAULT_CONFIG,
                      wtable: WeightTable | None = None,
                      n_u: int = 32, n_t: int = 24, n_phi: int = 48,
                      u_max: float | None = None, delta: float = 1e-3) -> GridFunction3D:
    """Direct 3-D evaluation of K on a radial profile g(|v|); the oracle
    for the radial reduction.

    Writing h~ = sqrt(mu) h for the inner field,

        h~(v) = int B sqrt(mu mu*) vhat* s(|v*|) du,   s = g' + (rho/2) g,
        K g   = -sum_i (d_i h~_i - (v_i/2) h~_i),

    only the in-plane projection survives the contraction with vhat*, so
    B_scaled vhat* = p w2~(|v_R|)/(|u| r*) with p = v - (u_hat.v) u_hat;
    no frame construction or degenerate branch is needed.  The divergence
    is taken with a grid-free centered difference of step ``delta``
    applied to the quadrature itself (the u-nodes do not move with v, so
    the difference converges at delta^2 without grid resolution limits).
    The inner factor s is evaluated from the analytic profile, keeping
    the oracle independent of the radial path's interpolation, matrices
    and azimuthal reduction.
    """
    cfg_table = wtable or WeightTable(cfg)
    u_max = u_max or (grid.extent * math.sqrt(3.0) + 8.0)
    gu_x, gu_w = np.polynomial.legendre.leggauss(n_u)
    u = 0.5 * u_max * (gu_x + 1.0)
    uw = 0.5 * u_max * gu_w
    gt_x, gt_w = np.polynomial.legendre.leggauss(n_t)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    phw = 2.0 * math.pi / n_phi
    st = np.sqrt(1.0 - gt_x ** 2)
    dirs = np.empty((n_t, n_phi, 3))
    dirs[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
    dirs[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
    dirs[:, :, 2] = gt_x[:, None]
    dirs = dirs.reshape(-1, 3)
    ang_w = np.repeat(gt_w * phw, n_phi)
    U = np.repeat(dirs, n_u, axis=0)
    umag = np.tile(u, len(dirs))
    base_w = np.repeat(ang_w, n_u) * np.tile(uw * u, len(dirs))
    w_r, w2_tab = cfg_table.r_grid, cfg_table.w2_scaled

    def scalar_factor(v):
        """Common integrand factor base_w * w2~ * gauss * s(r*)/r* and vpar."""
        vpar = U @ v
        vspar = vpar - umag
        VS = v[None, :] - U * umag[:, None]
        rstar = np.sqrt(np.sum(VS * VS, axis=1))
        vr2 = max(float(v @ v), 0.0) - vpar ** 2
        vr = np.sqrt(np.maximum(vr2, 0.0))
        w2s = np.interp(vr, w_r, w2_tab)
        gauss = INV_TWO_PI_32 * np.exp(-0.25 * (vpar ** 2 + vspar ** 2))
        s = dprofile(rstar) + 0.5 * rstar * profile(rstar)
        return base_w * w2s * gauss * s / rstar, vpar

    def h_component(v, i):
        fac, vpar = scalar_factor(v)
        return float(np.sum(fac * (v[i] - vpar * U[:, i])))

    def h_vector(v):
        fac, vpar = scalar_factor(v)
        s0 = float(np.sum(fac))
        s1 = (fac * vpar) @ U
        return v * s0 - s1

    nodes = grid.nodes()
    out = np.empty(len(nodes))
    for k, v in enumerate(nodes):
        div = 0.0
        for i in range(3):
            e = np.zeros(3)
            e[i] = delta
            div += (h_component(v + e, i) - h_component(v - e, i)) / (2.0 * delta)
        ht = h_vector(v)
        out[k] = -(div - 0.5 * float(v @ ht))
    return GridFunction3D(grid, out.reshape(grid.n, grid.n, grid.n))
