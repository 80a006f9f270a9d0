import math

import numpy as np
import pytest

from balescu.config import DomainError
from balescu.grid3d import (Grid3D, GridFunction3D, Operator3D, apply_K_oracle_3d,
                            norm_sigma_3d, null_basis_3d, project_P_3d, sqrt_mu_grid)
from balescu.radial import RadialFunction, maxwellian, sqrt_mu_speed


@pytest.fixture(scope="module")
def grid():
    return Grid3D(15, 8.0)


@pytest.fixture(scope="module")
def op3(cfg, grid, freq, wtable):
    return Operator3D(cfg, grid, freq, wtable, chunk=256)


def _null_modes(grid):
    sm = sqrt_mu_grid(grid)
    nodes = grid.nodes()
    n = grid.n
    mass = GridFunction3D(grid, sm)
    mom = GridFunction3D(grid, nodes[:, 0].reshape(n, n, n) * sm)
    energy = GridFunction3D(grid, np.sum(nodes * nodes, axis=1).reshape(n, n, n) * sm)
    return mass, mom, energy


def _random_smooth(grid, rng):
    nodes = grid.nodes()
    out = np.zeros(len(nodes))
    for _ in range(3):
        c = rng.uniform(-2.5, 2.5, 3)
        w = rng.uniform(1.5, 2.5)
        out += rng.normal() * np.exp(-0.5 * np.sum((nodes - c) ** 2, axis=1) / w ** 2)
    vals = out * np.sqrt(maxwellian(nodes))
    return GridFunction3D(grid, vals.reshape(grid.n, grid.n, grid.n))


class TestGridAndProjection:
    def test_grid_validation(self):
        with pytest.raises(DomainError):
            Grid3D(14, 8.0)
        with pytest.raises(DomainError):
            Grid3D(15, -1.0)

    def test_null_basis_orthonormal(self, grid):
        E = null_basis_3d(grid)
        gram = grid.cell_volume * (E.T @ E)
        assert np.abs(gram - np.eye(5)).max() < 1e-12

    def test_projection_idempotent_and_parity(self, grid, rng):
        g = _random_smooth(grid, rng)
        p1 = project_P_3d(g)
        p2 = project_P_3d(p1)
        assert np.abs(p1.values - p2.values).max() < 1e-12
        # odd-in-v1 data has no mass/energy component
        nodes = grid.nodes()
        n = grid.n
        sm = sqrt_mu_grid(grid)
        odd = GridFunction3D(grid, (nodes[:, 0] ** 3).reshape(n, n, n) * sm)
        proj = project_P_3d(odd)
        E = null_basis_3d(grid)
        coeff = grid.cell_volume * (E.T @ proj.values.ravel())
        assert abs(coeff[0]) < 1e-12 and abs(coeff[4]) < 1e-12


class TestNormSigma3D:
    def test_zero_and_scaling(self, grid, freq, rng):
        zero = GridFunction3D(grid, np.zeros((grid.n,) * 3))
        assert norm_sigma_3d(zero, freq) == 0.0
        g = _random_smooth(grid, rng)
        base = norm_sigma_3d(g, freq)
        scaled = norm_sigma_3d(GridFunction3D(grid, 2.0 * g.values), freq)
        assert scaled == pytest.approx(4.0 * base, rel=1e-12)
        assert base >= 0.0

    def test_value_at_sqrt_mu(self, grid, freq):
        # literal definition: integrand 2 lambda1 (r^2/4) mu at sqrt(mu);
        # the h^2 error of the nodal central differences sits at ~14% for
        # h = 1.14 and shrinks under refinement
        def deviation(n):
            g = Grid3D(n, 8.0)
            sm = sqrt_mu_grid(g)
            val = norm_sigma_3d(GridFunction3D(g, sm), freq)
            nodes = g.nodes()
            r = np.sqrt(np.sum(nodes * nodes, axis=1))
            l1, _ = freq.lambda_pair_arrays(r)
            analytic = float(np.sum(0.5 * l1 * r * r * maxwellian(nodes))) * g.cell_volume
            return abs(val - analytic) / analytic

        d15 = deviation(15)
        assert d15 < 0.2
        assert deviation(27) < 0.6 * d15


class TestQuadraticForm:
    def test_null_space_and_symmetry(self, op3, grid, freq, rng):
        mass, mom, energy = _null_modes(grid)
        ga = _random_smooth(grid, rng)
        gb = _random_smooth(grid, rng)
        vals = op3.quadratic_forms([
            (mass, mass), (mom, mom), (energy, energy),
            (ga, gb), (gb, ga), (ga, ga)])
        scale = math.sqrt(norm_sigma_3d(ga, freq)) * math.sqrt(norm_sigma_3d(gb, freq))
        assert abs(vals[0]) < 1e-3
        assert abs(vals[1]) < 1e-3
        assert abs(vals[2]) < 1e-3
        assert abs(vals[3] - vals[4]) < 1e-3 * scale
        assert vals[5] > 0.0

    def test_budget_guard(self, cfg, freq, wtable):
        with pytest.raises(DomainError):
            Operator3D(cfg, Grid3D(19, 8.0), freq, wtable)


class TestKOracle3D:
    @pytest.mark.slow
    def test_energy_mode_against_sigma_identity(self, cfg, freq, wtable):
        # h = 2 lambda1 r vhat for the energy mode, so
        # K = -sqrt(mu)(6 l1 + 2 r l1' - 2 r^2 l1) exactly
        grid = Grid3D(9, 4.0)
        prof = lambda r: np.asarray(r) ** 2 * sqrt_mu_speed(r)
        dprof = lambda r: (2.0 * np.asarray(r) - 0.5 * np.asarray(r) ** 3) * sqrt_mu_speed(r)
        got = apply_K_oracle_3d(prof, dprof, grid, cfg, wtable)
        nodes = grid.nodes()
        r = np.sqrt(np.sum(nodes * nodes, axis=1))
        l1, _ = freq.lambda_pair_arrays(r)
        d1 = np.zeros_like(r)
        pos = r > 0
        d1[pos], _ = freq.lambda_derivatives_arrays(r[pos])
        truth = -sqrt_mu_speed(r) * (6.0 * l1 + 2.0 * r * d1 - 2.0 * r ** 2 * l1)
        rel = np.linalg.norm(got.values.ravel() - truth) / np.linalg.norm(truth)
        assert rel < 1e-4

    @pytest.mark.slow
    def test_radial_vs_3d_on_gaussian_bump(self, cfg, freq, wtable, radial_op):
        from scipy.interpolate import CubicSpline

        grid = Grid3D(15, 4.5)
        prof = lambda r: np.exp(-0.5 * ((np.asarray(r) - 1.8) / 0.8) ** 2)
        dprof = lambda r: -(np.asarray(r) - 1.8) / 0.64 * prof(r)
        oracle = apply_K_oracle_3d(prof, dprof, grid, cfg, wtable)
        fr = RadialFunction.from_profile(radial_op.grid, prof)
        kr = radial_op.apply_K(fr)
        rgrid = radial_op.grid.r
        spline = CubicSpline(np.concatenate([[-rgrid[0]], rgrid]),
                             np.concatenate([[kr.values[0]], kr.values]))
        r_nodes = np.sqrt(np.sum(grid.nodes() ** 2, axis=1))
        radial_at_nodes = spline(r_nodes)
        rel = (np.linalg.norm(oracle.values.ravel() - radial_at_nodes)
               / np.linalg.norm(radial_at_nodes))
        assert rel < 2e-2
