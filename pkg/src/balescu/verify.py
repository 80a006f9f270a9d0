r"""Cross-check campaigns binding closed forms to oracles and asymptotic
limits to numeric checks.

Every check's target and tolerance lives in one manifest so the CLI, the
tests and the docs cite identical numbers.  Reports are emitted as JSON
and CSV with the exact field names name, target, achieved, tolerance,
pass, runtime_s.

One-sided constraints (positivity, refinement ratios) are encoded as a
violation: achieved is the amount by which the constraint is broken and
the target is zero, so the pass rule |achieved - target| <= tolerance is
uniform across all checks.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, PlasmaConfig
from . import dispersion
from . import kernel as kern
from .frequency import FrequencyTable, sigma_k_oracle, SQRT_8PI, R_SMALL, SQRT_PI_2, SQRT_PI_8
from .radial import (RadialGrid, RadialFunction, RadialOperator, WeightParams,
                     l2_inner, preset_profile)

TWO_LN2_MINUS_1 = 2.0 * math.log(2.0) - 1.0
LAMBDA0_K0_1 = math.sqrt(math.pi / 2.0) * TWO_LN2_MINUS_1 / 3.0
KERNEL_POINT_C = math.pi * TWO_LN2_MINUS_1 / 8.0
SQRT8PI_LN2 = SQRT_8PI * math.log(2.0)

#: single source of truth for targets/tolerances (mode: abs | rel | violation)
MANIFEST = {
    "checks": {
        "parity_max_dev":          {"target": 0.0, "tolerance": 1e-14, "mode": "abs"},
        "pv_oracle_max_dev":       {"target": 0.0, "tolerance": 1e-8, "mode": "abs"},
        "pv_oracle_at_1":          {"target": 0.0, "tolerance": 1e-7, "mode": "abs"},
        "x2_psi_r_at_20":          {"target": -1.0, "tolerance": 1e-2, "mode": "rel"},
        "x2_psi_r_envelope":       {"target": 0.0, "tolerance": 1e-15, "mode": "violation"},
        "epsilon_nonvanishing":    {"target": 0.0, "tolerance": 1e-15, "mode": "violation"},
        "jay_vs_oracle_max_rel":   {"target": 0.0, "tolerance": 1e-7, "mode": "abs"},
        "jay_at_zero":             {"target": TWO_LN2_MINUS_1, "tolerance": 1e-8, "mode": "abs"},
        "jay_asymptote_x12":       {"target": SQRT_8PI, "tolerance": 2e-2, "mode": "rel"},
        "jay_scaled_consistency":  {"target": 0.0, "tolerance": 1e-12, "mode": "abs"},
        "jay_parity_max_dev":      {"target": 0.0, "tolerance": 1e-15, "mode": "abs"},
        "weights_tabulation_rel":  {"target": 0.0, "tolerance": 1e-6, "mode": "abs"},
        "kernel_point_value":      {"target": KERNEL_POINT_C, "tolerance": 1e-6, "mode": "abs"},
        "kernel_psd_violation":    {"target": 0.0, "tolerance": 1e-12, "mode": "violation"},
        "kernel_null_max":         {"target": 0.0, "tolerance": 1e-12, "mode": "abs"},
        "kernel_swap_symmetry":    {"target": 0.0, "tolerance": 1e-12, "mode": "abs"},
        "xi_sum_frobenius":        {"target": 0.0, "tolerance": 1e-12, "mode": "abs"},
        "kernel_envelope_cdelta":  {"target": 0.0, "tolerance": 100.0, "mode": "abs"},
        "lambda0_equal_rel":       {"target": 0.0, "tolerance": 1e-8, "mode": "abs"},
        "lambda0_value":           {"target": LAMBDA0_K0_1, "tolerance": 1e-8, "mode": "abs"},
        "lambda_positivity":       {"target": 0.0, "tolerance": 1e-15, "mode": "violation"},
        "lambda_switch_continuity": {"target": 0.0, "tolerance": 1e-9, "mode": "abs"},
        "differenced_i2":          {"target": SQRT8PI_LN2, "tolerance": 1e-2, "mode": "rel"},
        # target computed at run time (the once-computed quadrature constant)
        "r_lambda2_tail":          {"target": None, "tolerance": 1e-2, "mode": "rel"},
        "dlambda_fd_ratio":        {"target": 0.0, "tolerance": 1.0, "mode": "abs"},
        "sigma_oracle_frobenius":  {"target": 0.0, "tolerance": 1e-3, "mode": "abs"},
        "sigma_oracle_at_zero":    {"target": 0.0, "tolerance": 1e-3, "mode": "abs"},
        "null_residual_mass":      {"target": 0.0, "tolerance": 5e-4, "mode": "abs"},
        "null_residual_energy":    {"target": 0.0, "tolerance": 5e-4, "mode": "abs"},
        "refinement_violation":    {"target": 0.0, "tolerance": 1e-12, "mode": "violation"},
        "a_symmetry_rel":          {"target": 0.0, "tolerance": 1e-10, "mode": "abs"},
        "positivity_violation":    {"target": 0.0, "tolerance": 1e-15, "mode": "violation"},
        "coercivity_violation":    {"target": 0.0, "tolerance": 1e-15, "mode": "violation"},
        "evolve_monotone_steps":   {"target": 0.0, "tolerance": 0.0, "mode": "abs"},
        "evolve_drift_max":        {"target": 0.0, "tolerance": 1e-6, "mode": "abs"},
        "fitted_p_theta1":         {"target": 0.5, "tolerance": 1.0, "mode": "abs"},
        "fitted_p_theta2":         {"target": 2.0 / 3.0, "tolerance": 1.0, "mode": "abs"},
    },
    "constants": {
        "sqrt_8pi": SQRT_8PI,
        "two_pi": 2.0 * math.pi,
        "sqrt8pi_ln2": SQRT8PI_LN2,
        "j0_at_k0_1": TWO_LN2_MINUS_1,
        "lambda0_at_k0_1": LAMBDA0_K0_1,
        "kernel_point_c": KERNEL_POINT_C,
        "p_theory": {"1": 0.5, "2": 2.0 / 3.0},
    },
    "notes": {
        "fitted_p_theta1": "report-only: decay-rate constants are non-constructive",
        "fitted_p_theta2": "report-only: decay-rate constants are non-constructive",
        "kernel_envelope_cdelta": "fitted envelope constant, bounded-report check",
        "jay_asymptote_x12": "the exact value of x^3 e^{-x^2/2} J at x=12 sits 2.16% from "
                             "sqrt(8pi) (correction factor 1 + 3/x^2 + ...), outside the "
                             "stated 2% tolerance; kept as stated and expected to fail",
    },
}


@dataclass
class CheckReport:
    name: str
    target: float
    achieved: float
    tolerance: float
    passed: bool
    runtime: float

    def as_dict(self):
        return {"name": self.name, "target": self.target, "achieved": self.achieved,
                "tolerance": self.tolerance, "pass": self.passed,
                "runtime_s": self.runtime}


class _Timer:
    def __init__(self):
        self.t0 = time.perf_counter()

    def lap(self) -> float:
        now = time.perf_counter()
        dt = now - self.t0
        self.t0 = now
        return dt


def _mk(name: str, achieved: float, runtime: float, target: float | None = None) -> CheckReport:
    spec = MANIFEST["checks"][name]
    tgt = spec["target"] if target is None else target
    tol, mode = spec["tolerance"], spec["mode"]
    if mode == "rel":
        ok = abs(achieved - tgt) <= tol * abs(tgt)
    else:  # abs and violation share the absolute rule (violation targets 0)
        ok = abs(achieved - tgt) <= tol
    return CheckReport(name=name, target=tgt, achieved=float(achieved),
                       tolerance=tol, passed=bool(ok), runtime=runtime)


# ---------------------------------------------------------------------------
# campaigns
# ---------------------------------------------------------------------------

def check_dispersion(cfg: PlasmaConfig = DEFAULT_CONFIG, seed: int = 0) -> list[CheckReport]:
    out = []
    rng = np.random.default_rng(seed)
    tm = _Timer()

    xs = rng.uniform(-10.0, 10.0, 200)
    rp, ip = dispersion.psi_arrays(xs, cfg)
    rm, im = dispersion.psi_arrays(-xs, cfg)
    dev = max(np.max(np.abs(rp - rm)), np.max(np.abs(ip + im)))
    out.append(_mk("parity_max_dev", float(dev), tm.lap()))

    worst = 0.0
    for x in np.linspace(-8.0, 8.0, 50):
        a = dispersion.psi_r_pv_oracle(float(x), cfg)
        b = dispersion.psi(float(x), cfg).re
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    out.append(_mk("pv_oracle_max_dev", worst, tm.lap()))

    a = dispersion.psi_r_pv_oracle(1.0, cfg)
    b = dispersion.psi(1.0, cfg).re
    out.append(_mk("pv_oracle_at_1", abs(a - b), tm.lap()))

    out.append(_mk("x2_psi_r_at_20", 400.0 * dispersion.psi(20.0, cfg).re, tm.lap()))

    # true correction is -3/x^2 + O(x^-4); 4/x^2 envelopes it for x >= 10
    violation = 0.0
    for x in (10.0, 15.0, 20.0):
        dev = abs(x * x * dispersion.psi(x, cfg).re + 1.0)
        violation = max(violation, dev - 4.0 / (x * x))
    out.append(_mk("x2_psi_r_envelope", max(0.0, violation), tm.lap()))

    kmag = rng.uniform(0.01, 10.0, 10_000)
    xv = rng.uniform(-20.0, 20.0, 10_000)
    re, imv = dispersion.psi_arrays(xv, cfg)
    er = 1.0 + re / kmag ** 2
    ei = imv / kmag ** 2
    mod = np.hypot(er, ei)
    violation = 0.0 if np.all(mod > 0.0) else 1.0
    near = np.abs(er) < 1e-6
    if near.any() and not np.all(np.abs(ei[near]) > 0.0):
        violation = 1.0
    out.append(_mk("epsilon_nonvanishing", violation, tm.lap()))
    return out


def check_kernel(cfg: PlasmaConfig = DEFAULT_CONFIG, seed: int = 0,
                 wtable: kern.WeightTable | None = None) -> list[CheckReport]:
    out = []
    rng = np.random.default_rng(seed)
    table = wtable or kern.WeightTable(cfg)
    tm = _Timer()

    worst = 0.0
    for x in np.linspace(0.0, 12.0, 60):
        a = kern.jay(float(x), cfg)
        b = kern.jay_oracle(float(x), cfg)
        worst = max(worst, abs(a - b) / abs(b))
    out.append(_mk("jay_vs_oracle_max_rel", worst, tm.lap()))

    out.append(_mk("jay_at_zero", kern.jay(0.0, cfg), tm.lap()))
    out.append(_mk("jay_asymptote_x12",
                   12.0 ** 3 * math.exp(-72.0) * kern.jay(12.0, cfg), tm.lap()))

    xs = rng.uniform(-24.0, 24.0, 64)
    rel = np.abs(kern.jay_scaled(xs, cfg) * np.exp(0.5 * xs ** 2) / kern.jay(xs, cfg) - 1.0)
    out.append(_mk("jay_scaled_consistency", float(rel.max()), tm.lap()))

    xs = rng.uniform(0.0, 20.0, 100)
    dev = np.abs(kern.jay_scaled(-xs, cfg) - kern.jay_scaled(xs, cfg))
    out.append(_mk("jay_parity_max_dev", float(dev.max()), tm.lap()))

    worst = 0.0
    for r in rng.uniform(0.0, 14.0, 25):
        a1, a2 = table.w_scaled(float(r))
        b1, b2 = kern.weights_scaled_quadrature(float(r), cfg, order=table.order)
        worst = max(worst, abs(a1 - b1) / b1, abs(a2 - b2) / b2)
    out.append(_mk("weights_tabulation_rel", worst, tm.lap()))

    km = kern.kernel_B(np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]), table)
    dev = max(abs(km.b[1, 1] - KERNEL_POINT_C), abs(km.b[2, 2] - KERNEL_POINT_C),
              abs(km.b[0, 0]), float(np.abs(km.b - np.diag(np.diag(km.b))).max()))
    out.append(_mk("kernel_point_value", KERNEL_POINT_C + dev, tm.lap()))

    psd_v = null_v = swap_v = xi_v = env = 0.0
    eye = np.eye(3)
    for _ in range(1000):
        v = rng.normal(0.0, 2.0, 3)
        vs = rng.normal(0.0, 2.0, 3)
        if np.linalg.norm(v - vs) < 1e-8:
            continue
        km = kern.kernel_B(v, vs, table)
        u = v - vs
        un = float(np.linalg.norm(u))
        psd_v = max(psd_v, -float(np.linalg.eigvalsh(km.b_scaled).min()))
        null_v = max(null_v, float(np.abs(km.b_scaled @ u).max()) / un)
        km_swap = kern.kernel_B(vs, v, table)
        scale = max(1.0, float(np.abs(km.b_scaled).max()))
        swap_v = max(swap_v, float(np.abs(km.b_scaled - km_swap.b_scaled).max()) / scale)
        fr = km.frame
        xi = kern.xi_matrices(fr, v)
        if not xi.degenerate:
            proj = eye - np.outer(fr.u_hat, fr.u_hat)
            xi_v = max(xi_v, float(np.linalg.norm(xi.xi1 + xi.xi2 - proj)))
        env = max(env, float(np.abs(km.b_scaled).max()) * un * (1.0 + fr.v_R_mag) ** 3.75)
    sweep_t = tm.lap()
    out.append(_mk("kernel_psd_violation", max(0.0, psd_v), sweep_t))
    out.append(_mk("kernel_null_max", null_v, 0.0))
    out.append(_mk("kernel_swap_symmetry", swap_v, 0.0))
    out.append(_mk("xi_sum_frobenius", xi_v, 0.0))
    out.append(_mk("kernel_envelope_cdelta", env, 0.0))
    return out


def check_frequency(cfg: PlasmaConfig = DEFAULT_CONFIG,
                    freq: FrequencyTable | None = None) -> list[CheckReport]:
    out = []
    ft = freq or FrequencyTable(cfg)
    tm = _Timer()

    pair0 = ft.lambda_pair(0.0)
    out.append(_mk("lambda0_equal_rel",
                   abs(pair0.lambda1 - pair0.lambda2) / pair0.lambda1, tm.lap()))
    out.append(_mk("lambda0_value", pair0.lambda1, tm.lap()))

    rs = np.linspace(0.0, 30.0, 200)
    l1, l2 = ft.lambda_pair_arrays(rs)
    lo = float(min(l1.min(), l2.min()))
    out.append(_mk("lambda_positivity", max(0.0, -lo) + (1.0 if lo <= 0 else 0.0), tm.lap()))

    # branch continuity at the actual switch radius
    l1s, l2s = ft._lambda_small(np.array([R_SMALL]))
    l1t = SQRT_PI_2 * float(ft._i2(R_SMALL)) / R_SMALL ** 3
    l2t = SQRT_PI_8 * (float(ft._i0(R_SMALL)) - float(ft._i2(R_SMALL)) / R_SMALL ** 2) / R_SMALL
    mismatch = max(abs(l1t / l1s[0] - 1.0), abs(l2t / l2s[0] - 1.0))
    out.append(_mk("lambda_switch_continuity", mismatch, tm.lap()))

    out.append(_mk("differenced_i2", float(ft.I2(30.0) - ft.I2(15.0)), tm.lap()))

    tail = 100.0 * ft.lambda_pair(100.0).lambda2
    out.append(_mk("r_lambda2_tail", tail, tm.lap(), target=ft.lambda2_tail_constant))

    worst = 0.0
    h = 1e-5
    for r in (0.5, 2.0, 8.0):
        d1, d2 = ft.lambda_derivatives(r)
        f1 = (ft.lambda_pair(r + h).lambda1 - ft.lambda_pair(r - h).lambda1) / (2 * h)
        f2 = (ft.lambda_pair(r + h).lambda2 - ft.lambda_pair(r - h).lambda2) / (2 * h)
        worst = max(worst,
                    abs(d1 - f1) / max(1e-6, 1e-4 * abs(d1)),
                    abs(d2 - f2) / max(1e-6, 1e-4 * abs(d2)))
    out.append(_mk("dlambda_fd_ratio", worst, tm.lap()))

    s0 = sigma_k_oracle(np.zeros(3), cfg)
    out.append(_mk("sigma_oracle_at_zero",
                   float(np.linalg.norm(s0 - pair0.lambda1 * np.eye(3)))
                   / (pair0.lambda1 * math.sqrt(3.0)), tm.lap()))

    worst = 0.0
    for v in (np.array([1.0, 0, 0]), np.array([0.0, 2, 1]), np.array([3.0, 3, 0])):
        so = sigma_k_oracle(v, cfg)
        sm = ft.sigma_matrix(v)
        worst = max(worst, float(np.linalg.norm(so - sm) / np.linalg.norm(sm)))
    out.append(_mk("sigma_oracle_frobenius", worst, tm.lap()))
    return out


def check_operator(cfg: PlasmaConfig = DEFAULT_CONFIG, seed: int = 0,
                   op: RadialOperator | None = None,
                   op_fine: RadialOperator | None = None) -> list[CheckReport]:
    out = []
    rng = np.random.default_rng(seed)
    tm = _Timer()
    op = op or RadialOperator(cfg)
    res_mass = op.null_residual("mass")
    res_energy = op.null_residual("energy")
    out.append(_mk("null_residual_mass", res_mass, tm.lap()))
    out.append(_mk("null_residual_energy", res_energy, tm.lap()))

    op_fine = op_fine or RadialOperator(cfg, RadialGrid(2 * op.grid.M, op.grid.r_max),
                                        op.freq, op.wtable)
    ratio = min(res_mass / op_fine.null_residual("mass"),
                res_energy / op_fine.null_residual("energy"))
    out.append(_mk("refinement_violation", max(0.0, 2.0 - ratio), tm.lap()))

    x = rng.normal(size=op.grid.M)
    y = rng.normal(size=op.grid.M)
    s1 = l2_inner(op.grid, op.A @ x, y)
    s2 = l2_inner(op.grid, x, op.A @ y)
    out.append(_mk("a_symmetry_rel", abs(s1 - s2) / max(abs(s1), 1e-30), tm.lap()))

    worst = np.inf
    g = op.grid
    for _ in range(100):
        vals = np.zeros(g.M)
        for _ in range(3):
            vals += rng.normal() * np.exp(
                -0.5 * ((g.r - rng.uniform(0.3, 6.0)) / rng.uniform(0.4, 1.5)) ** 2)
        q = l2_inner(g, op.L @ vals, vals)
        den = op.norm_sigma(RadialFunction(g, vals))
        worst = min(worst, q / den)
    out.append(_mk("positivity_violation", max(0.0, -(worst + 1e-6)), tm.lap()))

    rep = op.coercivity_probe(50, seed=seed + 1)
    out.append(_mk("coercivity_violation", max(0.0, -rep.minimum), tm.lap()))

    f0 = RadialFunction(g, op.Pi @ preset_profile("gaussian_bump")(g.r))
    bad_steps = 0
    drift = 0.0
    fitted = {}
    for theta in (1.0, 2.0):
        res = op.evolve(f0, WeightParams(ell=0.0, theta=theta, q=0.5), t_end=5.0)
        slack = 1e-13 * max(res.l2[0], 1.0)
        bad_steps += int(np.sum(np.diff(res.l2) > slack))
        drift = max(drift, res.drift_mass, res.drift_energy)
        fitted[theta] = res.fitted_p
    evolve_t = tm.lap()
    out.append(_mk("evolve_monotone_steps", float(bad_steps), evolve_t))
    out.append(_mk("evolve_drift_max", drift, 0.0))
    out.append(_mk("fitted_p_theta1", fitted[1.0], 0.0))
    out.append(_mk("fitted_p_theta2", fitted[2.0], 0.0))
    return out


def run_all(cfg: PlasmaConfig = DEFAULT_CONFIG, seed: int = 0) -> list[CheckReport]:
    """The full campaign; deterministic for a fixed seed, merged by name order."""
    wtable = kern.WeightTable(cfg)
    freq = FrequencyTable(cfg)
    reports = []
    reports += check_dispersion(cfg, seed)
    reports += check_kernel(cfg, seed, wtable=wtable)
    reports += check_frequency(cfg, freq=freq)
    op = RadialOperator(cfg, freq=freq, wtable=wtable)
    op_fine = RadialOperator(cfg, RadialGrid(2 * op.grid.M, op.grid.r_max), freq, wtable)
    reports += check_operator(cfg, seed, op=op, op_fine=op_fine)
    return reports


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    return f"{float(x) + 0.0:.17g}"   # +0.0 folds -0.0 into 0


def reports_to_json(reports: list[CheckReport]) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2) + "\n"


def reports_to_csv(reports: list[CheckReport]) -> str:
    lines = ["name,target,achieved,tolerance,pass,runtime_s"]
    for r in reports:
        lines.append(",".join([
            r.name, format_float(r.target), format_float(r.achieved),
            format_float(r.tolerance), "true" if r.passed else "false",
            format_float(r.runtime)]))
    return "\n".join(lines) + "\n"


def manifest_to_json() -> str:
    return json.dumps(MANIFEST, indent=2) + "\n"


def write_reports(reports: list[CheckReport], directory) -> dict:
    """Write report.json, report.csv and verify_manifest.json; returns paths."""
    import pathlib

    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": directory / "report.json",
        "csv": directory / "report.csv",
        "manifest": directory / "verify_manifest.json",
    }
    paths["json"].write_text(reports_to_json(reports), encoding="utf-8", newline="\n")
    paths["csv"].write_text(reports_to_csv(reports), encoding="utf-8", newline="\n")
    paths["manifest"].write_text(manifest_to_json(), encoding="utf-8", newline="\n")
    return paths
