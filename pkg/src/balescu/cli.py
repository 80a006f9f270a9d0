"""Command-line front end.

Subcommands: dispersion, jay, freq, kernel, evolve, verify.  Tables are
CSV (comma separated, header row, LF endings, UTF-8) or JSON arrays of
row objects with the same snake_case keys; all numbers carry 17
significant digits so cross-run diffs are meaningful.  Outputs are
deterministic for a fixed seed and configuration.

Option precedence: command-line flags > config file (flat key=value
lines, keys named like the flags) > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import kernel as kern
from . import verify
from .config import DomainError, PlasmaConfig
from .frequency import FrequencyTable
from .radial import (RadialFunction, RadialGrid, RadialOperator, WeightParams,
                     preset_profile)

DEFAULTS = {
    "k0": 1.0,
    "ell": 0.0,
    "theta": 1.0,
    "q": 0.5,
    "n": 81,
    "m": 160,
    "rmax": 8.0,
    "dt": None,
    "t_end": 5.0,
    "seed": 0,
    "format": "csv",
    "xmin": None,
    "xmax": None,
    "preset": "gaussian_bump",
    "lconst": math.pi,
}


def fmt(x) -> str:
    return f"{float(x) + 0.0:.17g}"   # +0.0 folds -0.0 into 0


def _write_table(path: Path, header: list[str], rows: list[list[float]], out_format: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    if out_format == "json":
        records = [{k: float(v) for k, v in zip(header, row)} for row in rows]
        text = json.dumps(records, indent=2, default=float) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"config line is not key=value: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _resolve(args: argparse.Namespace, key: str):
    """flags > config file > defaults."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    cfg_file = getattr(args, "_config_values", {})
    if key in cfg_file:
        raw = cfg_file[key]
        default = DEFAULTS.get(key)
        if isinstance(default, float) or key in ("dt", "xmin", "xmax"):
            return float(raw)
        if isinstance(default, int):
            return int(raw)
        return raw
    return DEFAULTS.get(key)


def _plasma_config(args) -> PlasmaConfig:
    return PlasmaConfig(k0=float(_resolve(args, "k0")))


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--k0", type=float, help="wavenumber cutoff (default 1.0)")
    parser.add_argument("--ell", type=float, help="weight polynomial exponent")
    parser.add_argument("--theta", type=float, help="weight stretching exponent in [0,2]")
    parser.add_argument("--q", type=float, help="weight Gaussian-strength parameter")
    parser.add_argument("--n", type=int, help="number of table points / nodes per axis")
    parser.add_argument("--m", type=int, help="radial cells (default 160)")
    parser.add_argument("--rmax", type=float, help="radial domain size (default 8)")
    parser.add_argument("--dt", type=float, help="time step (default: stability bound)")
    parser.add_argument("--t-end", dest="t_end", type=float, help="final time (default 5)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out", type=str, required=True, help="output path")
    parser.add_argument("--format", choices=("csv", "json"), help="table format")
    parser.add_argument("--config", type=str, help="flat key=value config file")


def cmd_dispersion(args) -> int:
    cfg = _plasma_config(args)
    n = int(_resolve(args, "n"))
    xmin = _resolve(args, "xmin")
    xmax = _resolve(args, "xmax")
    xmin = -10.0 if xmin is None else float(xmin)
    xmax = 10.0 if xmax is None else float(xmax)
    if n < 2 or not (xmax > xmin):
        raise DomainError("need n >= 2 and xmax > xmin")
    xs = np.linspace(xmin, xmax, n)
    rows = []
    for x in xs:
        p = disp.psi(float(x), cfg)
        e = disp.epsilon(1.0, float(x), cfg)
        rows.append([x, p.re, p.im, x * x * p.re, e.re, e.im])
    _write_table(Path(args.out), ["x", "psi_r", "psi_i", "x2_psi_r",
                                  "eps_re_at_k1", "eps_im_at_k1"],
                 rows, _resolve(args, "format"))
    return 0


def cmd_jay(args) -> int:
    cfg = _plasma_config(args)
    n = int(_resolve(args, "n"))
    xmin = _resolve(args, "xmin")
    xmax = _resolve(args, "xmax")
    xmin = 0.0 if xmin is None else float(xmin)
    xmax = 12.0 if xmax is None else float(xmax)
    if n < 2 or not (xmax > xmin) or max(abs(xmin), abs(xmax)) > kern.JAY_X_MAX:
        raise DomainError(f"need n >= 2, xmax > xmin and |x| <= {kern.JAY_X_MAX}")
    rows = []
    for x in np.linspace(xmin, xmax, n):
        j = kern.jay(float(x), cfg)
        js = kern.jay_scaled(float(x), cfg)
        jo = kern.jay_oracle(float(x), cfg)
        rows.append([x, j, js, jo, x ** 3 * js])
    _write_table(Path(args.out), ["x", "J", "J_scaled", "J_oracle", "ratio_x3e"],
                 rows, _resolve(args, "format"))
    return 0


def cmd_freq(args) -> int:
    cfg = _plasma_config(args)
    n = int(_resolve(args, "n"))
    rmax = float(_resolve(args, "rmax"))
    if n < 2 or rmax <= 0:
        raise DomainError("need n >= 2 and rmax > 0")
    ft = FrequencyTable(cfg)
    rs = np.linspace(0.0, rmax, n)
    l1, l2 = ft.lambda_pair_arrays(rs)
    rows = []
    for i, r in enumerate(rs):
        if r > 0.0:
            d1, d2 = ft.lambda_derivatives(float(r))
        else:
            d1 = d2 = 0.0   # both derivatives vanish at the origin by symmetry
        ratio_l1 = (1.0 + r ** 3) * l1[i] / math.log(2.0 + r)
        rows.append([r, l1[i], l2[i], d1, d2, ratio_l1, r * l2[i]])
    _write_table(Path(args.out), ["r", "lambda1", "lambda2", "dlambda1", "dlambda2",
                                  "ratio_l1", "r_lambda2"],
                 rows, _resolve(args, "format"))
    return 0


def cmd_kernel(args) -> int:
    cfg = _plasma_config(args)
    n = int(_resolve(args, "n"))
    if n < 1:
        raise DomainError("need n >= 1 sample rows")
    seed = int(_resolve(args, "seed"))
    lconst = float(_resolve(args, "lconst"))
    table = kern.WeightTable(cfg)
    rng = np.random.default_rng(seed)
    pairs = [(np.array([1.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]))]
    while len(pairs) < n:
        v = rng.uniform(-3.0, 3.0, 3)
        vs = rng.uniform(-3.0, 3.0, 3)
        if np.linalg.norm(v - vs) > 1e-3:
            pairs.append((v, vs))
    rows = []
    for v, vs in pairs:
        b = kern.kernel_B(v, vs, table).b
        ld = kern.landau_kernel(v, vs, lconst)
        rows.append(list(v) + list(vs)
                    + [b[0, 0], b[0, 1], b[0, 2], b[1, 1], b[1, 2], b[2, 2]]
                    + [ld[0, 0], ld[0, 1], ld[0, 2], ld[1, 1], ld[1, 2], ld[2, 2]])
    header = ["v1", "v2", "v3", "vs1", "vs2", "vs3",
              "b_11", "b_12", "b_13", "b_22", "b_23", "b_33",
              "landau_11", "landau_12", "landau_13", "landau_22", "landau_23", "landau_33"]
    _write_table(Path(args.out), header, rows, _resolve(args, "format"))
    return 0


def cmd_evolve(args) -> int:
    cfg = _plasma_config(args)
    params = WeightParams(ell=float(_resolve(args, "ell")),
                          theta=float(_resolve(args, "theta")),
                          q=float(_resolve(args, "q")))
    grid = RadialGrid(int(_resolve(args, "m")), float(_resolve(args, "rmax")))
    op = RadialOperator(cfg, grid)
    profile = preset_profile(str(_resolve(args, "preset")))
    f0 = RadialFunction(grid, op.Pi @ profile(grid.r))
    dt = _resolve(args, "dt")
    res = op.evolve(f0, params, dt=None if dt is None else float(dt),
                    t_end=float(_resolve(args, "t_end")))
    rows = [[res.times[k], res.mass[k], res.energy[k], res.l2[k],
             res.weighted[k], res.sigma_norm[k]] for k in range(len(res.times))]
    out = Path(args.out)
    _write_table(out, ["t", "mass", "energy", "l2", "weighted", "sigma_norm"],
                 rows, _resolve(args, "format"))
    summary = {
        "preset": str(_resolve(args, "preset")),
        "theta": params.theta,
        "ell": params.ell,
        "q": params.q,
        "dt": res.dt,
        "t_end": float(_resolve(args, "t_end")),
        # too-short runs yield no usable fit; emit null, not NaN
        "fitted_p": res.fitted_p if math.isfinite(res.fitted_p) else None,
        "fitted_rate": res.fitted_rate if math.isfinite(res.fitted_rate) else None,
        "p_theory": res.p_theory,
        "monotone_l2": res.monotone_l2,
        "monotone_weighted": res.monotone_weighted,
        "drift_mass_rel": res.drift_mass,
        "drift_energy_rel": res.drift_energy,
    }
    summary_path = out.with_suffix(".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2, default=float) + "\n",
                            encoding="utf-8", newline="\n")
    return 0


def cmd_verify(args) -> int:
    cfg = _plasma_config(args)
    reports = verify.run_all(cfg, seed=int(_resolve(args, "seed")))
    paths = verify.write_reports(reports, Path(args.out))
    n_fail = sum(1 for r in reports if not r.passed)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: achieved={fmt(r.achieved)} "
              f"target={fmt(r.target)} tol={fmt(r.tolerance)}")
    print(f"report: {paths['json']}  ({len(reports) - n_fail}/{len(reports)} passed)")
    return 1 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balescu",
        description="Linearized Balescu-Lenard numerics: dispersion function, "
                    "collision kernel, collision-frequency eigenvalues, operator "
                    "evolution and verification campaigns.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="table of Psi_R, Psi_I and epsilon")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("jay", help="table of J, its scaled form and the oracle")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_jay)

    p = sub.add_parser("freq", help="table of collision-frequency eigenvalues")
    _add_common(p)
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("kernel", help="sampled kernel matrices with Landau comparison")
    p.add_argument("--lconst", type=float, help="Landau comparison constant (default pi)")
    _add_common(p)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("evolve", help="time evolution of a preset perturbation")
    p.add_argument("--preset", choices=("gaussian_bump", "shell", "hermite_mode"))
    _add_common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("verify", help="run the verification campaign")
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config_values = _load_config_file(getattr(args, "config", None))
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
