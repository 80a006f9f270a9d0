"""Render the paper-style figures from the balescu CLI's CSV tables.

This package does none of the math itself: it consumes the exact CSV
schemas the CLI emits, plus the verify manifest JSON for every reference
constant that appears as an overlay (sqrt(8 pi), 2 pi, theta/(theta+1)),
so no constant is hard-coded twice.

Invoked as ``balescu-plots --in TABLE.csv [SUMMARY.json] --kind KIND
--out FIG.png --manifest verify_manifest.json``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCHEMAS = {
    "dispersion": ["x", "psi_r", "psi_i", "x2_psi_r", "eps_re_at_k1", "eps_im_at_k1"],
    "jay": ["x", "J", "J_scaled", "J_oracle", "ratio_x3e"],
    "freq": ["r", "lambda1", "lambda2", "dlambda1", "dlambda2", "ratio_l1", "r_lambda2"],
    "kernel": ["v1", "v2", "v3", "vs1", "vs2", "vs3",
               "b_11", "b_12", "b_13", "b_22", "b_23", "b_33",
               "landau_11", "landau_12", "landau_13", "landau_22", "landau_23",
               "landau_33"],
    "decay": ["t", "mass", "energy", "l2", "weighted", "sigma_norm"],
}

# PNG metadata is stripped so re-renders are byte-stable
_SAVE_KW = {"dpi": 110, "metadata": {"Software": None}}


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    inputs: list
    kind: str
    out: str
    manifest: str
    logx: bool = False
    logy: bool = False
    extra: dict = field(default_factory=dict)


def load_table(path, kind: str) -> dict:
    """Parse a CLI CSV, enforcing the exact column schema."""
    expected = SCHEMAS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != expected:
            unknown = [c for c in header if c not in expected]
            missing = [c for c in expected if c not in header]
            parts = []
            if unknown:
                parts.append(f"unknown column(s) {unknown}")
            if missing:
                parts.append(f"missing column(s) {missing}")
            if not parts:
                parts.append(f"column order {header} != {expected}")
            raise SchemaError(f"{path}: schema mismatch for kind '{kind}': "
                              + "; ".join(parts))
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(expected)}


def load_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if "constants" not in manifest:
        raise SchemaError(f"{path}: not a verify manifest (no 'constants')")
    return manifest


def _axes_scale(ax, spec: FigureSpec):
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")


def _render_dispersion(spec, table, constants):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(table["x"], table["psi_r"], label="Psi_R")
    ax1.plot(table["x"], table["psi_i"], label="Psi_I")
    ax1.set_xlabel("x")
    ax1.legend()
    ax1.set_title("dispersion function at Maxwellian")
    ax2.plot(table["x"], table["x2_psi_r"], label="x^2 Psi_R")
    ax2.axhline(-1.0, color="k", ls="--", lw=0.8, label="limit -1")
    ax2.set_xlabel("x")
    ax2.legend()
    _axes_scale(ax1, spec)
    return fig, {"limit": -1.0}


def _render_jay(spec, table, constants):
    ref = constants["sqrt_8pi"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.semilogy(table["x"], table["J"], label="closed form")
    ax1.semilogy(table["x"], table["J_oracle"], ":", label="quadrature oracle")
    ax1.set_xlabel("x")
    ax1.set_ylabel("J(x)")
    ax1.legend()
    ax2.plot(table["x"], table["ratio_x3e"], label="x^3 e^{-x^2/2} J")
    ax2.axhline(ref, color="k", ls="--", lw=0.8,
                label=f"sqrt(8 pi) = {ref:.4f}")
    ax2.set_xlabel("x")
    ax2.legend()
    return fig, {"sqrt_8pi": ref}


def _render_freq(spec, table, constants):
    two_pi = constants["two_pi"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    r = table["r"]
    ax1.plot(r, table["lambda1"], label="lambda1")
    ax1.plot(r, table["lambda2"], label="lambda2")
    pos = r > 0
    ax1.plot(r[pos], two_pi * np.log(2.0 + r[pos]) / (1.0 + r[pos] ** 3), "--",
             lw=0.8, label="2 pi log(2+r)/(1+r^3)")
    ax1.set_yscale("log")
    ax1.set_xlabel("r")
    ax1.legend(fontsize=8)
    ax2.plot(r, table["r_lambda2"], label="r lambda2")
    ax2.plot(r, table["ratio_l1"], label="(1+r^3) lambda1 / log(2+r)")
    ax2.set_xlabel("r")
    ax2.legend(fontsize=8)
    _axes_scale(ax1, spec)
    return fig, {"two_pi": two_pi}


def _render_kernel(spec, table, constants):
    # plotting-level arithmetic only: separations from the coordinates
    v = np.stack([table["v1"], table["v2"], table["v3"]], axis=1)
    vs = np.stack([table["vs1"], table["vs2"], table["vs3"]], axis=1)
    u = np.linalg.norm(v - vs, axis=1)
    upar = np.einsum("ij,ij->i", v - vs, v) / u
    v_r = np.sqrt(np.maximum(np.einsum("ij,ij->i", v, v) - upar ** 2, 0.0))
    b_max = np.max(np.abs(np.stack([table[f"b_{i}{j}"]
                                    for i, j in ("11", "12", "13", "22", "23", "33")])),
                   axis=0)
    l_max = np.max(np.abs(np.stack([table[f"landau_{i}{j}"]
                                    for i, j in ("11", "12", "13", "22", "23", "33")])),
                   axis=0)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.semilogy(v_r, b_max * u, "o", ms=3, label="max |B_ij| |u|")
    ax1.semilogy(v_r, l_max * u, "x", ms=3, label="max |Landau_ij| |u|")
    order = np.argsort(v_r)
    envelope = np.exp(0.5 * v_r ** 2) / (1.0 + v_r) ** 3.75
    scale = np.median((b_max * u) / envelope)
    ax1.semilogy(v_r[order], scale * envelope[order], "--", lw=0.8,
                 label="C e^{v_R^2/2} (1+v_R)^{-3.75}")
    ax1.set_xlabel("|v_R|")
    ax1.legend(fontsize=8)
    ax2.semilogy(u, b_max, "o", ms=3, label="max |B_ij|")
    ax2.semilogy(u, l_max, "x", ms=3, label="max |Landau_ij|")
    ax2.set_xlabel("|v - v*|")
    ax2.legend(fontsize=8)
    return fig, {"envelope_exponent": 3.75}


def _render_decay(spec, table, constants):
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.semilogy(table["t"], table["l2"], label="|f|_0")
    ax.semilogy(table["t"], table["weighted"], ":", label="|f|_theta")
    overlays = {}
    summary = spec.extra.get("summary")
    if summary:
        p = summary.get("fitted_p")
        rate = summary.get("fitted_rate")
        theta = summary.get("theta")
        if p is not None and rate is not None and np.isfinite(p):
            t = table["t"]
            model = table["l2"][0] * np.exp(-rate * t ** p)
            ax.semilogy(t, model, "--", lw=0.9,
                        label=f"fit exp(-{rate:.3f} t^{p:.3f})")
            overlays["fitted_p"] = p
        if theta is not None:
            key = str(int(theta)) if float(theta).is_integer() else None
            p_ref = constants["p_theory"].get(key) if key else None
            if p_ref is not None:
                ax.set_title(f"theta = {theta:g}: reference p = {p_ref:.4f}")
                overlays["p_theory"] = p_ref
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    return fig, overlays


_RENDERERS = {
    "dispersion": _render_dispersion,
    "jay": _render_jay,
    "freq": _render_freq,
    "kernel": _render_kernel,
    "decay": _render_decay,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns {'path': ..., 'overlays': {...}}.

    Raises SchemaError (and writes nothing) when the input does not
    match the CLI schema for the requested kind or carries no rows.
    """
    if spec.kind not in _RENDERERS:
        raise SchemaError(f"unknown figure kind '{spec.kind}' "
                          f"(choose one of {sorted(_RENDERERS)})")
    csv_path = spec.inputs[0]
    table = load_table(csv_path, spec.kind)
    constants = load_manifest(spec.manifest)["constants"]
    if spec.kind == "decay" and len(spec.inputs) > 1:
        with open(spec.inputs[1], encoding="utf-8") as fh:
            spec.extra["summary"] = json.load(fh)
    fig, overlays = _RENDERERS[spec.kind](spec, table, constants)
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return {"path": str(out), "overlays": overlays}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="balescu-plots",
        description="Render figures from balescu CLI tables.")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV (decay: optionally followed by the "
                             "evolve summary JSON)")
    parser.add_argument("--kind", required=True,
                        choices=sorted(_RENDERERS))
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--manifest", default=None,
                        help="verify manifest JSON (default: "
                             "verify_manifest.json next to the input)")
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--logy", action="store_true")
    args = parser.parse_args(argv)
    manifest = args.manifest
    if manifest is None:
        candidate = Path(args.inputs[0]).parent / "verify_manifest.json"
        if not candidate.exists():
            print("error: no --manifest given and no verify_manifest.json "
                  f"next to {args.inputs[0]}", file=sys.stderr)
            return 2
        manifest = str(candidate)
    spec = FigureSpec(inputs=args.inputs, kind=args.kind, out=args.out,
                      manifest=manifest, logx=args.logx, logy=args.logy)
    try:
        result = render(spec)
    except (SchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(result["path"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
