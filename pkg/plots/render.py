#!/usr/bin/env python3
"""Render figures from the analysis pipeline's CSV/JSON files.

Kinds: map-graph (piecewise map from its JSON config), density (stationary
densities from a components report), spectrum (eigenvalues on the complex
plane with the gap and isolation regions), scatter (post-burn-in orbit
points on the unit square).  Files in, PNG out; nothing is recomputed.
Figure geometry and PNG metadata are pinned, so one input gives one output
byte for byte.

    python3 plots/render.py --kind scatter --in orbits.csv --out fig.png
"""

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.4, 4.8)
SQUARE = (5.2, 5.2)
DPI = 150
PNG_META = {"Software": "pseudorbit-plots"}


class SchemaError(ValueError):
    """Input file missing or not matching the declared schema."""


def _load_json(path, required):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not JSON: {exc}") from exc
    missing = [k for k in required if k not in data]
    if missing:
        raise SchemaError(f"{path} lacks required keys {missing}")
    return data


def _load_csv(path, fields):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if data.dtype.names is None or tuple(data.dtype.names) != fields:
        raise SchemaError(f"{path}: expected columns {','.join(fields)}")
    return np.atleast_1d(data)


def _save(fig, out):
    fig.savefig(out, dpi=DPI, metadata=PNG_META)
    plt.close(fig)


def render_map_graph(src, out):
    cfg = _load_json(src, ("domain", "branches"))
    lo, hi = map(float, cfg["domain"])
    span = hi - lo
    fig, ax = plt.subplots(figsize=SQUARE)
    ax.plot([lo, hi], [lo, hi], ls="--", lw=0.8, color="0.6")
    for b in cfg["branches"]:
        if not all(k in b for k in ("dom", "slope", "intercept")):
            raise SchemaError(f"{src}: malformed branch {b}")
        blo, bhi = b["dom"]
        xs = np.linspace(blo, bhi, 256)
        ys = b["slope"] * xs + b["intercept"]
        if cfg.get("wrap"):
            ys = lo + np.mod(ys - lo, span)
            folds = np.flatnonzero(np.abs(np.diff(ys)) > span / 2)
            ys[folds + 1] = np.nan  # break the line at each fold
        ax.plot(xs, ys, color="C0", lw=1.6)
    ax.set(xlim=(lo, hi), ylim=(lo, hi), xlabel="x", ylabel="T(x)")
    ax.set_aspect("equal")
    _save(fig, out)


def render_density(src, out):
    cfg = _load_json(src, ("components", "partition"))
    part = cfg["partition"]
    if "domain" not in part or "n" not in part:
        raise SchemaError(f"{src}: partition block lacks domain/n")
    lo, hi = map(float, part["domain"])
    h = (hi - lo) / int(part["n"])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for i, comp in enumerate(cfg["components"]):
        if "density_csv" not in comp:
            raise SchemaError(f"{src}: component {i} lacks density_csv")
        rows = _load_csv(Path(src).parent / comp["density_csv"], ("cell", "density"))
        x = lo + (rows["cell"] + 0.5) * h
        y = rows["density"] / h  # cell masses -> density per unit length
        ax.fill_between(x, y, step="mid", alpha=0.35, color=f"C{i}")
        ax.plot(x, y, drawstyle="steps-mid", lw=1.0, color=f"C{i}",
                label=f"component {i}")
    ax.set(xlim=(lo, hi), xlabel="x", ylabel="stationary density")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="upper right", frameon=False)
    _save(fig, out)


def render_spectrum(src, out):
    d = _load_json(src, ("eigenvalues", "gap_radius", "isolation_delta"))
    w = np.asarray(d["eigenvalues"], dtype=float)
    if w.ndim != 2 or w.shape[1] != 2:
        raise SchemaError(f"{src}: eigenvalues must be [re, im] pairs")
    r, delta = float(d["gap_radius"]), float(d["isolation_delta"])
    th = np.linspace(0.0, 2 * np.pi, 361)
    fig, ax = plt.subplots(figsize=SQUARE)
    ax.plot(np.cos(th), np.sin(th), lw=0.8, color="0.3")
    ax.fill(r * np.cos(th), r * np.sin(th), color="C0", alpha=0.12, lw=0)
    ax.plot(r * np.cos(th), r * np.sin(th), lw=0.8, ls=":", color="C0")
    ax.fill(1 + delta * np.cos(th), delta * np.sin(th), color="C2",
            alpha=0.18, lw=0)
    ax.scatter(w[:, 0], w[:, 1], marker="x", s=45, color="C3", zorder=3)
    if d.get("xi") is not None:
        ax.scatter([float(d["xi"])], [0.0], s=110, facecolors="none",
                   edgecolors="C2", zorder=4)
    ax.axhline(0.0, lw=0.4, color="0.8")
    ax.axvline(0.0, lw=0.4, color="0.8")
    ax.set(xlim=(-1.2, 1.3), ylim=(-1.2, 1.2), xlabel="Re", ylabel="Im")
    ax.set_aspect("equal")
    _save(fig, out)


def render_scatter(src, out):
    rows = _load_csv(src, ("chain", "step", "x", "y"))
    fig, ax = plt.subplots(figsize=SQUARE)
    ax.scatter(rows["x"], rows["y"], s=1.2, linewidths=0, color="C0", alpha=0.5)
    ax.set(xlim=(0.0, 1.0), ylim=(0.0, 1.0), xlabel="x", ylabel="y")
    ax.set_aspect("equal")
    _save(fig, out)


KINDS = {
    "map-graph": render_map_graph,
    "density": render_density,
    "spectrum": render_spectrum,
    "scatter": render_scatter,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", required=True, choices=sorted(KINDS))
    ap.add_argument("--in", dest="src", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    try:
        KINDS[args.kind](args.src, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
