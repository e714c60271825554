#!/usr/bin/env python3
"""Produce every file the plot renderer consumes, using the CLI only.

Writes into --outdir: a perturbed matrix with spectrum and component
reports for the three-window map, the doubling-map spectrum, the skew
ensemble orbit stream, and copies of the packaged map configs.

    python3 scripts/make_figure_inputs.py --outdir figs_in
"""

import argparse
import os
import shutil
from importlib import resources

from pseudorbit.cli import main as cli


def run(argv):
    rc = cli(argv)
    if rc != 0:
        raise SystemExit(f"step failed ({rc}): {' '.join(argv)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="figs_in")
    ap.add_argument("--bins", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=30_000)
    ap.add_argument("--burn", type=int, default=10_000)
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    os.environ["PSEUDORBIT_OUTDIR"] = args.outdir

    run(["ulam", "--map", "example1.json", "--bins", str(args.bins),
         "--eps", "0.05", "--out", "example1_P.csv"])
    run(["components", "--matrix", "example1_P.csv", "--out",
         "example1_components.json"])
    run(["ulam", "--map", "example2_base.json", "--bins", str(args.bins),
         "--eps", "0.0125", "--out", "example2_P.csv"])
    run(["spectrum", "--matrix", "example2_P.csv", "--out",
         "example2_spectrum.json"])
    run(["ulam", "--map", "doubling.json", "--bins", "512",
         "--eps", "0.01", "--out", "doubling_P.csv"])
    run(["spectrum", "--matrix", "doubling_P.csv", "--out",
         "doubling_spectrum.json"])
    run(["simulate", "--skew", "--eps", "0.008333333333333333",
         "--starts", "50", "--steps", str(args.steps),
         "--burn", str(args.burn), "--bins", "128",
         "--out", "orbits.csv", "--hist", "orbit_hist.csv"])
    for name in ("doubling.json", "example1.json", "example2_base.json"):
        src = resources.files("pseudorbit") / "configs" / name
        with resources.as_file(src) as real:
            shutil.copy(real, os.path.join(args.outdir, name))
    print(f"figure inputs in {args.outdir}/")


if __name__ == "__main__":
    main()
