"""Command line interface.

Subcommands build matrices, inspect spectra and components, run the
pseudo-orbit verification, and reproduce the two shipped examples
end to end.  Reports are timestamp-free JSON with sorted keys so identical
configuration and seed produce byte-identical files; wall-clock metadata
goes to a separate <out>.run.json sidecar.  Exit codes: 0 success,
1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import PseudorbitError
from .geometry import Interval
from .maps import SkewFamily, example2_base_map, load_map
from .noise import NoiseKernel, kernel_to_config, make_rng
from .pseudo_orbit import (
    build_cell_graph,
    check_two_resolutions,
    component_relation,
    verify_theorem1,
)
from .spectral import metastability_report, stationary_densities, top_eigenvalues
from .simulate import run_skew_ensemble, run_chain
from .ulam import (
    Partition,
    Partition2D,
    build_perturbed,
    build_ulam,
    load_matrix,
    save_matrix,
)

OUTDIR_ENV = "PSEUDORBIT_OUTDIR"


def _out(path) -> Path:
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _resolve_map(spec: str):
    p = Path(spec)
    if p.exists():
        return load_map(p)
    packaged = resources.files("pseudorbit") / "configs" / spec
    if packaged.is_file():
        with resources.as_file(packaged) as real:
            return load_map(real)
    raise FileNotFoundError(f"map config {spec!r} not found")


def _kernel_for(pmap, eps: float, kind: str) -> NoiseKernel:
    return NoiseKernel(eps=eps, kind=kind, boundary="wrap" if pmap.wrap else "strict")


def _write_report(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path.with_suffix(path.suffix + ".run.json"), "w") as fh:
        json.dump({"written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")}, fh)
        fh.write("\n")


def _print_verdicts(verdicts: dict) -> None:
    for name, ok in verdicts.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")


# -- subcommand handlers -------------------------------------------------------


def cmd_ulam(args) -> int:
    pmap = _resolve_map(args.map)
    partition = Partition(pmap.domain, args.bins)
    if args.eps is not None:
        tm = build_perturbed(pmap, partition, _kernel_for(pmap, args.eps, args.kernel))
    else:
        tm = build_ulam(pmap, partition)
    save_matrix(tm, _out(args.out))
    return 0


def cmd_spectrum(args) -> int:
    tm = load_matrix(_out(args.matrix) if not Path(args.matrix).exists() else args.matrix)
    report = top_eigenvalues(tm, k=args.topk)
    payload = report.to_dict()
    payload["config"] = {
        "matrix": str(args.matrix),
        "topk": args.topk,
        "kind": tm.kind,
        "eps": tm.eps,
        "threads": args.threads,
    }
    _write_report(_out(args.out), payload)
    return 0


def cmd_components(args) -> int:
    tm = load_matrix(_out(args.matrix) if not Path(args.matrix).exists() else args.matrix)
    comps = stationary_densities(tm)
    out = _out(args.out)
    entries = []
    for i, comp in enumerate(comps):
        dens_path = out.with_suffix("") .with_name(out.stem + f"_density_{i}.csv")
        with open(dens_path, "w") as fh:
            fh.write("cell,density\n")
            for c in comp.support:
                fh.write(f"{c},{float(comp.density[c])!r}\n")
        entries.append(
            {
                "cells": [int(comp.support[0]), int(comp.support[-1])],
                "size": int(comp.support.size),
                "density_csv": dens_path.name,
            }
        )
    _write_report(
        out,
        {
            "components": entries,
            "partition": tm.partition.to_config(),
            "config": {"matrix": str(args.matrix), "kind": tm.kind, "eps": tm.eps,
                       "threads": args.threads},
        },
    )
    return 0


def cmd_least_elements(args) -> int:
    pmap = _resolve_map(args.map)
    partition = Partition(pmap.domain, args.bins)
    P = build_ulam(pmap, partition)
    comps = stationary_densities(P)
    graph = build_cell_graph(pmap, partition, args.eps)
    dag = component_relation(graph, comps)
    consistent = check_two_resolutions(pmap, partition, args.eps)
    payload = {
        "components": [
            {
                "cells": [int(c.support[0]), int(c.support[-1])],
                "size": int(c.support.size),
                "interval": [
                    partition.cell(int(c.support[0]))[0],
                    partition.cell(int(c.support[-1]))[1],
                ],
            }
            for c in comps
        ],
        "classes": [list(map(int, cls)) for cls in dag.classes],
        "class_edges": [list(map(int, e)) for e in dag.class_edges],
        "least": list(map(int, dag.least)),
        "resolution_consistent": bool(consistent),
        "config": {
            "map": str(args.map),
            "bins": args.bins,
            "eps": args.eps,
            "threads": args.threads,
        },
    }
    _write_report(_out(args.out), payload)
    return 0


def cmd_verify(args) -> int:
    pmap = _resolve_map(args.map)
    partition = Partition(pmap.domain, args.bins)
    kernel = _kernel_for(pmap, args.eps, args.kernel)
    report = verify_theorem1(pmap, partition, args.eps, kernel)
    payload = report.to_dict()
    payload["config"] = {
        "map": str(args.map),
        "bins": args.bins,
        "eps": args.eps,
        "kernel": kernel_to_config(kernel),
        "threads": args.threads,
    }
    _write_report(_out(args.out), payload)
    _print_verdicts({"least-element verification": report.passed})
    return 0 if report.passed else 1


def cmd_simulate(args) -> int:
    out = _out(args.out)
    hist_out = _out(args.hist) if args.hist else None
    if args.skew:
        base = _resolve_map(args.map) if args.map else example2_base_map(args.a)
        family = SkewFamily(base)
        if args.eps >= family.margin:
            raise PseudorbitError(f"eps {args.eps} reaches the margin {family.margin}")
        rng = make_rng(args.seed, 1)
        starts = rng.random((args.starts, 2))
        grid = Partition2D(
            Partition(Interval(0.0, 1.0), args.bins), Partition(Interval(0.0, 1.0), args.bins)
        )
        run = run_skew_ensemble(
            family, args.eps, starts, args.steps, args.burn, args.seed, grid
        )
        with open(out, "w") as fh:
            fh.write("chain,step,x,y\n")
            for chain, step, x, y in run.points:
                fh.write(f"{int(chain)},{int(step)},{float(x)!r},{float(y)!r}\n")
        if hist_out:
            counts = run.measure.counts.reshape(args.bins, args.bins)
            with open(hist_out, "w") as fh:
                fh.write("cell_x,cell_y,count\n")
                for ix, iy in zip(*np.nonzero(counts)):
                    fh.write(f"{ix},{iy},{counts[ix, iy]}\n")
        return 0
    pmap = _resolve_map(args.map)
    kernel = _kernel_for(pmap, args.eps, args.kernel)
    partition = Partition(pmap.domain, args.bins)
    rng = make_rng(args.seed, 1)
    counts = np.zeros(args.bins, dtype=np.int64)
    rows = []
    for chain in range(args.starts):
        x0 = pmap.domain.lo + rng.random() * pmap.domain.length
        em = run_chain(pmap, kernel, x0, args.steps, args.burn, args.seed + chain, partition)
        counts += em.counts
        rows.append((chain, x0))
    with open(out, "w") as fh:
        fh.write("chain,x0\n")
        for chain, x0 in rows:
            fh.write(f"{chain},{float(x0)!r}\n")
    if hist_out:
        with open(hist_out, "w") as fh:
            fh.write("cell,count\n")
            for c in np.nonzero(counts)[0]:
                fh.write(f"{c},{counts[c]}\n")
    return 0


def cmd_example1(args) -> int:
    pmap = _resolve_map("example1.json")
    partition = Partition(pmap.domain, args.bins)
    kernel = _kernel_for(pmap, args.eps, args.kernel)
    report = verify_theorem1(pmap, partition, args.eps, kernel)
    expected = {
        "three components": len(report.components) == 3,
        "two least classes": len(report.dag.least) == 2,
        "least-element verification": report.passed,
    }
    payload = report.to_dict()
    payload["verdicts"] = {k: bool(v) for k, v in expected.items()}
    payload["config"] = {
        "map": "example1.json",
        "bins": args.bins,
        "eps": args.eps,
        "kernel": kernel_to_config(kernel),
        "seed": args.seed,
        "threads": args.threads,
    }
    _write_report(_out(args.out), payload)
    _print_verdicts(expected)
    return 0 if all(expected.values()) else 1


def cmd_example2(args) -> int:
    pmap = example2_base_map(args.a)
    partition = Partition(pmap.domain, args.bins)
    kernel = _kernel_for(pmap, args.eps, args.kernel)
    family = SkewFamily(pmap)

    def base_part():
        report = verify_theorem1(pmap, partition, args.eps, kernel)
        P_eps = build_perturbed(pmap, partition, kernel)
        meta = metastability_report(P_eps)
        return report, meta

    def skew_part():
        rng = make_rng(args.seed, 1)
        starts = rng.random((args.starts, 2))
        grid = Partition2D(
            Partition(Interval(0.0, 1.0), 128), Partition(Interval(0.0, 1.0), 128)
        )
        return run_skew_ensemble(
            family, args.eps, starts, args.steps, args.burn, args.seed, grid
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fut_base = pool.submit(base_part)
            fut_skew = pool.submit(skew_part)
            report, meta = fut_base.result()
            run = fut_skew.result()
    else:
        report, meta = base_part()
        run = skew_part()

    min_occ = float(run.right_occupancy.min())
    verdicts = {
        "two components": len(report.components) == 2,
        "right interval is the unique least element": len(report.dag.least) == 1,
        "least-element verification": report.passed,
        "one perturbed density on the right": len(report.perturbed) == 1,
        "metastable second eigenvalue": meta.xi is not None,
        "chains accumulate on the right": min_occ >= 0.99,
    }
    payload = {
        "theorem": report.to_dict(),
        "metastability": meta.to_dict(),
        "skew": {
            "chains": args.starts,
            "steps": args.steps,
            "burn_in": args.burn,
            "min_right_occupancy": min_occ,
            "mean_right_occupancy": float(run.right_occupancy.mean()),
        },
        "verdicts": {k: bool(v) for k, v in verdicts.items()},
        "config": {
            "a": args.a,
            "bins": args.bins,
            "eps": args.eps,
            "kernel": kernel_to_config(kernel),
            "seed": args.seed,
            "starts": args.starts,
            "steps": args.steps,
            "burn": args.burn,
            "threads": args.threads,
        },
    }
    _write_report(_out(args.out), payload)
    _print_verdicts(verdicts)
    return 0 if all(verdicts.values()) else 1


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudorbit",
        description="Transfer-operator and pseudo-orbit analysis of perturbed interval maps",
    )
    parser.add_argument("--threads", type=int, default=1, help="worker threads for independent stages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ulam", help="build a transfer matrix")
    p.add_argument("--map", required=True)
    p.add_argument("--bins", type=int, default=4096)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangular"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ulam)

    p = sub.add_parser("spectrum", help="top eigenvalues of a saved matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--topk", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("components", help="recurrent classes and stationary densities")
    p.add_argument("--matrix", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("least-elements", help="pseudo-orbit order and least classes")
    p.add_argument("--map", required=True)
    p.add_argument("--bins", type=int, default=4000)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_least_elements)

    p = sub.add_parser("verify", help="least-element verification on a map")
    p.add_argument("--map", required=True)
    p.add_argument("--bins", type=int, default=4000)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangular"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="noisy chains / skew ensemble")
    p.add_argument("--map", default=None)
    p.add_argument("--skew", action="store_true")
    p.add_argument("--a", type=float, default=0.1, help="base parameter when --map is omitted")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangular"])
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--burn", type=int, default=10_000)
    p.add_argument("--bins", type=int, default=128)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.add_argument("--hist", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example1", help="three-component example, two least elements")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--bins", type=int, default=4000)
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangular"])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="example1_report.json")
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("example2", help="metastable example with skew simulation")
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=1.0 / 120.0)
    p.add_argument("--bins", type=int, default=4000)
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangular"])
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--burn", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="example2_report.json")
    p.set_defaults(func=cmd_example2)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PseudorbitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
