"""Monte Carlo chains for cross-validating the discretized operators.

One noisy step is x -> T(x) + omega with omega drawn from the kernel;
the skew variant advances (x, y) -> (T(x) + omega*y, 2y mod 1).  Chains
tally their post-burn-in states on a partition.  Ensembles advance all
chains in lockstep on one Philox stream (derived from the seed), which
makes results independent of any scheduling.

The angle-doubling fiber needs care: every float64 is a dyadic rational,
and doubling shifts its bits out until y lands exactly on the fixed point
0, killing the coupling after ~53 steps.  A uniformly random initial angle
has infinitely many random binary digits, so the ensemble keeps each fiber
in a 64-bit register seeded with the leading digits of y0 and shifts fresh
stream bits in from below; that is the exact doubling dynamics of a full-
precision random angle.  run_skew_chain, by contrast, follows the exact
orbit of the dyadic point (x0, y0) it was given.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, PartitionMismatchError
from .maps import PiecewiseMap, SkewFamily
from .noise import NoiseKernel, make_rng
from .ulam import Partition, Partition2D

SCATTER_THIN = 10
SCATTER_CAP = 100_000
_BLOCK = 8192


@dataclass
class EmpiricalMeasure:
    """Cell-count histogram of one run (1-D or flattened 2-D)."""

    partition: Partition | Partition2D
    counts: np.ndarray
    total: int
    burn_in: int
    seed: int

    def normalized(self) -> np.ndarray:
        return self.counts / self.total


def run_chain(
    pmap: PiecewiseMap,
    kernel: NoiseKernel,
    x0: float,
    n: int,
    burn_in: int,
    seed: int,
    partition: Partition,
) -> EmpiricalMeasure:
    """Single noisy chain of length n; tallies the n - burn_in last states.

    Strict boundary mode raises (with the step index) if noise pushes the
    state out of the domain; wrap mode folds it back onto the circle.
    """
    if burn_in >= n:
        raise ValueError("burn_in must be smaller than n")
    dom = pmap.domain
    lo, hi, span = dom.lo, dom.hi, dom.length
    wrap = kernel.boundary == "wrap"
    rng = make_rng(seed)
    counts = np.zeros(partition.n, dtype=np.int64)
    inv_h = partition.n / span
    x = float(x0)
    step = 0
    cells = np.empty(_BLOCK, dtype=np.int64)
    fill = 0
    while step < n:
        block = min(_BLOCK, n - step)
        omegas = kernel.sample(rng, block)
        for k in range(block):
            x = pmap(x) + float(omegas[k])
            if x < lo or x > hi:
                if wrap:
                    x = lo + (x - lo) % span
                else:
                    raise BoundaryError(
                        f"chain left the domain at step {step + k}", step=step + k
                    )
            if step + k >= burn_in:
                c = int((x - lo) * inv_h)
                cells[fill] = min(c, partition.n - 1)
                fill += 1
        if fill:
            counts += np.bincount(cells[:fill], minlength=partition.n)
            fill = 0
        step += block
    return EmpiricalMeasure(partition, counts, n - burn_in, burn_in, seed)


@dataclass
class SkewRun:
    measure: EmpiricalMeasure
    points: np.ndarray  # thinned post-burn-in (chain, step, x, y) rows
    right_occupancy: np.ndarray  # per-chain fraction of post-burn-in steps with x > 0.55


def run_skew_ensemble(
    family: SkewFamily,
    eps: float,
    starts: np.ndarray,
    n: int,
    burn_in: int,
    seed: int,
    partition: Partition2D,
    thin: int = SCATTER_THIN,
    cap: int = SCATTER_CAP,
) -> SkewRun:
    """Advance all chains in lockstep; uniform noise on (-eps, eps).

    ``starts`` has shape (chains, 2); the y column seeds the leading bits of
    the fiber registers, whose lower digits are drawn from the stream (see
    module docstring).  Emits a thinned point stream (every ``thin``-th
    post-burn-in step, capped at ``cap`` rows) for scatter output, and
    per-chain occupancy of the region {x > 0.55}.
    """
    if burn_in >= n:
        raise ValueError("burn_in must be smaller than n")
    if eps < 0.0 or eps >= family.margin:
        raise ValueError(f"need 0 <= eps < margin {family.margin}, got {eps}")
    starts = np.asarray(starts, dtype=float)
    chains = starts.shape[0]
    rng = make_rng(seed)
    xs = starts[:, 0].copy()
    regs = (np.clip(starts[:, 1], 0.0, 1.0 - 2.0**-53) * 2.0**64).astype(np.uint64)
    nx, ny = partition.x.n, partition.y.n
    counts = np.zeros(nx * ny, dtype=np.int64)
    right = np.zeros(chains, dtype=np.int64)
    pts = []
    kept = 0
    for step in range(n):
        omegas = rng.uniform(-eps, eps, chains)
        bits = rng.integers(0, 2, size=chains, dtype=np.uint64)
        xs, _ = family.apply_array(omegas, xs, regs * 2.0**-64)
        regs = regs * np.uint64(2) + bits
        ys = regs * 2.0**-64
        if step >= burn_in:
            flat = partition.x.locate_array(xs) * ny + partition.y.locate_array(ys)
            counts += np.bincount(flat, minlength=nx * ny)
            right += xs > 0.55
            if (step - burn_in) % thin == 0 and kept < cap:
                take = min(chains, cap - kept)
                rows = np.column_stack(
                    [np.arange(take), np.full(take, step), xs[:take], ys[:take]]
                )
                pts.append(rows)
                kept += take
    tallied = n - burn_in
    measure = EmpiricalMeasure(partition, counts, tallied * chains, burn_in, seed)
    points = np.concatenate(pts) if pts else np.empty((0, 4))
    return SkewRun(measure, points, right / tallied)


def run_skew_chain(
    family: SkewFamily,
    eps: float,
    x0: float,
    y0: float,
    n: int,
    burn_in: int,
    seed: int,
    partition: Partition2D,
    thin: int = SCATTER_THIN,
    cap: int = SCATTER_CAP,
) -> SkewRun:
    """Single skew chain following the exact orbit of the dyadic (x0, y0).

    With y0 = 0 the fiber stays at 0 and the base decouples; any other
    float y0 reaches 0 within ~53 doublings (see module docstring), so use
    run_skew_ensemble to model chains with random initial angles.
    """
    if burn_in >= n:
        raise ValueError("burn_in must be smaller than n")
    if eps < 0.0 or eps >= family.margin:
        raise ValueError(f"need 0 <= eps < margin {family.margin}, got {eps}")
    rng = make_rng(seed)
    x, y = float(x0), float(y0)
    nx, ny = partition.x.n, partition.y.n
    counts = np.zeros(nx * ny, dtype=np.int64)
    right = 0
    pts = []
    for step in range(n):
        omega = float(rng.uniform(-eps, eps)) if eps > 0.0 else 0.0
        x, y = family.apply(omega, x, y)
        if step >= burn_in:
            counts[partition.x.locate(x) * ny + partition.y.locate(y)] += 1
            right += x > 0.55
            if (step - burn_in) % thin == 0 and len(pts) < cap:
                pts.append((0, step, x, y))
    tallied = n - burn_in
    measure = EmpiricalMeasure(partition, counts, tallied, burn_in, seed)
    points = np.array(pts, dtype=float) if pts else np.empty((0, 4))
    return SkewRun(measure, points, np.array([right / tallied]))


def l1_distance(measure: EmpiricalMeasure, density: np.ndarray) -> float:
    """L1 distance between the normalized histogram and a cell density."""
    density = np.asarray(density, dtype=float).ravel()
    if density.size != measure.counts.size:
        raise PartitionMismatchError(
            f"density has {density.size} cells, histogram {measure.counts.size}"
        )
    return float(np.abs(measure.normalized().ravel() - density).sum())


@dataclass
class EscapeStats:
    """Hitting-time statistics; censored trials are excluded from the mean."""

    times: np.ndarray  # uncensored hitting times, in steps
    censored: int
    trials: int
    max_steps: int

    @property
    def mean(self) -> float:
        return float(self.times.mean()) if self.times.size else float("nan")

    @property
    def median(self) -> float:
        return float(np.median(self.times)) if self.times.size else float("nan")

    def histogram(self, bins: int = 32) -> tuple[np.ndarray, np.ndarray]:
        return np.histogram(self.times, bins=bins)


def escape_time(
    pmap: PiecewiseMap,
    kernel: NoiseKernel,
    start_cells: np.ndarray,
    absorb_cells: np.ndarray,
    partition: Partition,
    max_steps: int = 1_000_000,
    trials: int = 200,
    seed: int = 0,
) -> EscapeStats:
    """First-entry times into ``absorb_cells`` from uniform starts on ``start_cells``.

    Start and absorb sets must be disjoint.  All trials advance in lockstep;
    a trial that has not hit the absorbing set after max_steps is censored.
    """
    start_cells = np.asarray(start_cells, dtype=int)
    absorb_cells = np.asarray(absorb_cells, dtype=int)
    if np.intersect1d(start_cells, absorb_cells).size:
        raise ValueError("start and absorb sets overlap")
    absorbing = np.zeros(partition.n, dtype=bool)
    absorbing[absorb_cells] = True
    dom = pmap.domain
    lo, span = dom.lo, dom.length
    wrap = kernel.boundary == "wrap"
    rng = make_rng(seed)
    cells = rng.choice(start_cells, size=trials)
    xs = dom.lo + (cells + rng.random(trials)) * partition.h
    hit = np.full(trials, -1, dtype=np.int64)
    alive = np.ones(trials, dtype=bool)
    for step in range(1, max_steps + 1):
        omegas = kernel.sample(rng, trials)
        nxt = pmap.apply_array(xs[alive]) + omegas[alive]
        if wrap:
            nxt = lo + (nxt - lo) % span
        elif nxt.size and (nxt.min() < dom.lo or nxt.max() > dom.hi):
            raise BoundaryError(f"trial left the domain at step {step}", step=step)
        xs[alive] = nxt
        landed = absorbing[partition.locate_array(nxt)]
        if landed.any():
            idx = np.flatnonzero(alive)[landed]
            hit[idx] = step
            alive[idx] = False
            if not alive.any():
                break
    times = hit[hit > 0]
    return EscapeStats(
        times=times, censored=int((hit < 0).sum()), trials=trials, max_steps=max_steps
    )
