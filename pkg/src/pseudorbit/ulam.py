"""Ulam discretization of the transfer operator, exact for affine branches.

The unperturbed matrix has entries P[i, j] = m(I_i ∩ T^{-1} I_j) / m(I_i)
over a uniform partition {I_i}; densities act as row vectors, so f P is the
push-forward of the cell-mass vector f.  Additive noise enters as a second
row-stochastic matrix K with the closed-form entries

    K[j, k] = (1/m(I_j)) ∫_{I_j} ∫_{I_k} h(u - v) dv du,

assembled from the kernel's second antiderivative, and the perturbed matrix
is the product P K.  A Monte Carlo assembler covers the two-dimensional
skew product, where preimages are not affine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import BoundaryError, NumericalError, PartitionMismatchError, StructuralError
from .geometry import (
    Interval,
    grid_coord,
    locate,
    overlap_length,
    snap_to_grid,
    wrap_interval,
)
from .maps import PiecewiseMap, SkewFamily, map_to_config
from .noise import NoiseKernel, kernel_to_config, make_rng

ROW_SUM_TOL = 1e-10
# Entries this small are cancellation dust from the closed-form band
# integrals; dropping them keeps supports exact without touching row sums
# beyond ~band * 1e-15.
ENTRY_DUST = 1e-15


@dataclass(frozen=True)
class Partition:
    """Uniform partition of an interval into n half-open cells (last closed)."""

    domain: Interval
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 cells")

    @property
    def h(self) -> float:
        return self.domain.length / self.n

    def cell(self, i: int) -> tuple[float, float]:
        h = self.h
        lo = self.domain.lo + i * h
        hi = self.domain.hi if i == self.n - 1 else self.domain.lo + (i + 1) * h
        return lo, hi

    def edges(self) -> np.ndarray:
        e = self.domain.lo + self.h * np.arange(self.n + 1)
        e[-1] = self.domain.hi
        return e

    def centers(self) -> np.ndarray:
        return self.domain.lo + self.h * (np.arange(self.n) + 0.5)

    def locate(self, x: float) -> int:
        return locate(x, self.domain.lo, self.domain.hi, self.n)

    def locate_array(self, xs: np.ndarray) -> np.ndarray:
        idx = ((np.asarray(xs) - self.domain.lo) / self.h).astype(np.int64)
        return np.clip(idx, 0, self.n - 1)

    def cells_touching(self, lo: float, hi: float) -> np.ndarray:
        """Indices of cells whose interior meets the open interval (lo, hi)."""
        gl = grid_coord(lo, self.domain.lo, self.h)
        gh = grid_coord(hi, self.domain.lo, self.h)
        jmin = max(0, math.floor(gl))
        jmax = min(self.n - 1, math.ceil(gh) - 1)
        return np.arange(jmin, jmax + 1)

    def to_config(self) -> dict:
        return {"domain": [self.domain.lo, self.domain.hi], "n": self.n}


@dataclass(frozen=True)
class Partition2D:
    """Product partition of [0,1] x [0,1) for the skew product."""

    x: Partition
    y: Partition

    @property
    def n(self) -> int:
        return self.x.n * self.y.n

    def flat(self, ix, iy):
        return ix * self.y.n + iy

    def to_config(self) -> dict:
        return {"x": self.x.to_config(), "y": self.y.to_config()}


@dataclass
class TransferMatrix:
    """Row-stochastic discretized transfer operator."""

    partition: Partition | Partition2D
    matrix: sp.csr_matrix
    kind: str  # "unperturbed" | "perturbed" | "skew-mc"
    eps: float | None = None
    kernel: dict | None = None
    seed: int | None = None
    map_config: dict | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def check_stochastic(self, tol: float = ROW_SUM_TOL) -> None:
        dev = float(np.max(np.abs(self.row_sums() - 1.0)))
        if dev > tol:
            raise NumericalError(f"row sums deviate from 1 by {dev:.3e} > {tol}")


def _distribute(pieces_accum, partition: Partition, wrap: bool, i: int, weight: float,
                img_lo: float, img_hi: float):
    """Spread ``weight`` (fraction of row i) uniformly over the image interval."""
    rows, cols, vals = pieces_accum
    dom = partition.domain
    h = partition.h
    length = img_hi - img_lo
    if length <= 0.0:
        return
    if wrap:
        full, parts = wrap_interval(img_lo, img_hi, dom.lo, dom.hi)
        if full:
            share = weight * full * h / length
            for j in range(partition.n):
                rows.append(i)
                cols.append(j)
                vals.append(share)
        for u, v in parts:
            _distribute(pieces_accum, partition, False, i, weight * (v - u) / length, u, v)
        return
    if img_lo < dom.lo - 1e-9 * dom.length or img_hi > dom.hi + 1e-9 * dom.length:
        raise StructuralError(
            f"branch image [{img_lo}, {img_hi}] escapes the domain of a non-wrap map"
        )
    for j in partition.cells_touching(img_lo, img_hi):
        clo, chi = partition.cell(j)
        ov = overlap_length(img_lo, img_hi, clo, chi)
        if ov > 0.0:
            rows.append(i)
            cols.append(j)
            vals.append(weight * ov / length)


def build_ulam(pmap: PiecewiseMap, partition: Partition) -> TransferMatrix:
    """Exact Ulam matrix of a piecewise-affine map.

    On each branch piece of a cell the map is affine, so the push-forward of
    the uniform mass on the piece is uniform on its image; entries are exact
    up to float rounding.  Image endpoints are snapped to the cell grid so
    Markov-aligned configurations produce no sliver entries.
    """
    n = partition.n
    h = partition.h
    dom = partition.domain
    if abs(dom.lo - pmap.domain.lo) > 1e-12 or abs(dom.hi - pmap.domain.hi) > 1e-12:
        raise StructuralError("partition does not cover the map domain")
    accum = ([], [], [])
    for i in range(n):
        clo, chi = partition.cell(i)
        cw = chi - clo
        for plo, phi, b in pmap.pieces(clo, chi):
            weight = (phi - plo) / cw
            a, c = b(plo), b(phi)
            img_lo, img_hi = (a, c) if a <= c else (c, a)
            img_lo = snap_to_grid(img_lo, dom.lo, h)
            img_hi = snap_to_grid(img_hi, dom.lo, h)
            _distribute(accum, partition, pmap.wrap, i, weight, img_lo, img_hi)
    rows, cols, vals = accum
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    tm = TransferMatrix(partition, mat, "unperturbed", map_config=map_to_config(pmap))
    tm.check_stochastic()
    return tm


def noise_matrix(partition: Partition, kernel: NoiseKernel) -> sp.csr_matrix:
    """Cell-averaged smoothing matrix K of the noise kernel.

    Banded with nonzero offsets within ±ceil(eps/h); rows are stochastic
    except, in strict mode, rows whose eps-ball crosses the domain boundary
    (those lose the escaping mass and must not receive any in a product).
    """
    n, h = partition.n, partition.h
    bw = math.ceil(kernel.eps / h - 1e-9) + 1
    offs = np.arange(-bw, bw + 1)
    G = kernel.cdf_integral
    band = (G((1 - offs) * h) - 2.0 * G(-offs * h) + G(-(1 + offs) * h)) / h
    band[np.abs(band) < ENTRY_DUST] = 0.0
    rows = np.repeat(np.arange(n), offs.size)
    cols = rows + np.tile(offs, n)
    vals = np.tile(band, n)
    if kernel.boundary == "wrap":
        cols = cols % n
    else:
        keep = (cols >= 0) & (cols < n)
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    K = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    K.eliminate_zeros()
    return K


def build_perturbed(pmap: PiecewiseMap, partition: Partition, kernel: NoiseKernel) -> TransferMatrix:
    """Perturbed transfer matrix P K for additive noise.

    In strict boundary mode the noise ball of every cell that receives
    unperturbed mass must stay inside the domain, otherwise the perturbed
    operator would leak; that raises a boundary error.
    """
    if pmap.wrap != (kernel.boundary == "wrap"):
        raise StructuralError("kernel boundary mode must match the map's wrap flag")
    P = build_ulam(pmap, partition)
    K = noise_matrix(partition, kernel)
    if kernel.boundary == "strict":
        deficits = 1.0 - np.asarray(K.sum(axis=1)).ravel()
        used = np.unique(P.matrix.tocoo().col)
        bad = used[deficits[used] > 1e-12]
        if bad.size:
            j = int(bad[0])
            raise BoundaryError(
                f"noise ball of cell {j} crosses the domain boundary in strict mode"
            )
    M = (P.matrix @ K).tocsr()
    M.data[np.abs(M.data) < ENTRY_DUST] = 0.0
    M.eliminate_zeros()
    tm = TransferMatrix(
        partition,
        M,
        "perturbed",
        eps=kernel.eps,
        kernel=kernel_to_config(kernel),
        map_config=map_to_config(pmap),
    )
    tm.check_stochastic()
    return tm


def build_ulam_2d(
    family: SkewFamily,
    partition: Partition2D,
    kernel: NoiseKernel | None,
    samples_per_cell: int = 64,
    seed: int = 0,
) -> TransferMatrix:
    """Monte Carlo Ulam matrix of the noisy skew product.

    Each source cell is sampled on a jittered s x s stratified grid
    (samples_per_cell = s^2 required, >= 64), with one noise draw per sample
    point; rows are tally-normalized so they sum to 1 exactly up to float
    addition.  Cell (ix, iy) uses the Philox stream with spawn key
    (ix, iy) derived from ``seed``, so assembly order cannot change the
    result.  kernel=None forces the noiseless product map.
    """
    if samples_per_cell < 64:
        raise ValueError("samples_per_cell must be at least 64")
    s = math.isqrt(samples_per_cell)
    if s * s != samples_per_cell:
        raise ValueError("samples_per_cell must be a perfect square (stratified grid)")
    px, py = partition.x, partition.y
    nx, ny = px.n, py.n
    m = samples_per_cell
    kx = np.repeat(np.arange(s), s).astype(float)
    ky = np.tile(np.arange(s), s).astype(float)
    rows, cols, vals = [], [], []
    for ix in range(nx):
        xlo, _ = px.cell(ix)
        for iy in range(ny):
            ylo, _ = py.cell(iy)
            rng = make_rng(seed, ix, iy)
            jx, jy = rng.random(m), rng.random(m)
            xs = xlo + (kx + jx) / s * px.h
            ys = ylo + (ky + jy) / s * py.h
            omegas = kernel.sample(rng, m) if kernel is not None else np.zeros(m)
            x2, y2 = family.apply_array(omegas, xs, ys)
            flat = px.locate_array(x2) * ny + py.locate_array(y2)
            dest, counts = np.unique(flat, return_counts=True)
            src = partition.flat(ix, iy)
            rows.extend([src] * dest.size)
            cols.extend(dest.tolist())
            vals.extend((counts / m).tolist())
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(partition.n, partition.n)).tocsr()
    tm = TransferMatrix(
        partition,
        mat,
        "skew-mc",
        eps=kernel.eps if kernel is not None else 0.0,
        kernel=kernel_to_config(kernel) if kernel is not None else None,
        seed=seed,
        map_config=map_to_config(family.base),
    )
    tm.check_stochastic()
    return tm


def operator_distance(unperturbed: TransferMatrix, perturbed: TransferMatrix) -> float:
    """max-row L1 distance, the discrete proxy for sup_{||f||<=1} ||(L - L_e) f||_1.

    A normalized single-cell density is the row unit vector of its cell, so
    the operator gap over that unit ball is the worst row-wise L1 difference.
    """
    if unperturbed.partition != perturbed.partition:
        raise PartitionMismatchError("operator distance needs a common partition")
    diff = (unperturbed.matrix - perturbed.matrix).tocsr()
    return float(np.max(np.abs(diff).sum(axis=1)))


# -- matrix file round-trip ----------------------------------------------------


def meta_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def save_matrix(tm: TransferMatrix, csv_path) -> None:
    """Write coordinate-list CSV (row,col,value) plus a JSON header sidecar."""
    coo = tm.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(csv_path, "w") as fh:
        fh.write("row,col,value\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{int(r)},{int(c)},{float(v)!r}\n")
    meta = {
        "partition": tm.partition.to_config(),
        "kind": tm.kind,
        "eps": tm.eps,
        "kernel": tm.kernel,
        "seed": tm.seed,
        "map": tm.map_config,
    }
    with open(meta_path(csv_path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _partition_from_config(cfg: dict):
    if "x" in cfg:
        return Partition2D(_partition_from_config(cfg["x"]), _partition_from_config(cfg["y"]))
    return Partition(Interval(*cfg["domain"]), int(cfg["n"]))


def load_matrix(csv_path) -> TransferMatrix:
    with open(meta_path(csv_path)) as fh:
        meta = json.load(fh)
    partition = _partition_from_config(meta["partition"])
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        raise NumericalError(f"no matrix entries in {csv_path}")
    n = partition.n
    mat = sp.coo_matrix(
        (data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(n, n)
    ).tocsr()
    return TransferMatrix(
        partition,
        mat,
        meta.get("kind", "unperturbed"),
        eps=meta.get("eps"),
        kernel=meta.get("kernel"),
        seed=meta.get("seed"),
        map_config=meta.get("map"),
    )
