"""Interval arithmetic shared by the discretization and reachability code.

Every overlap decision between cells, branch images and fattened images goes
through this module so that the transfer matrices and the pseudo-orbit cell
graph agree about which sets touch.  Cells follow the half-open convention
[lo, hi), with the last cell of a partition closed on the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Grid snapping tolerance, in units of one cell width.  Image endpoints that
# land within this distance of a cell boundary are treated as exactly on it,
# which keeps Markov-aligned configurations exact under float arithmetic.
GRID_SNAP = 1e-9


@dataclass(frozen=True)
class Interval:
    """A nonempty interval [lo, hi] of the real line.

    Openness of the endpoints is contextual (cells are half-open, fattened
    images are open); this class only carries the endpoints.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, closed_right: bool = False) -> bool:
        if closed_right:
            return self.lo <= x <= self.hi
        return self.lo <= x < self.hi


def overlap_length(alo: float, ahi: float, blo: float, bhi: float) -> float:
    """Length of [alo, ahi] ∩ [blo, bhi] (0 if disjoint)."""
    return max(0.0, min(ahi, bhi) - max(alo, blo))


def snap_to_grid(x: float, lo: float, h: float) -> float:
    """Snap x onto the grid {lo + k*h} when it lies within GRID_SNAP*h of it."""
    g = (x - lo) / h
    k = round(g)
    if abs(g - k) <= GRID_SNAP:
        return lo + k * h
    return x


def grid_coord(x: float, lo: float, h: float) -> float:
    """Coordinate of x in grid units, snapped to integers within GRID_SNAP."""
    g = (x - lo) / h
    k = round(g)
    if abs(g - k) <= GRID_SNAP:
        return float(k)
    return g


def open_cell_range(u: float, v: float, lo: float, h: float, n: int) -> tuple[int, int]:
    """Indices [jmin, jmax] of the cells meeting the open interval (u, v).

    Cell j is [lo + j*h, lo + (j+1)*h); the last cell is closed but that does
    not change which cells an open interval meets.  Returns a half-open-free
    inclusive pair; jmin > jmax means no cell meets (u, v).  Indices are not
    clipped to [0, n-1]; the caller decides between clipping (strict domains)
    and wrapping (torus domains).
    """
    if not (u < v):
        return 1, 0
    gu = grid_coord(u, lo, h)
    gv = grid_coord(v, lo, h)
    jmin = math.floor(gu)
    jmax = math.ceil(gv) - 1
    return jmin, jmax


def wrap_point(x: float, lo: float, hi: float) -> float:
    span = hi - lo
    y = lo + (x - lo) % span
    if y >= hi:  # guard against float rounding of the modulo
        y -= span
    return y


def wrap_interval(u: float, v: float, lo: float, hi: float) -> tuple[int, list[tuple[float, float]]]:
    """Decompose [u, v] modulo the domain [lo, hi].

    Returns (full_covers, pieces): the interval covers the whole domain
    ``full_covers`` times, plus the partial pieces listed (each inside
    [lo, hi]).  Used both for wrapped mass distribution and for wrapped
    adjacency, so both see identical geometry.
    """
    span = hi - lo
    width = v - u
    if width >= span:
        full, width = divmod(width, span)
        full = int(full)
    else:
        full = 0
    u = wrap_point(u, lo, hi)
    v = u + width
    if v <= hi:
        pieces = [(u, v)] if v > u else []
    else:
        pieces = [(u, hi), (lo, lo + (v - hi))]
    return full, pieces


def nearest_difference(d: float, span: float) -> float:
    """Wrap a difference onto [-span/2, span/2) (distance on the torus)."""
    return (d + span / 2.0) % span - span / 2.0


def locate(x: float, lo: float, hi: float, n: int) -> int:
    """Cell index of x in the uniform n-cell partition of [lo, hi].

    Half-open cells, last cell closed.  Grid-snapped so that exact boundary
    values (up to float dust) land in the right-hand cell.
    """
    if not (lo <= x <= hi):
        raise DomainError(f"{x} outside [{lo}, {hi}]")
    h = (hi - lo) / n
    i = math.floor(grid_coord(x, lo, h))
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i
