"""Piecewise-affine expanding interval maps and the noisy skew product.

A map is a finite list of affine branches whose domains tile an interval.
Branches are half-open on the right except the last one, which owns the
right endpoint of the domain.  Expansion (|slope| > 1) is required unless a
branch is explicitly flagged ``transient_ok``, in which case |slope| >= 1 is
accepted.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import DiscontinuityError, DomainError, MarginViolationError, StructuralError
from .geometry import Interval

_TILING_TOL = 1e-12
_IMAGE_TOL = 1e-9


@dataclass(frozen=True)
class AffineBranch:
    """One affine branch x -> slope*x + intercept on [dom.lo, dom.hi)."""

    dom: Interval
    slope: float
    intercept: float
    transient_ok: bool = False

    def __post_init__(self):
        if self.slope == 0.0:
            raise ValueError("branch slope must be nonzero")
        if self.transient_ok:
            if abs(self.slope) < 1.0:
                raise ValueError(f"|slope| = {abs(self.slope)} < 1 even with transient_ok")
        elif abs(self.slope) <= 1.0:
            raise ValueError(f"|slope| = {abs(self.slope)} is not expanding (need > 1)")

    def __call__(self, x: float) -> float:
        return self.slope * x + self.intercept

    def invert(self, y: float) -> float:
        return (y - self.intercept) / self.slope

    def image(self) -> tuple[float, float]:
        """Ordered (min, max) of the branch image over its closed domain."""
        a = self(self.dom.lo)
        b = self(self.dom.hi)
        return (a, b) if a <= b else (b, a)


class PiecewiseMap:
    """A piecewise-affine map whose branch domains tile ``domain``.

    Parameters
    ----------
    domain : Interval
        Interval the map acts on.
    branches : sequence of AffineBranch
        Ordered left to right; domains must tile ``domain`` with no gaps or
        overlaps (endpoints matched to 1e-12).
    wrap : bool
        True for maps of the circle: branch images are taken modulo the
        domain and noise wraps around.  For wrap=False every branch image
        must stay inside the domain.
    """

    def __init__(self, domain: Interval, branches, wrap: bool = False, name: str | None = None):
        branches = tuple(branches)
        if not branches:
            raise StructuralError("a map needs at least one branch")
        if abs(branches[0].dom.lo - domain.lo) > _TILING_TOL:
            raise StructuralError("first branch does not start at the domain's left endpoint")
        for left, right in zip(branches, branches[1:]):
            if abs(left.dom.hi - right.dom.lo) > _TILING_TOL:
                raise StructuralError(
                    f"branch domains leave a gap/overlap at {left.dom.hi} vs {right.dom.lo}"
                )
        if abs(branches[-1].dom.hi - domain.hi) > _TILING_TOL:
            raise StructuralError("last branch does not end at the domain's right endpoint")
        if not wrap:
            for b in branches:
                im_lo, im_hi = b.image()
                if im_lo < domain.lo - _IMAGE_TOL or im_hi > domain.hi + _IMAGE_TOL:
                    raise StructuralError(
                        f"branch on [{b.dom.lo}, {b.dom.hi}) maps outside the domain: "
                        f"image [{im_lo}, {im_hi}]"
                    )
        self.domain = domain
        self.branches = branches
        self.wrap = bool(wrap)
        self.name = name
        self._los = np.array([b.dom.lo for b in branches])
        self._los_py = [b.dom.lo for b in branches]
        self._slopes = np.array([b.slope for b in branches])
        self._intercepts = np.array([b.intercept for b in branches])

    # -- pointwise operations -------------------------------------------------

    def branch_index(self, x: float) -> int:
        if not (self.domain.lo <= x <= self.domain.hi):
            raise DomainError(f"{x} outside [{self.domain.lo}, {self.domain.hi}]")
        if x == self.domain.hi:
            return len(self.branches) - 1
        i = bisect_right(self._los_py, x) - 1
        return max(i, 0)

    def __call__(self, x: float) -> float:
        y = self.branches[self.branch_index(x)](x)
        if self.wrap:
            span = self.domain.length
            y = self.domain.lo + (y - self.domain.lo) % span
        return y

    def derivative_abs(self, x: float) -> float:
        """|T'(x)|.  Raises at branch endpoints, where the caller must pick a side."""
        for b in self.branches:
            if x == b.dom.lo or x == b.dom.hi:
                raise DiscontinuityError(f"{x} is a branch endpoint")
        return abs(self.branches[self.branch_index(x)].slope)

    def preimages(self, y: float) -> list[tuple[float, int]]:
        """All (x, branch index) with T(x) = y, one per branch containing a solution."""
        out = []
        for k, b in enumerate(self.branches):
            x = b.invert(y)
            closed = k == len(self.branches) - 1
            if b.dom.contains(x, closed_right=closed):
                out.append((x, k))
        return out

    # -- vector operations (used by the simulators and 2-D assembly) ----------

    def apply_array(self, xs: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._los, xs, side="right") - 1
        np.clip(idx, 0, len(self.branches) - 1, out=idx)
        ys = self._slopes[idx] * xs + self._intercepts[idx]
        if self.wrap:
            span = self.domain.length
            ys = self.domain.lo + (ys - self.domain.lo) % span
        return ys

    # -- geometry helpers ------------------------------------------------------

    def branch_endpoints(self) -> list[float]:
        pts = [b.dom.lo for b in self.branches]
        pts.append(self.branches[-1].dom.hi)
        return pts

    def pieces(self, lo: float, hi: float):
        """Decompose [lo, hi) into maximal sub-pieces inside single branches.

        Yields (piece_lo, piece_hi, branch).  Zero-length pieces are skipped.
        """
        for b in self.branches:
            plo = max(lo, b.dom.lo)
            phi = min(hi, b.dom.hi)
            if phi > plo:
                yield plo, phi, b

    def margin(self) -> float:
        """Distance of the map's image from the domain boundary (0 if wrapping)."""
        if self.wrap:
            return 0.0
        im_lo = min(b.image()[0] for b in self.branches)
        im_hi = max(b.image()[1] for b in self.branches)
        return min(im_lo - self.domain.lo, self.domain.hi - im_hi)


def markov_check(pmap: PiecewiseMap, partition, tol: float = 1e-12) -> bool:
    """True iff the image of every cell is a union of cells.

    Each cell is decomposed into branch pieces; the check requires every
    piece image to start and end on cell boundaries (within ``tol``).  The
    partition must live on the map's domain.
    """
    if (
        abs(partition.domain.lo - pmap.domain.lo) > tol
        or abs(partition.domain.hi - pmap.domain.hi) > tol
    ):
        raise StructuralError("partition domain differs from the map domain")
    h = partition.h
    for i in range(partition.n):
        clo, chi = partition.cell(i)
        for plo, phi, b in pmap.pieces(clo, chi):
            for endpoint in b(plo), b(phi):
                if pmap.wrap:
                    endpoint = pmap.domain.lo + (endpoint - pmap.domain.lo) % pmap.domain.length
                g = (endpoint - partition.domain.lo) / h
                if abs(g - round(g)) * h > tol:
                    return False
    return True


@dataclass(frozen=True)
class SkewFamily:
    """Noisy skew product over angle doubling.

    One step with noise amplitude omega maps (x, y) in [0,1] x S^1 to
    (T(x) + omega*y, 2y mod 1) where T is the base map.  The base image must
    sit ``margin`` away from {0, 1} so that |omega| < margin keeps the first
    coordinate inside [0, 1].
    """

    base: PiecewiseMap
    name: str | None = None

    def __post_init__(self):
        d = self.base.domain
        if d.lo != 0.0 or d.hi != 1.0 or self.base.wrap:
            raise StructuralError("skew base must be a non-wrapping map of [0, 1]")

    @property
    def margin(self) -> float:
        return self.base.margin()

    def apply(self, omega: float, x: float, y: float) -> tuple[float, float]:
        if abs(omega) >= self.margin:
            raise MarginViolationError(
                f"|omega| = {abs(omega)} >= margin {self.margin}"
            )
        x2 = self.base(x) + omega * y
        if not (0.0 <= x2 <= 1.0):
            raise MarginViolationError(f"step left the base interval: x' = {x2}")
        y2 = (2.0 * y) % 1.0
        return x2, y2

    def apply_array(self, omegas: np.ndarray, xs: np.ndarray, ys: np.ndarray):
        if np.max(np.abs(omegas), initial=0.0) >= self.margin:
            raise MarginViolationError("noise amplitude reaches the margin")
        x2 = self.base.apply_array(xs) + omegas * ys
        if x2.size and (x2.min() < 0.0 or x2.max() > 1.0):
            raise MarginViolationError("step left the base interval")
        y2 = (2.0 * ys) % 1.0
        return x2, y2


# -- shipped example maps ------------------------------------------------------


def doubling_map() -> PiecewiseMap:
    """x -> 2x mod 1 on the circle."""
    return PiecewiseMap(
        Interval(0.0, 1.0),
        [
            AffineBranch(Interval(0.0, 0.5), 2.0, 0.0),
            AffineBranch(Interval(0.5, 1.0), 2.0, -1.0),
        ],
        wrap=True,
        name="doubling",
    )


def tent_map(peak: float = 0.5) -> PiecewiseMap:
    """Tent map of [0, 1] with apex above ``peak``."""
    if not (0.0 < peak < 1.0):
        raise ValueError("peak must lie strictly inside (0, 1)")
    return PiecewiseMap(
        Interval(0.0, 1.0),
        [
            AffineBranch(Interval(0.0, peak), 1.0 / peak, 0.0),
            AffineBranch(Interval(peak, 1.0), -1.0 / (1.0 - peak), 1.0 / (1.0 - peak)),
        ],
        name=f"tent({peak})",
    )


def example1_map() -> PiecewiseMap:
    """Interval map of [0, 10] with three ergodic pieces and two least elements.

    The invariant pieces are [1, 4] (one mixing block of slope-±3 tents) and
    the touching pair [5.5, 7.5], [7.5, 9.5] (full slope-±2 tents).  The
    remaining branches are transient feeders: [0,1) and [4,5) fall into
    [1,4]; [5,5.5) and [9.5,10] fall into [5.5,9.5].
    """
    I = Interval
    B = AffineBranch
    return PiecewiseMap(
        I(0.0, 10.0),
        [
            B(I(0.0, 1.0), 3.0, 1.0),
            B(I(1.0, 1.5), 3.0, -2.0),
            B(I(1.5, 2.0), -3.0, 7.0),
            B(I(2.0, 2.5), 3.0, -3.5),
            B(I(2.5, 3.0), -3.0, 11.5),
            B(I(3.0, 3.5), 3.0, -7.5),
            B(I(3.5, 4.0), -3.0, 13.5),
            B(I(4.0, 5.0), -3.0, 16.0),
            B(I(5.0, 5.5), 4.0, -14.0),
            B(I(5.5, 6.5), 2.0, -5.5),
            B(I(6.5, 7.5), -2.0, 20.5),
            B(I(7.5, 8.5), 2.0, -7.5),
            B(I(8.5, 9.5), -2.0, 26.5),
            B(I(9.5, 10.0), -4.0, 46.5),
        ],
        name="example1",
    )


def example2_base_map(a: float = 0.1) -> PiecewiseMap:
    """Base map of [0, 1] with invariant intervals [a, 1/2-a] ∪ ... and [1/2+a, 1-a].

    Piecewise affine with interior slopes ±2; the two boundary branches have
    slope ±(1/(2a) - 3) and feed inward, so the whole image is [a, 1-a] and
    additive noise below ``a`` never escapes [0, 1].
    """
    if not (0.0 < a < 1.0 / 6.0):
        raise ValueError("need 0 < a < 1/6 for an expanding configuration")
    s = 1.0 / (2.0 * a) - 3.0
    if s < 1.0:
        raise ValueError("boundary slope below 1; pick a <= 1/8")
    I = Interval
    B = AffineBranch
    return PiecewiseMap(
        I(0.0, 1.0),
        [
            B(I(0.0, a), s, a, transient_ok=True),
            B(I(a, 0.25), -2.0, a + 0.5),
            B(I(0.25, 0.5 + a), 2.0, a - 0.5),
            B(I(0.5 + a, 0.75), -2.0, 2.0 + a),
            B(I(0.75, 1.0 - a), 2.0, a - 1.0),
            B(I(1.0 - a, 1.0), -s, -2.5 + 1.0 / (2.0 * a) + 2.0 * a, transient_ok=True),
        ],
        name=f"example2_base(a={a})",
    )


def example2_family(a: float = 0.1) -> SkewFamily:
    return SkewFamily(example2_base_map(a), name=f"example2(a={a})")


# -- JSON config round-trip ----------------------------------------------------


def map_to_config(pmap: PiecewiseMap) -> dict:
    cfg = {
        "domain": [pmap.domain.lo, pmap.domain.hi],
        "wrap": pmap.wrap,
        "branches": [
            {
                "dom": [b.dom.lo, b.dom.hi],
                "slope": b.slope,
                "intercept": b.intercept,
                **({"transient_ok": True} if b.transient_ok else {}),
            }
            for b in pmap.branches
        ],
    }
    if pmap.name:
        cfg["name"] = pmap.name
    return cfg


def map_from_config(cfg: dict) -> PiecewiseMap:
    domain = Interval(*map(float, cfg["domain"]))
    branches = [
        AffineBranch(
            Interval(*map(float, b["dom"])),
            float(b["slope"]),
            float(b["intercept"]),
            transient_ok=bool(b.get("transient_ok", False)),
        )
        for b in cfg["branches"]
    ]
    return PiecewiseMap(domain, branches, wrap=bool(cfg.get("wrap", False)), name=cfg.get("name"))


def save_map(pmap: PiecewiseMap, path) -> None:
    with open(path, "w") as fh:
        json.dump(map_to_config(pmap), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_map(path) -> PiecewiseMap:
    with open(path) as fh:
        return map_from_config(json.load(fh))
