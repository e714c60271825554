"""Additive noise kernels with support exactly (-eps, eps).

A kernel is an even-ish probability density h on the line that vanishes
outside the open ball of radius eps and is strictly positive inside it, so
that one noisy step x -> T(x) + omega has transition density
p(x, y) = h(T(x) - y) supported exactly on the open eps-ball around T(x).

Three shapes are provided: ``uniform`` (flat 1/(2 eps)), ``triangular``
(hat with apex 1/eps at 0), and ``table`` (piecewise constant on equal
subintervals of [-eps, eps], all values positive).  Besides the density the
kernel exposes its CDF H and the second antiderivative G(t) = ∫_{-eps}^t H,
which is what the closed-form smoothing matrix integrals need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, DomainError
from .geometry import nearest_difference


def make_rng(seed, *key) -> np.random.Generator:
    """Philox generator (counter-based) derived from seed and spawn key."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NoiseKernel:
    """Noise density on (-eps, eps).

    Parameters
    ----------
    eps : float
        Noise radius, > 0.
    kind : {"uniform", "triangular", "table"}
    boundary : {"strict", "wrap"}
        How the perturbed dynamics treats the domain boundary: ``strict``
        forbids noise from crossing it, ``wrap`` identifies the endpoints
        (circle).
    table : tuple of float, optional
        For kind="table": positive weights over equal subintervals of
        [-eps, eps]; normalized at construction.
    """

    eps: float
    kind: str = "uniform"
    boundary: str = "strict"
    table: tuple | None = None

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")
        if self.kind not in ("uniform", "triangular", "table"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.boundary not in ("strict", "wrap"):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.kind == "table":
            if self.table is None or len(self.table) == 0:
                raise ValueError("table kernel needs a nonempty value table")
            vals = np.asarray(self.table, dtype=float)
            if np.any(vals <= 0.0):
                raise ValueError("table values must be strictly positive on the support")
            width = 2.0 * self.eps / len(vals)
            vals = vals / (vals.sum() * width)  # normalize to unit mass
            object.__setattr__(self, "table", tuple(vals))
        elif self.table is not None:
            raise ValueError("table only applies to kind='table'")

    # -- density / CDF / second antiderivative --------------------------------

    def density(self, u):
        """h(u); zero exactly when |u| >= eps."""
        u = np.asarray(u, dtype=float)
        e = self.eps
        inside = np.abs(u) < e
        if self.kind == "uniform":
            out = np.where(inside, 1.0 / (2.0 * e), 0.0)
        elif self.kind == "triangular":
            out = np.where(inside, (e - np.abs(u)) / (e * e), 0.0)
        else:
            vals = np.asarray(self.table)
            width = 2.0 * e / len(vals)
            idx = np.clip(((u + e) / width).astype(int), 0, len(vals) - 1)
            out = np.where(inside, vals[idx], 0.0)
        return out if out.ndim else float(out)

    def cdf(self, t):
        """H(t) = ∫_{-inf}^t h."""
        t = np.asarray(t, dtype=float)
        e = self.eps
        if self.kind == "uniform":
            out = np.clip((t + e) / (2.0 * e), 0.0, 1.0)
        elif self.kind == "triangular":
            s = np.clip(t, -e, e)
            out = np.where(
                s <= 0.0,
                (s + e) ** 2 / (2.0 * e * e),
                1.0 - (e - s) ** 2 / (2.0 * e * e),
            )
        else:
            vals = np.asarray(self.table)
            width = 2.0 * e / len(vals)
            cum = np.concatenate([[0.0], np.cumsum(vals) * width])
            s = np.clip(t, -e, e)
            idx = np.clip(((s + e) / width).astype(int), 0, len(vals) - 1)
            out = cum[idx] + vals[idx] * (s - (-e + idx * width))
            out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def cdf_integral(self, t):
        """G(t) = ∫_{-eps}^t H(s) ds; G = 0 left of the support, G(t) = t for t >= eps."""
        t = np.asarray(t, dtype=float)
        e = self.eps
        if self.kind == "uniform":
            s = np.clip(t, -e, e)
            core = (s + e) ** 2 / (4.0 * e)
            out = core + np.maximum(t - e, 0.0)
        elif self.kind == "triangular":
            s = np.clip(t, -e, e)
            ee = e * e
            neg = (s + e) ** 3 / (6.0 * ee)
            pos = e / 6.0 + s + ((e - s) ** 3 - e**3) / (6.0 * ee)
            core = np.where(s <= 0.0, neg, pos)
            out = core + np.maximum(t - e, 0.0)
        else:
            vals = np.asarray(self.table)
            m = len(vals)
            width = 2.0 * e / m
            edges = -e + width * np.arange(m + 1)
            cum = np.concatenate([[0.0], np.cumsum(vals) * width])  # H at edges
            # G at edges by accumulating the per-bin quadratic pieces
            g_edges = np.concatenate(
                [[0.0], np.cumsum(cum[:-1] * width + 0.5 * vals * width * width)]
            )
            s = np.clip(t, -e, e)
            idx = np.clip(((s + e) / width).astype(int), 0, m - 1)
            d = s - edges[idx]
            core = g_edges[idx] + cum[idx] * d + 0.5 * vals[idx] * d * d
            out = core + np.maximum(t - e, 0.0)
        return out if out.ndim else float(out)

    # -- dynamics --------------------------------------------------------------

    def transition_density(self, pmap, x: float, y: float) -> float:
        """Density of one noisy step from x landing at y: h(T(x) - y)."""
        dom = pmap.domain
        if not (dom.lo <= x <= dom.hi) or not (dom.lo <= y <= dom.hi):
            raise DomainError("transition density queried outside the domain")
        tx = pmap(x)
        if self.boundary == "wrap":
            d = nearest_difference(tx - y, dom.length)
        else:
            if tx - self.eps < dom.lo or tx + self.eps > dom.hi:
                raise BoundaryError(
                    f"noise ball around T({x}) = {tx} leaves the domain in strict mode"
                )
            d = tx - y
        return float(self.density(d))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw noise amplitudes; |omega| < eps almost surely."""
        e = self.eps
        if self.kind == "uniform":
            return rng.uniform(-e, e, size=size)
        if self.kind == "triangular":
            return e * (rng.random(size) + rng.random(size) - 1.0)
        vals = np.asarray(self.table)
        width = 2.0 * e / len(vals)
        probs = vals * width
        idx = rng.choice(len(vals), size=size, p=probs / probs.sum())
        return -e + (idx + rng.random(size)) * width


def kernel_from_config(cfg: dict) -> NoiseKernel:
    return NoiseKernel(
        eps=float(cfg["eps"]),
        kind=cfg.get("kind", "uniform"),
        boundary=cfg.get("boundary", "strict"),
        table=tuple(cfg["table"]) if cfg.get("table") else None,
    )


def kernel_to_config(kernel: NoiseKernel) -> dict:
    cfg = {"kind": kernel.kind, "eps": kernel.eps, "boundary": kernel.boundary}
    if kernel.table is not None:
        cfg["table"] = list(kernel.table)
    return cfg
