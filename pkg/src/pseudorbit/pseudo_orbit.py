"""Pseudo-orbit reachability between ergodic components.

An eps-pseudo-orbit allows a jump of size < eps after every application of
the map, so on a partition the reachability structure is the digraph with an
edge i -> j whenever cell j meets the open eps-fattening of T(cell i).
Components ordered by pseudo-orbit reachability form a preorder; its sink
classes (the least elements) are exactly the components that survive
arbitrarily small additive noise, each owning one perturbed invariant
density supported in its forward-invariant hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EpsTooLargeError
from .geometry import grid_coord, snap_to_grid, wrap_interval
from .maps import PiecewiseMap
from .noise import NoiseKernel
from .spectral import ErgodicComponent, stationary_densities
from .ulam import Partition, build_perturbed, build_ulam


@dataclass
class CellGraph:
    """One-step eps-pseudo-orbit digraph over partition cells."""

    partition: Partition
    eps: float
    adjacency: sp.csr_matrix  # boolean pattern

    def successors(self, cells) -> np.ndarray:
        """Union of out-neighbourhoods of ``cells`` (the one-step image)."""
        cells = np.atleast_1d(np.asarray(cells, dtype=int))
        hit = np.zeros(self.partition.n, dtype=bool)
        indptr, indices = self.adjacency.indptr, self.adjacency.indices
        for c in cells:
            hit[indices[indptr[c] : indptr[c + 1]]] = True
        return np.flatnonzero(hit)

    def closure(self, cells) -> np.ndarray:
        """All cells reachable from ``cells`` by pseudo-orbits of length >= 1."""
        reach = np.zeros(self.partition.n, dtype=bool)
        frontier = np.atleast_1d(np.asarray(cells, dtype=int))
        while frontier.size:
            nxt = self.successors(frontier)
            fresh = nxt[~reach[nxt]]
            reach[fresh] = True
            frontier = fresh
        return np.flatnonzero(reach)


def build_cell_graph(pmap: PiecewiseMap, partition: Partition, eps: float) -> CellGraph:
    """Edges i -> j iff I_j meets the open ball B_eps(T(I_i)).

    Exact interval arithmetic on the affine branch pieces of each cell;
    image endpoints are grid-snapped so aligned configurations yield exact
    adjacency.  Open fattening: a cell only touching the closed boundary of
    the ball is not connected.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    n, h = partition.n, partition.h
    dom = partition.domain
    rows, cols = [], []

    def add_open_interval(i: int, u: float, v: float):
        u = snap_to_grid(u, dom.lo, h)
        v = snap_to_grid(v, dom.lo, h)
        if v <= u:
            return
        if pmap.wrap:
            full, parts = wrap_interval(u, v, dom.lo, dom.hi)
            if full:
                rows.extend([i] * n)
                cols.extend(range(n))
                return
            for a, b in parts:
                add_cells(i, a, b)
        else:
            add_cells(i, max(u, dom.lo), min(v, dom.hi))

    def add_cells(i: int, u: float, v: float):
        if v <= u:
            return
        jmin = max(0, math.floor(grid_coord(u, dom.lo, h)))
        jmax = min(n - 1, math.ceil(grid_coord(v, dom.lo, h)) - 1)
        if jmax >= jmin:
            rows.extend([i] * (jmax - jmin + 1))
            cols.extend(range(jmin, jmax + 1))

    for i in range(n):
        clo, chi = partition.cell(i)
        for plo, phi, b in pmap.pieces(clo, chi):
            a, c = b(plo), b(phi)
            img_lo, img_hi = (a, c) if a <= c else (c, a)
            img_lo = snap_to_grid(img_lo, dom.lo, h)
            img_hi = snap_to_grid(img_hi, dom.lo, h)
            add_open_interval(i, img_lo - eps, img_hi + eps)
    data = np.ones(len(rows), dtype=bool)
    adj = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    adj.data[:] = True
    return CellGraph(partition, eps, adj)


@dataclass
class ComponentDAG:
    """Pseudo-orbit preorder over ergodic components and its condensation."""

    components: list[ErgodicComponent]
    relation: np.ndarray  # relation[i, j]: component i reaches component j
    classes: list[list[int]]  # equivalence classes of mutual reachability
    class_edges: list[tuple[int, int]]  # condensation edges between classes
    least: list[int]  # indices of sink classes

    def class_support(self, c: int) -> np.ndarray:
        cells = np.concatenate([self.components[i].support for i in self.classes[c]])
        return np.unique(cells)


def component_relation(graph: CellGraph, components: list[ErgodicComponent]) -> ComponentDAG:
    """Order components by pseudo-orbit reachability and condense.

    The relation is reflexive by convention and transitive because the
    support cells of one component are mutually reachable in the cell graph
    (they already communicate through the unperturbed dynamics).
    """
    if not components:
        raise ValueError("no components to order")
    l = len(components)
    reaches = [graph.closure(c.support) for c in components]
    rel = np.zeros((l, l), dtype=bool)
    for i in range(l):
        hit = np.zeros(graph.partition.n, dtype=bool)
        hit[reaches[i]] = True
        for j in range(l):
            rel[i, j] = i == j or bool(hit[components[j].support].any())
    # mutual-reachability classes, ordered by smallest member
    assigned = np.full(l, -1)
    classes: list[list[int]] = []
    for i in range(l):
        if assigned[i] >= 0:
            continue
        cls = [j for j in range(l) if rel[i, j] and rel[j, i]]
        for j in cls:
            assigned[j] = len(classes)
        classes.append(cls)
    edges = set()
    for i in range(l):
        for j in range(l):
            if rel[i, j] and assigned[i] != assigned[j]:
                edges.add((int(assigned[i]), int(assigned[j])))
    least = [c for c in range(len(classes)) if not any(e[0] == c for e in edges)]
    return ComponentDAG(components, rel, classes, sorted(edges), least)


def forward_invariant_hull(
    pmap: PiecewiseMap,
    seed_cells,
    eps: float,
    partition: Partition,
    graph: CellGraph | None = None,
) -> np.ndarray:
    """Smallest eps-fattened forward-invariant cell set absorbing the seed.

    Iterates U <- cells meeting B_eps(T(U)) from the seed until the fixpoint;
    the returned set satisfies successors(U) ⊆ U.
    """
    if graph is None:
        graph = build_cell_graph(pmap, partition, eps)
    hull = graph.closure(seed_cells)
    assert np.isin(graph.successors(hull), hull).all()
    return hull


@dataclass
class LeastElementResult:
    class_index: int
    component_indices: list[int]
    hull: np.ndarray
    densities_inside: int
    inside_masses: list[float]


@dataclass
class TheoremReport:
    """Discrete check of the least-element characterization.

    For each least class: exactly one perturbed stationary density carries
    all but ``mass_tol`` of its mass inside the class hull.  Non-least
    classes carry at most ``mass_tol`` of perturbed stationary mass.  The
    perturbed density count never exceeds the unperturbed one, and each
    perturbed density's support contains the cells of exactly one least
    class.
    """

    eps: float
    n: int
    components: list[ErgodicComponent]
    dag: ComponentDAG
    perturbed: list[ErgodicComponent]
    least_results: list[LeastElementResult]
    nonleast_masses: dict[int, float]
    count_bound_ok: bool
    support_counts: list[int]
    mass_tol: float
    resolution_consistent: bool | None = None

    @property
    def passed(self) -> bool:
        per_least = all(r.densities_inside == 1 for r in self.least_results)
        nonleast = all(m < self.mass_tol for m in self.nonleast_masses.values())
        supports = all(c == 1 for c in self.support_counts)
        res = self.resolution_consistent in (None, True)
        return per_least and nonleast and supports and self.count_bound_ok and res

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n": self.n,
            "components": [
                {
                    "cells": [int(c.support[0]), int(c.support[-1])],
                    "size": int(c.support.size),
                }
                for c in self.components
            ],
            "classes": [list(map(int, cls)) for cls in self.dag.classes],
            "class_edges": [list(map(int, e)) for e in self.dag.class_edges],
            "least": list(map(int, self.dag.least)),
            "perturbed_count": len(self.perturbed),
            "least_results": [
                {
                    "class": int(r.class_index),
                    "components": list(map(int, r.component_indices)),
                    "hull_cells": [int(r.hull[0]), int(r.hull[-1])],
                    "densities_inside": int(r.densities_inside),
                    "inside_masses": [float(m) for m in r.inside_masses],
                }
                for r in self.least_results
            ],
            "nonleast_masses": {str(k): float(v) for k, v in self.nonleast_masses.items()},
            "count_bound": {
                "perturbed": len(self.perturbed),
                "unperturbed": len(self.components),
                "ok": bool(self.count_bound_ok),
            },
            "support_counts": list(map(int, self.support_counts)),
            "mass_tol": self.mass_tol,
            "resolution_consistent": self.resolution_consistent,
            "passed": bool(self.passed),
        }


def least_element_intervals(
    pmap: PiecewiseMap, partition: Partition, eps: float
) -> list[tuple[float, float]]:
    """Support hull [lo, hi] of every least class, sorted; used for the
    two-resolution consistency check."""
    P = build_ulam(pmap, partition)
    comps = stationary_densities(P)
    graph = build_cell_graph(pmap, partition, eps)
    dag = component_relation(graph, comps)
    out = []
    for c in dag.least:
        cells = dag.class_support(c)
        lo, _ = partition.cell(int(cells[0]))
        _, hi = partition.cell(int(cells[-1]))
        out.append((lo, hi))
    return sorted(out)


def check_two_resolutions(
    pmap: PiecewiseMap, partition: Partition, eps: float, rtol: float | None = None
) -> bool:
    """Least-element verdicts agree between n and 2n cells (within one
    coarse cell width on the support hull endpoints)."""
    coarse = least_element_intervals(pmap, partition, eps)
    fine = least_element_intervals(pmap, Partition(partition.domain, 2 * partition.n), eps)
    if len(coarse) != len(fine):
        return False
    tol = partition.h + 1e-12 if rtol is None else rtol
    return all(
        abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol for a, b in zip(coarse, fine)
    )


def verify_theorem1(
    pmap: PiecewiseMap,
    partition: Partition,
    eps: float,
    kernel: NoiseKernel,
    mass_tol: float = 1e-9,
    density_tol: float = 1e-12,
    two_resolution: bool = True,
) -> TheoremReport:
    """Check the least-element characterization on a discretization.

    Pipeline: unperturbed components -> pseudo-orbit order -> least classes
    and their hulls (raises if distinct hulls overlap: eps too large) ->
    perturbed stationary densities -> per-class mass accounting.
    """
    if abs(kernel.eps - eps) > 1e-15:
        raise ValueError("kernel radius differs from the requested eps")
    P = build_ulam(pmap, partition)
    comps = stationary_densities(P, tol=density_tol)
    graph = build_cell_graph(pmap, partition, eps)
    dag = component_relation(graph, comps)

    hulls = {}
    for c in dag.least:
        hulls[c] = forward_invariant_hull(pmap, dag.class_support(c), eps, partition, graph)
    taken = np.zeros(partition.n, dtype=bool)
    for c, hull in hulls.items():
        if taken[hull].any():
            raise EpsTooLargeError(
                f"least-element hulls overlap at eps = {eps}; shrink the noise"
            )
        taken[hull] = True

    P_eps = build_perturbed(pmap, partition, kernel)
    perturbed = stationary_densities(P_eps, tol=density_tol)

    least_results = []
    for c in dag.least:
        hull = hulls[c]
        masses = [comp.mass_on(hull) for comp in perturbed]
        inside = sum(1 for m in masses if m >= 1.0 - mass_tol)
        least_results.append(
            LeastElementResult(
                class_index=c,
                component_indices=dag.classes[c],
                hull=hull,
                densities_inside=inside,
                inside_masses=masses,
            )
        )

    nonleast_masses = {}
    for c in range(len(dag.classes)):
        if c in dag.least:
            continue
        cells = dag.class_support(c)
        nonleast_masses[c] = float(sum(comp.mass_on(cells) for comp in perturbed))

    support_counts = []
    for comp in perturbed:
        supp = np.zeros(partition.n, dtype=bool)
        supp[comp.support] = True
        contained = sum(
            1 for c in dag.least if bool(supp[dag.class_support(c)].all())
        )
        support_counts.append(contained)

    consistent = None
    if two_resolution:
        consistent = check_two_resolutions(pmap, partition, eps)

    return TheoremReport(
        eps=eps,
        n=partition.n,
        components=comps,
        dag=dag,
        perturbed=perturbed,
        least_results=least_results,
        nonleast_masses=nonleast_masses,
        count_bound_ok=len(perturbed) <= len(comps),
        support_counts=support_counts,
        mass_tol=mass_tol,
        resolution_consistent=consistent,
    )
