import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudorbit import (
    Interval,
    NoiseKernel,
    Partition,
    build_cell_graph,
    build_ulam,
    check_two_resolutions,
    component_relation,
    doubling_map,
    example1_map,
    example2_base_map,
    forward_invariant_hull,
    least_element_intervals,
    stationary_densities,
    verify_theorem1,
)


def brute_force_successors(pmap, partition, eps, i, samples=2000):
    # dense sampling of the cell, fattened image collected pointwise
    lo, hi = partition.cell(i)
    xs = np.linspace(lo + 1e-12, hi - 1e-12, samples)
    hit = set()
    for x in xs:
        tx = pmap(x)
        for target in range(partition.n):
            clo, chi = partition.cell(target)
            if pmap.wrap:
                # open ball (tx-eps, tx+eps) against unwrapped cell copies
                span = pmap.domain.length
                meets = any(
                    max(tx - eps, clo + k * span) < min(tx + eps, chi + k * span)
                    for k in (-1, 0, 1)
                )
            else:
                meets = max(tx - eps, clo) < min(tx + eps, chi)
            if meets:
                hit.add(target)
    return sorted(hit)


def test_successors_doubling_oracle(doubling):
    part = Partition(doubling.domain, 8)
    g = build_cell_graph(doubling, part, 0.01)
    assert sorted(g.successors([0]).tolist()) == [0, 1, 2, 7]
    for i in range(8):
        expect = brute_force_successors(doubling, part, 0.01, i)
        assert sorted(g.successors([i]).tolist()) == expect


def test_successors_example2_oracle(ex2):
    part = Partition(ex2.domain, 40)
    g = build_cell_graph(ex2, part, 0.03)
    for i in range(0, 40, 3):
        expect = brute_force_successors(ex2, part, 0.03, i)
        assert sorted(g.successors([i]).tolist()) == expect


def test_eps_must_be_positive(doubling):
    with pytest.raises(ValueError):
        build_cell_graph(doubling, Partition(doubling.domain, 8), 0.0)


@given(
    eps_small=st.floats(0.001, 0.05),
    factor=st.floats(1.2, 4.0),
    n=st.sampled_from([16, 32, 50]),
)
@settings(max_examples=30, deadline=None)
def test_edges_grow_with_eps(eps_small, factor, n):
    m = example2_base_map(0.1)
    part = Partition(m.domain, n)
    g1 = build_cell_graph(m, part, eps_small)
    g2 = build_cell_graph(m, part, eps_small * factor)
    a1 = g1.adjacency.toarray()
    a2 = g2.adjacency.toarray()
    assert (a2 | ~a1).all()  # edge set is monotone in eps


def test_closure_reaches_fixpoint(doubling):
    part = Partition(doubling.domain, 32)
    g = build_cell_graph(doubling, part, 0.01)
    reach = g.closure([5])
    nxt = g.successors(reach)
    assert np.isin(nxt, reach).all()


def test_example1_classes_for_a_range_of_eps(ex1):
    # the two tent blocks touch at 7.5, so they form one class at every eps
    part = Partition(ex1.domain, 400)
    P = build_ulam(ex1, part)
    comps = stationary_densities(P)
    assert len(comps) == 3
    for eps in (0.01, 0.05, 0.2):
        g = build_cell_graph(ex1, part, eps)
        dag = component_relation(g, comps)
        assert dag.classes == [[0], [1, 2]]
        assert dag.least == [0, 1]
        assert dag.class_edges == []


def test_example2_order(ex2):
    part = Partition(ex2.domain, 240)
    P = build_ulam(ex2, part)
    comps = stationary_densities(P)
    assert len(comps) == 2
    g = build_cell_graph(ex2, part, 1.0 / 120.0)
    dag = component_relation(g, comps)
    assert dag.classes == [[0], [1]]
    assert dag.class_edges == [(0, 1)]  # left reaches right, not back
    assert dag.least == [1]


def test_example2_hull_endpoints(ex2):
    # right hull is (0.6 - eps, 0.9 + eps) up to one cell
    n = 240
    part = Partition(ex2.domain, n)
    eps = 1.0 / 120.0
    g = build_cell_graph(ex2, part, eps)
    seed = np.arange(part.locate(0.6), part.locate(0.9))
    hull = forward_invariant_hull(ex2, seed, eps, part, g)
    lo = part.cell(int(hull[0]))[0]
    hi = part.cell(int(hull[-1]))[1]
    assert lo == pytest.approx(0.6 - eps, abs=part.h + 1e-12)
    assert hi == pytest.approx(0.9 + eps, abs=part.h + 1e-12)
    # forward invariance
    assert np.isin(g.successors(hull), hull).all()


def test_hull_grows_from_left_to_right(ex2):
    # the left block is not least: its hull eventually swallows the right
    part = Partition(ex2.domain, 240)
    eps = 1.0 / 120.0
    g = build_cell_graph(ex2, part, eps)
    seed = np.arange(part.locate(0.1), part.locate(0.4))
    hull = forward_invariant_hull(ex2, seed, eps, part, g)
    right = np.arange(part.locate(0.6), part.locate(0.9))
    assert np.isin(right, hull).all()


def test_least_element_intervals_sorted(ex1):
    ivs = least_element_intervals(ex1, Partition(ex1.domain, 400), 0.05)
    assert len(ivs) == 2
    assert ivs[0][0] < ivs[1][0]
    # support hulls, not eps-fattened: the pair class spans [5.5, 9.5]
    assert ivs[0] == pytest.approx((1.0, 4.0), abs=0.025 + 1e-12)
    assert ivs[1] == pytest.approx((5.5, 9.5), abs=0.025 + 1e-12)


def test_two_resolution_consistency(ex1, ex2):
    assert check_two_resolutions(ex1, Partition(ex1.domain, 400), 0.05)
    assert check_two_resolutions(ex2, Partition(ex2.domain, 240), 1.0 / 120.0)


def test_large_eps_changes_the_order(ex1):
    # at eps = 0.6 the tent block reaches down into [1,4] (via the cells
    # below 5 that map onto it) but not conversely: the pair class loses
    # leastness and only one least element survives
    part = Partition(ex1.domain, 400)
    P = build_ulam(ex1, part)
    comps = stationary_densities(P)
    g = build_cell_graph(ex1, part, 0.6)
    dag = component_relation(g, comps)
    assert dag.classes == [[0], [1, 2]]
    assert dag.class_edges == [(1, 0)]
    assert dag.least == [0]


def test_eps_beyond_margin_rejected(ex1):
    # eps = 0.6 exceeds the boundary margin 0.5, so the strict perturbed
    # build refuses (noise would push mass out of [0, 10])
    from pseudorbit.errors import BoundaryError

    part = Partition(ex1.domain, 400)
    kernel = NoiseKernel(eps=0.6, kind="uniform", boundary="strict")
    with pytest.raises(BoundaryError):
        verify_theorem1(ex1, part, 0.6, kernel, two_resolution=False)


def test_kernel_eps_must_match(ex2):
    part = Partition(ex2.domain, 240)
    kernel = NoiseKernel(eps=0.01, kind="uniform", boundary="strict")
    with pytest.raises(ValueError):
        verify_theorem1(ex2, part, 0.02, kernel)


def test_theorem_report_serializes(ex2):
    part = Partition(ex2.domain, 240)
    eps = 1.0 / 120.0
    kernel = NoiseKernel(eps=eps, kind="uniform", boundary="strict")
    rep = verify_theorem1(ex2, part, eps, kernel, two_resolution=False)
    d = rep.to_dict()
    assert d["passed"] is True
    assert d["least"] == [1]
    assert d["perturbed_count"] == 1
    assert d["count_bound"]["ok"] is True
    import json

    json.dumps(d)  # must be plain-JSON serializable
