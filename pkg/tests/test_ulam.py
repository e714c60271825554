import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from pseudorbit import (
    Interval,
    NoiseKernel,
    Partition,
    Partition2D,
    build_perturbed,
    build_ulam,
    build_ulam_2d,
    doubling_map,
    example1_map,
    example2_base_map,
    example2_family,
    load_matrix,
    noise_matrix,
    operator_distance,
    save_matrix,
    tent_map,
)
from pseudorbit.errors import BoundaryError, PartitionMismatchError, StructuralError

from test_maps import expanding_maps


def test_partition_basics():
    p = Partition(Interval(0.0, 2.0), 8)
    assert p.h == 0.25
    assert p.cell(0) == (0.0, 0.25)
    assert p.cell(7) == (1.75, 2.0)
    assert p.edges()[-1] == 2.0
    assert p.locate(2.0) == 7
    assert len(p.centers()) == 8
    with pytest.raises(ValueError):
        Partition(Interval(0.0, 1.0), 1)


def test_doubling_exact_matrix():
    d = doubling_map()
    P = build_ulam(d, Partition(d.domain, 4)).matrix.toarray()
    expected = np.array(
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
        ]
    )
    assert np.array_equal(P, expected)


def test_tent_exact_matrix():
    t = tent_map(0.5)
    P = build_ulam(t, Partition(t.domain, 4)).matrix.toarray()
    # second half mirrors the first
    assert np.array_equal(P[3], P[0])
    assert np.array_equal(P[2], P[1])
    assert np.array_equal(P[0], [0.5, 0.5, 0.0, 0.0])


@given(m=expanding_maps(), n=st.integers(2, 40))
@settings(max_examples=60, deadline=None)
def test_row_sums_on_random_maps(m, n):
    tm = build_ulam(m, Partition(m.domain, n))
    assert np.abs(tm.row_sums() - 1.0).max() < 1e-10


@pytest.mark.parametrize("kind", ["uniform", "triangular"])
def test_noise_matrix_rows(kind):
    part = Partition(Interval(0.0, 1.0), 64)
    k = NoiseKernel(eps=0.02, kind=kind, boundary="wrap")
    K = noise_matrix(part, k)
    assert np.abs(np.asarray(K.sum(axis=1)).ravel() - 1.0).max() < 1e-12
    # strict truncates near the edges instead of folding
    ks = NoiseKernel(eps=0.02, kind=kind, boundary="strict")
    Ks = noise_matrix(part, ks)
    sums = np.asarray(Ks.sum(axis=1)).ravel()
    assert sums[0] < 1.0 - 1e-6
    assert np.abs(sums[5:-5] - 1.0).max() < 1e-12


def test_noise_matrix_tridiagonal_small_eps():
    # eps <= h/2 reaches only the two neighbouring cells
    n, eps = 16, 1.0 / 64.0
    part = Partition(Interval(0.0, 1.0), n)
    k = NoiseKernel(eps=eps, kind="uniform", boundary="wrap")
    K = noise_matrix(part, k).toarray()
    h = part.h
    off = eps / (4.0 * h)
    diag = 1.0 - eps / (2.0 * h)
    for i in range(n):
        assert K[i, i] == pytest.approx(diag, abs=1e-14)
        assert K[i, (i + 1) % n] == pytest.approx(off, abs=1e-14)
        assert K[i, (i - 1) % n] == pytest.approx(off, abs=1e-14)
    assert np.count_nonzero(K) == 3 * n


def test_noise_matrix_converges_to_identity():
    part = Partition(Interval(0.0, 1.0), 32)
    prev = None
    for eps in (0.05, 0.01, 0.002, 0.0004):
        K = noise_matrix(part, NoiseKernel(eps=eps, kind="triangular", boundary="wrap"))
        dist = float(np.abs(K - sp.identity(32, format="csr")).sum(axis=1).max())
        if prev is not None:
            assert dist < prev
        prev = dist
    assert prev < 0.02


def test_perturbed_is_plain_times_kernel(doubling):
    part = Partition(doubling.domain, 128)
    k = NoiseKernel(eps=0.01, kind="uniform", boundary="wrap")
    P = build_ulam(doubling, part)
    K = noise_matrix(part, k)
    M = build_perturbed(doubling, part, k)
    diff = np.abs(M.matrix - P.matrix @ K)
    assert diff.nnz == 0 or diff.max() <= 1e-15  # dust dropping only
    assert np.abs(M.row_sums() - 1.0).max() < 1e-10


def test_perturbed_strict_requires_margin():
    # tent(0.5) maps the apex to the boundary, so strict noise must refuse
    t = tent_map(0.5)
    part = Partition(t.domain, 64)
    with pytest.raises(BoundaryError):
        build_perturbed(t, part, NoiseKernel(eps=0.01, kind="uniform", boundary="strict"))
    # example2 keeps a margin of a = 0.1 and is fine
    m2 = example2_base_map(0.1)
    tm = build_perturbed(
        m2, Partition(m2.domain, 64), NoiseKernel(eps=0.05, kind="uniform", boundary="strict")
    )
    assert np.abs(tm.row_sums() - 1.0).max() < 1e-10


def test_perturbed_wrap_flag_must_match(doubling):
    part = Partition(doubling.domain, 32)
    with pytest.raises(StructuralError):
        build_perturbed(doubling, part, NoiseKernel(eps=0.01, kind="uniform", boundary="strict"))


def test_operator_distance_properties(doubling):
    part = Partition(doubling.domain, 64)
    P = build_ulam(doubling, part)
    assert operator_distance(P, P) == 0.0
    M = build_perturbed(doubling, part, NoiseKernel(eps=0.01, kind="uniform", boundary="wrap"))
    d1 = operator_distance(P, M)
    assert d1 == operator_distance(M, P)
    assert 0.0 < d1 <= 2.0
    other = build_ulam(doubling, Partition(doubling.domain, 32))
    with pytest.raises(PartitionMismatchError):
        operator_distance(P, other)


def test_save_load_roundtrip(tmp_path, doubling):
    part = Partition(doubling.domain, 32)
    tm = build_perturbed(doubling, part, NoiseKernel(eps=0.03, kind="uniform", boundary="wrap"))
    path = tmp_path / "m.csv"
    save_matrix(tm, path)
    assert (tmp_path / "m.meta.json").exists()
    tm2 = load_matrix(path)
    assert tm2.partition.n == 32
    assert tm2.eps == 0.03
    assert tm2.kind == tm.kind
    assert (tm2.matrix != tm.matrix).nnz == 0
    # byte-identical rewrite
    p2 = tmp_path / "m2.csv"
    save_matrix(tm2, p2)
    assert p2.read_bytes() == path.read_bytes()


def test_2d_monte_carlo_matches_kron_when_decoupled():
    fam = example2_family(0.1)
    nx = ny = 40  # grid aligned with the branch endpoints of the base
    gx = Partition(Interval(0.0, 1.0), nx)
    g2 = Partition2D(gx, Partition(Interval(0.0, 1.0), ny))
    tm = build_ulam_2d(fam, g2, None, samples_per_cell=256, seed=3)
    Px = build_ulam(fam.base, gx).matrix
    Py = build_ulam(doubling_map(), Partition(Interval(0.0, 1.0), ny)).matrix
    K = sp.kron(Px, Py).tocsr()
    assert float(np.abs(tm.matrix - K).sum(axis=1).max()) < 1e-12
    assert np.abs(tm.row_sums() - 1.0).max() < 1e-10


def test_2d_monte_carlo_with_noise_is_stochastic():
    fam = example2_family(0.1)
    g2 = Partition2D(Partition(Interval(0.0, 1.0), 16), Partition(Interval(0.0, 1.0), 16))
    k = NoiseKernel(eps=1.0 / 120.0, kind="uniform", boundary="strict")
    tm = build_ulam_2d(fam, g2, k, samples_per_cell=64, seed=5)
    assert np.abs(tm.row_sums() - 1.0).max() < 1e-10
    tm2 = build_ulam_2d(fam, g2, k, samples_per_cell=64, seed=5)
    assert (tm.matrix != tm2.matrix).nnz == 0  # same seed, same matrix


def test_2d_samples_must_be_square():
    fam = example2_family(0.1)
    g2 = Partition2D(Partition(Interval(0.0, 1.0), 4), Partition(Interval(0.0, 1.0), 4))
    with pytest.raises(ValueError):
        build_ulam_2d(fam, g2, None, samples_per_cell=100 - 1, seed=0)


def test_example1_ulam_exact_on_markov_grid():
    m = example1_map()
    tm = build_ulam(m, Partition(m.domain, 400))
    assert np.abs(tm.row_sums() - 1.0).max() < 1e-12
