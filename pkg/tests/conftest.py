import numpy as np
import pytest

from pseudorbit import (
    NoiseKernel,
    Partition,
    build_perturbed,
    build_ulam,
    doubling_map,
    example1_map,
    example2_base_map,
    verify_theorem1,
)


@pytest.fixture(scope="session")
def doubling():
    return doubling_map()


@pytest.fixture(scope="session")
def ex1():
    return example1_map()


@pytest.fixture(scope="session")
def ex2():
    return example2_base_map(0.1)


@pytest.fixture(scope="session")
def ex1_report_4000(ex1):
    # shared by the structure (criterion 2) and theorem (criterion 3) tests
    part = Partition(ex1.domain, 4000)
    kernel = NoiseKernel(eps=0.05, kind="uniform", boundary="strict")
    return verify_theorem1(ex1, part, 0.05, kernel)


@pytest.fixture(scope="session")
def doubling_1024_eps001(doubling):
    part = Partition(doubling.domain, 1024)
    kernel = NoiseKernel(eps=0.01, kind="uniform", boundary="wrap")
    return build_perturbed(doubling, part, kernel)


@pytest.fixture(scope="session")
def ex2_plain_4000(ex2):
    return build_ulam(ex2, Partition(ex2.domain, 4000))


def assert_row_stochastic(tm, tol=1e-10):
    assert np.abs(tm.row_sums() - 1.0).max() < tol
