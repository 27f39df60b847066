import numpy as np
import pytest

from mhfem import build_uniform_mesh, get_example, solve_all_modes
from mhfem.assembly import assemble


@pytest.fixture(scope="session")
def mesh4():
    return build_uniform_mesh(4)


@pytest.fixture(scope="session")
def mesh8():
    return build_uniform_mesh(8)


@pytest.fixture(scope="session")
def ex1_small():
    """Example 1 solved on a coarse grid with three modes."""
    ex = get_example(1)
    mesh = build_uniform_mesh(8)
    return solve_all_modes(ex.spec(2), mesh, tol=1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def mats4(mesh4):
    return assemble(mesh4)
