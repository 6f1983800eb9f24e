import pytest

from affine_ifs import catalog


@pytest.fixture(scope="session")
def bv():
    return catalog.bv_triangle(0.5)


@pytest.fixture(scope="session")
def final():
    return catalog.final_example()
