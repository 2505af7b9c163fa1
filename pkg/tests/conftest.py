import pytest

from zmslab.divisor import build_divisor_table
from zmslab.quadrature import QuadratureCheckpointStore


@pytest.fixture(scope="session")
def small_table():
    return build_divisor_table(10 ** 5)


@pytest.fixture(scope="session")
def table():
    return build_divisor_table(10 ** 7)


@pytest.fixture(scope="session")
def store(table):
    return QuadratureCheckpointStore(table, t_max=2.0e4)


@pytest.fixture(scope="session")
def store_half(table, store):
    return QuadratureCheckpointStore(table, h=store.h / 2, t_max=2.0e4)
