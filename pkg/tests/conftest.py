"""Shared fixtures: the expensive series/table/partition objects are built
once per session and reused by the unit and acceptance tests."""

import pytest

from catflux.cumulants import CorrelationEngine, build_table
from catflux.partition import CatCoder, build_cat_partition, transition_matrix
from catflux.torus import HarmonicForce


@pytest.fixture(scope="session")
def single_force():
    return HarmonicForce.single_harmonic()


@pytest.fixture(scope="session")
def two_force():
    return HarmonicForce.two_harmonics()


@pytest.fixture(scope="session")
def single_engine(single_force):
    return CorrelationEngine(single_force, max_order=4)


@pytest.fixture(scope="session")
def single_table(single_force, single_engine):
    return build_table(single_force, 4, engine=single_engine)


@pytest.fixture(scope="session")
def two_engine(two_force):
    return CorrelationEngine(two_force, max_order=3)


@pytest.fixture(scope="session")
def two_table(two_force, two_engine):
    return build_table(two_force, 3, engine=two_engine)


@pytest.fixture(scope="session")
def cat_partition():
    return build_cat_partition()


@pytest.fixture(scope="session")
def cat_matrix(cat_partition):
    return transition_matrix(cat_partition)


@pytest.fixture(scope="session")
def cat_coder(cat_partition, cat_matrix):
    return CatCoder(cat_partition, cat_matrix)
