import pytest

from pntbounds.convert import anchor_discrepancy
from pntbounds.sieve import PrimeStore
from pntbounds.tables import anchor_1e15, packaged_table


@pytest.fixture(scope="session")
def small_store():
    return PrimeStore(limit=10**6)


@pytest.fixture(scope="session")
def big_store():
    return PrimeStore(limit=10**8)


@pytest.fixture(scope="session")
def theta_table():
    return packaged_table("theta")


@pytest.fixture(scope="session")
def pi_table():
    return packaged_table("pi")


@pytest.fixture(scope="session")
def psi_table():
    return packaged_table("psi")


@pytest.fixture(scope="session")
def disc_1e15():
    return anchor_discrepancy(anchor_1e15())
