import pytest

from chensieve.bound_tables import BoundTable
from chensieve.constant_engine import compute_terms, reference_params


@pytest.fixture(scope="session")
def table():
    return BoundTable.build()


@pytest.fixture(scope="session")
def terms(table):
    return compute_terms(reference_params(), table)


@pytest.fixture(scope="session")
def terms_exact_omega(table):
    return compute_terms(reference_params(omega_cap_mode=False), table)


@pytest.fixture(scope="session")
def terms_no_savings():
    return compute_terms(reference_params(), double_sieve=False)
