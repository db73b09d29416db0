import sys
from pathlib import Path

import pytest
from hypothesis import settings

from verlinde_tools import catalog
from verlinde_tools.cli_io import load_fdata

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
GOLDEN = TESTS / "golden"

# the fixture builder lives beside the tests and is imported as a plain module
sys.path.insert(0, str(TESTS))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ising():
    return catalog.gen_ising()


@pytest.fixture(scope="session")
def fibonacci():
    return catalog.gen_fibonacci()


@pytest.fixture(scope="session")
def ising_ft(ising):
    return load_fdata(FIXTURES / "ising_fdata.json", ising)


@pytest.fixture(scope="session")
def fibonacci_ft(fibonacci):
    return load_fdata(FIXTURES / "fibonacci_fdata.json", fibonacci)
