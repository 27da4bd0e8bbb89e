import pathlib

import pytest

from ra.application import load_application_file
from ra.knowledge import KnowledgeBase

DATA = pathlib.Path(__file__).parent / "data"
GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.fixture(scope="session", autouse=True)
def _paranoid_knowledge_base():
    # Partition disjointness/coverage and proof/status consistency are
    # re-asserted after every mutation, suite-wide.
    KnowledgeBase.check_invariants = True
    yield
    KnowledgeBase.check_invariants = False


@pytest.fixture(scope="session")
def arith0():
    return load_application_file(DATA / "arith0.json")


@pytest.fixture(scope="session")
def arith0_core():
    return load_application_file(DATA / "arith0_core.json")


@pytest.fixture(scope="session")
def arith0_sym():
    return load_application_file(DATA / "arith0_sym.json")
