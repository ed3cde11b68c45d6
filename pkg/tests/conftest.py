from pathlib import Path

import pytest

from bgelearn.data import load_csv
from bgelearn.network import Dag
from bgelearn.priors import elicit, load_prior_spec

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample_inputs"


@pytest.fixture(scope="session")
def sample_dir():
    return SAMPLE_DIR


@pytest.fixture(scope="session")
def demo_dataset():
    """The bundled 20-case, three-variable demo table."""
    return load_csv(SAMPLE_DIR / "cases.csv")


@pytest.fixture(scope="session")
def demo_spec():
    return load_prior_spec(SAMPLE_DIR / "prior.json")


@pytest.fixture(scope="session")
def demo_prior(demo_spec):
    return elicit(demo_spec)


@pytest.fixture(scope="session")
def chain_dag():
    return Dag.from_edges(("x1", "x2", "x3"), [("x1", "x2"), ("x2", "x3")])
