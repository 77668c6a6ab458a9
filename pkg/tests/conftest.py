from pathlib import Path

import pytest

from lscr.graph import load_graph
from lscr.labels import label_set
from lscr.pattern import parse_constraint
from lscr.search import LscrQuery

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_path():
    return DATA / "fixture_a.tsv"


@pytest.fixture(scope="session")
def s0_path():
    return DATA / "s0.q"


@pytest.fixture
def g(fixture_path):
    return load_graph(fixture_path)


@pytest.fixture
def s0(g, s0_path):
    return parse_constraint(s0_path.read_text(), g)


@pytest.fixture
def make_query(g, s0):
    def make(s, t, labels, constraint=None):
        return LscrQuery(g.vertex_ids[s], g.vertex_ids[t], label_set(g, labels), constraint or s0)

    return make
