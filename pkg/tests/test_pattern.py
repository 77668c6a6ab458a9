import random

import pytest

from lscr.errors import ConstraintSyntaxError, FocusUnused, UnknownLabelName, UnknownVertexName
from lscr.pattern import Var, match_all, parse_constraint, satisfies
from lscr.workload import random_constraint, random_graph


def names(g, vs):
    return {g.vertex_names[v] for v in vs}


def test_parse_s0(g, s0):
    assert s0.focus == Var("x")
    assert len(s0.patterns) == 2
    assert s0.concrete_vertices == {g.vertex_ids["v3"]}
    assert parse_constraint(s0.render(g), g).patterns == s0.patterns


@pytest.mark.parametrize(
    "text",
    [
        "SELECT ?x WHERE { ?x friendOf v3. v3 likes ?y }",
        'SELECT ?x WHERE { ?x <friendOf> "v3" . v3 likes ?y . }',
        "select ?x where {\n  ?x friendOf v3 .\n  v3 likes ?y\n}",
    ],
)
def test_parse_variants(g, s0, text):
    assert parse_constraint(text, g).patterns == s0.patterns


@pytest.mark.parametrize(
    "text, err",
    [
        ("SELECT ?x WHERE { }", FocusUnused),
        ("SELECT ?x WHERE { ?x dislikes v3 }", UnknownLabelName),
        ("SELECT ?x WHERE { ?x likes v9 }", UnknownVertexName),
        ("SELECT ?x WHERE { ?x likes }", ConstraintSyntaxError),
        ("SELECT x WHERE { ?x likes v3 }", ConstraintSyntaxError),
        ("SELECT ?x { ?x likes v3 }", ConstraintSyntaxError),
        ("SELECT ?x WHERE { ?x likes v3", ConstraintSyntaxError),
        ("SELECT ?x WHERE { ?y likes v3 }", FocusUnused),
        ("SELECT ?x WHERE { ?x likes v3 . ?a likes ?b }", ConstraintSyntaxError),
    ],
)
def test_parse_errors(g, text, err):
    with pytest.raises(err):
        parse_constraint(text, g)


def test_satisfies_fixture(g, s0):
    assert satisfies(g, g.vertex_ids["v1"], s0)
    assert not satisfies(g, g.vertex_ids["v0"], s0)
    assert satisfies(g, g.vertex_ids["v1"], s0)  # pure


def test_match_all_fixture(g, s0):
    assert names(g, match_all(g, s0)) == {"v1", "v2"}
    likes = parse_constraint("SELECT ?x WHERE { ?x likes ?y }", g)
    assert names(g, match_all(g, likes)) == {"v0", "v3"}
    hates_self = parse_constraint("SELECT ?x WHERE { ?x hates ?x }", g)
    assert match_all(g, hates_self) == []


def test_single_concrete_subject(g):
    c = parse_constraint("SELECT ?x WHERE { v0 likes ?y . ?x likes ?y }", g)
    assert names(g, match_all(g, c)) == {"v0"}


@pytest.mark.parametrize("seed", range(40))
def test_match_all_equals_exhaustive(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(10, 200), rng.randint(2, 6), rng.uniform(1, 4))
    c = random_constraint(rng, g)
    assert match_all(g, c) == [v for v in range(g.vertex_count) if satisfies(g, v, c)]
