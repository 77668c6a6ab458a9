import math
import random
from collections import deque

import pytest

from lscr.errors import FingerprintMismatch, FormatError, KTooLarge
from lscr.graph import graph_from_text
from lscr.index import (
    UNOWNED,
    bfs_partition,
    build_index,
    default_landmark_count,
    deserialize_index,
    index_check,
    index_stats,
    load_index,
    local_full_index,
    save_index,
    select_landmarks,
    serialize_index,
)
from lscr.labels import cms_oracle_all, label_set
from lscr.workload import GraphGenSpec, gen_graph, lcr_bfs, random_graph


def reach(g, s):
    seen, queue = {s}, deque([s])
    while queue:
        for _, w in g.out_adjacency[queue.popleft()]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def test_default_k():
    assert default_landmark_count(10000) == math.ceil(math.log2(10000) * 100) == 1329


def test_select_landmarks_fallback_is_seeded(g):
    a = select_landmarks(g, 2, seed=7)
    assert a == select_landmarks(g, 2, seed=7) and len(set(a)) == 2
    assert sorted(select_landmarks(g, g.vertex_count, seed=1)) == list(range(g.vertex_count))
    with pytest.raises(KTooLarge):
        select_landmarks(g, 6)


def test_select_landmarks_prefers_class_instances():
    lines = [f"i{c}_{j}\trdf:type\tC{c}" for c in range(9) for j in range(5)]
    lines += [f"x{j}\tp\tx{j + 1}" for j in range(40)]
    g = graph_from_text("\n".join(lines) + "\n")
    chosen = select_landmarks(g, 6, seed=3)
    classes = {g.vertex_names[v].split("_")[0] for v in chosen}
    # three random classes, two instances from each via round robin
    assert all(g.vertex_names[v].startswith("i") for v in chosen)
    assert len(classes) == 3
    more = select_landmarks(g, 20, seed=3)
    # the three classes supply 15 instances; the random fill may add more
    assert sum(g.vertex_names[v].startswith("i") for v in more) >= 15


def test_partition_single_landmark(g):
    a = bfs_partition(g, [g.vertex_ids["v0"]])
    assert a.owner == [g.vertex_ids["v0"]] * 5


def test_partition_two_landmarks(g):
    v0, v3 = g.vertex_ids["v0"], g.vertex_ids["v3"]
    a = bfs_partition(g, [v0, v3])
    assert a.owner[v0] == v0 and a.owner[v3] == v3
    for v, o in enumerate(a.owner):
        assert o in (v0, v3) and v in reach(g, o)


def test_partition_everyone_landmark(g):
    a = bfs_partition(g, list(range(g.vertex_count)))
    assert a.owner == list(range(g.vertex_count))


def test_fixture_local_index(g):
    ix = build_index(g, landmarks=[g.vertex_ids["v0"]])
    e = ix.entries[g.vertex_ids["v0"]]
    ls = lambda *n: label_set(g, n)  # noqa: E731
    assert e.internal[g.vertex_ids["v3"]] == {ls("friendOf")}
    assert e.internal[g.vertex_ids["v4"]] == {ls("friendOf", "likes"), ls("advisorOf", "follows"), ls("likes", "follows")}
    assert e.external_t == {} and e.correlation == {}
    v4 = g.vertex_ids["v4"]
    assert index_check(e.internal, v4, ls("likes", "follows"))
    assert not index_check(e.internal, v4, ls("friendOf"))
    assert not index_check(e.internal, g.vertex_ids["v0"], g.full_mask)


def test_sink_landmark_has_empty_entry():
    g = graph_from_text("a\tp\tb\n")
    ix = build_index(g, landmarks=[g.vertex_ids["b"]])
    e = ix.entries[g.vertex_ids["b"]]
    assert not e.internal and not e.external_t and not e.correlation


def test_empty_index(g):
    ix = build_index(g, k=0)
    assert ix.landmarks == [] and set(ix.owner) == {UNOWNED}


def check_consistency(g, ix):
    for u in ix.landmarks:
        scope = {v for v, o in enumerate(ix.owner) if o == u}
        ref = cms_oracle_all(g, u, scope)
        got = ix.entries[u].internal
        assert {v: f for v, f in ref.items() if v != u} == got
        assert len(got) <= len(scope)


@pytest.mark.parametrize("seed", range(25))
def test_consistency_with_oracle(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(8, 60), rng.randint(2, 5), rng.uniform(1, 3))
    k = rng.choice([1, 2, math.ceil(math.sqrt(g.vertex_count)), g.vertex_count])
    ix = build_index(g, k=k, seed=seed)
    check_consistency(g, ix)
    for u in ix.landmarks:
        for v, o in enumerate(ix.owner):
            if o == u:
                assert v in reach(g, u)
        # exit vertices are reachable under any superset of their key
        for labels, vs in ix.entries[u].external_t.items():
            probe = labels | rng.getrandbits(g.label_count)
            for v in vs:
                assert ix.owner[v] != u
                assert lcr_bfs(g, u, v, probe)[0]
        counted = sum(ix.entries[u].correlation.values())
        assert counted == len({v for vs in ix.entries[u].external_t.values() for v in vs if ix.owner[v] != UNOWNED})


def test_round_trip_and_determinism(g, tmp_path):
    ix = build_index(g, landmarks=[g.vertex_ids["v0"], g.vertex_ids["v3"]])
    p = tmp_path / "fixture.idx"
    size = save_index(ix, p)
    assert size == p.stat().st_size
    back = load_index(p, g)
    assert back.structurally_equal(ix)
    big = gen_graph(GraphGenSpec(2000, 3.6, 12, seed=4))
    assert serialize_index(build_index(big, seed=9)) == serialize_index(build_index(big, seed=9))


def test_load_errors(g, tmp_path):
    data = serialize_index(build_index(g, k=2, seed=1))
    other = graph_from_text("a\tp\tb\n")
    with pytest.raises(FingerprintMismatch):
        deserialize_index(data, other)
    with pytest.raises(FormatError):
        deserialize_index(data[:-5], g)
    with pytest.raises(FormatError):
        deserialize_index(b"NOTANIDX" + data[8:], g)
    with pytest.raises(FormatError):
        deserialize_index(data + b"\0", g)


def test_index_stats(g):
    ix = build_index(g, landmarks=[g.vertex_ids["v0"]])
    (row,) = index_stats(ix)
    assert row["owned"] == 5 and row["internal_vertices"] == 4
    # v1: 3 sets, v2: {likes} and {advisorOf}, v3: 1, v4: 3
    assert row["internal_label_sets"] == 3 + 2 + 1 + 3
