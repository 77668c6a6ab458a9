"""Walk through the five-vertex social graph used throughout the tests.

Prints the minimal label sets between a few pairs, the vertices matching the
sample pattern, and how each algorithm answers a handful of queries.
"""
from pathlib import Path

from lscr.graph import load_graph
from lscr.index import build_index
from lscr.informed import ins_query
from lscr.labels import cms_oracle, format_label_set, label_set
from lscr.pattern import match_all, parse_constraint
from lscr.search import LscrQuery, uis_query, uis_star_query

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def main() -> None:
    g = load_graph(DATA / "fixture_a.tsv")
    s0 = parse_constraint((DATA / "s0.q").read_text(), g)
    v = g.vertex_ids
    print(f"{g.vertex_count} vertices, {g.edge_count} edges, labels {', '.join(g.label_names)}")

    for s, t in [("v0", "v3"), ("v0", "v4"), ("v3", "v1")]:
        fam = sorted(format_label_set(g, m) for m in cms_oracle(g, v[s], v[t]))
        print(f"minimal label sets {s} -> {t}: {', '.join(fam) or '(unreachable)'}")

    vsg = match_all(g, s0)
    print("pattern:", s0.render(g))
    print("matching vertices:", sorted(g.vertex_names[x] for x in vsg))

    ix = build_index(g, landmarks=[v["v0"], v["v3"]])
    for s, t, labels in [
        ("v0", "v4", ["likes", "follows"]),
        ("v0", "v3", ["likes", "follows"]),
        ("v3", "v4", ["likes", "hates", "friendOf"]),
    ]:
        q = LscrQuery(v[s], v[t], label_set(g, labels), s0)
        a = uis_query(g, q, witness=True)
        b = uis_star_query(g, q, vsg)
        c = ins_query(g, ix, q, vsg)
        print(f"\n{s} -> {t} using {{{','.join(labels)}}}: uis={a.value} uis*={b.value} ins={c.value}")
        if a.witness:
            hops = " ".join(f"-{g.label_names[l]}-> {g.vertex_names[w]}" for _, l, w in a.witness)
            print(f"  path: {s} {hops}")
        print(f"  passed vertices: uis={a.stats.passed_vertices} uis*={b.stats.passed_vertices} ins={c.stats.passed_vertices}")


if __name__ == "__main__":
    main()
