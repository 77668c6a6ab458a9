"""Build a local index on a small generated graph and look inside one landmark."""
import sys

from lscr.index import build_index, index_stats
from lscr.labels import format_label_set
from lscr.workload import GraphGenSpec, gen_graph


def main(n: int = 2000) -> None:
    g = gen_graph(GraphGenSpec(n, 3.0, 8, class_count=6, instances_per_class=20, seed=11))
    ix = build_index(g, seed=11)
    rows = index_stats(ix)
    owned = sum(r["owned"] for r in rows)
    print(f"{len(rows)} landmarks own {owned} of {g.vertex_count} vertices")
    print(f"stored internal label sets: {sum(r['internal_label_sets'] for r in rows)}")
    print(f"exit references: {sum(r['external_refs'] for r in rows)}")

    # the landmark with the largest subgraph makes the most interesting example
    u = max(ix.landmarks, key=lambda x: len(ix.entries[x].internal))
    entry = ix.entries[u]
    print(f"\nlandmark {g.vertex_names[u]} owns {len(entry.internal)} other vertices")
    for v, fam in list(entry.internal.items())[:5]:
        sets = ", ".join(format_label_set(g, m) for m in fam)
        print(f"  {g.vertex_names[v]:>8}: {sets}")
    print(f"exit label sets: {len(entry.external_t)}")
    for labels, vs in list(entry.external_t.items())[:3]:
        names = ", ".join(g.vertex_names[x] for x in vs[:4])
        print(f"  {format_label_set(g, labels)} -> {names}{' ...' if len(vs) > 4 else ''}")
    near = sorted(entry.correlation.items(), key=lambda kv: -kv[1])[:3]
    print("most correlated neighbours:", ", ".join(f"{g.vertex_names[o]} ({c})" for o, c in near))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2000)
