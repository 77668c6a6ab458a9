"""Command-line entry point: ``lscr {ingest,index,query,bench,gen}``.

``query`` exits 0 when the answer is true, 1 when false and 2 on any error.
"""
from __future__ import annotations

import argparse
import re
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import LscrError
from .graph import KnowledgeGraph, load_graph
from .index import build_index, index_stats, load_index, save_index
from .informed import ins_query
from .labels import label_set
from .pattern import match_all, parse_constraint
from .search import LscrQuery, QueryAnswer, uis_query, uis_star_query
from .workload import (
    GraphGenSpec,
    QueryGenSpec,
    gen_graph,
    gen_queries,
    read_queryset,
    write_queryset,
)

ALGOS = ("uis", "uis-star", "ins")
EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2
EXIT_DISAGREE = 3


class UsageError(LscrError):
    pass


def run_algo(algo: str, g: KnowledgeGraph, q: LscrQuery, vsg, ix=None, rho_invert=False) -> QueryAnswer:
    if algo == "uis":
        return uis_query(g, q)
    if algo == "uis-star":
        return uis_star_query(g, q, vsg)
    if algo == "ins":
        if ix is None:
            raise UsageError("--algo ins requires --index")
        return ins_query(g, ix, q, vsg, rho_invert=rho_invert)
    raise UsageError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGOS)}")


# ---------------------------------------------------------------------------
# bench report


@dataclass(frozen=True)
class BenchRow:
    algo: str
    q: int
    answer: bool
    time_us: int
    passed: int

    def machine_line(self) -> str:
        return (
            f"RESULT algo={self.algo} q={self.q} answer={'T' if self.answer else 'F'} "
            f"time_us={self.time_us} passed={self.passed}"
        )


_RESULT = re.compile(
    r"^RESULT algo=(\S+) q=(\d+) answer=([TF]) time_us=(\d+) passed=(\d+)$"
)


def parse_result_lines(text: str) -> list[BenchRow]:
    rows = []
    for line in text.splitlines():
        m = _RESULT.match(line.strip())
        if m:
            algo, q, ans, us, passed = m.groups()
            rows.append(BenchRow(algo, int(q), ans == "T", int(us), int(passed)))
    return rows


@dataclass
class BenchReport:
    rows: dict[str, list[BenchRow]] = field(default_factory=dict)
    fingerprint: int = 0
    k: int | None = None
    seed: int | None = None

    def summary(self, algo: str) -> dict[str, float]:
        rs = self.rows[algo]
        times = [r.time_us for r in rs] or [0]
        passed = [r.passed for r in rs] or [0]
        return {
            "queries": len(rs),
            "mean_us": statistics.fmean(times),
            "median_us": statistics.median(times),
            "mean_passed": statistics.fmean(passed),
        }

    def disagreements(self) -> list[int]:
        algos = list(self.rows)
        if len(algos) < 2:
            return []
        bad = []
        for i, row in enumerate(self.rows[algos[0]]):
            if any(self.rows[a][i].answer != row.answer for a in algos[1:]):
                bad.append(row.q)
        return bad

    def table(self) -> str:
        lines = [
            f"graph {self.fingerprint:016x}  k={self.k}  seed={self.seed}",
            f"{'algo':<10}{'queries':>8}{'mean_us':>14}{'median_us':>14}{'mean_passed':>14}",
        ]
        for algo in self.rows:
            s = self.summary(algo)
            lines.append(
                f"{algo:<10}{s['queries']:>8}{s['mean_us']:>14.1f}"
                f"{s['median_us']:>14.1f}{s['mean_passed']:>14.1f}"
            )
        return "\n".join(lines)

    def machine_lines(self) -> str:
        return "\n".join(r.machine_line() for rows in self.rows.values() for r in rows)


def _warm_up(g: KnowledgeGraph) -> int:
    total = 0
    for adj in g.out_adjacency:
        total += len(adj)
    return total


def run_bench(
    g: KnowledgeGraph,
    queries: Sequence[LscrQuery],
    algos: Sequence[str],
    ix=None,
    rho_invert: bool = False,
) -> BenchReport:
    _warm_up(g)
    report = BenchReport(fingerprint=g.fingerprint(), k=getattr(ix, "k", None), seed=getattr(ix, "seed", None))
    vsg_cache: dict[int, list[int]] = {}
    for algo in algos:
        rows = []
        for i, q in enumerate(queries):
            key = id(q.constraint)
            if key not in vsg_cache:
                vsg_cache[key] = match_all(g, q.constraint)
            ans = run_algo(algo, g, q, vsg_cache[key], ix, rho_invert)
            rows.append(
                BenchRow(algo, i, ans.value, round(ans.stats.wall_time * 1e6), ans.stats.passed_vertices)
            )
        report.rows[algo] = rows
    return report


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args) -> int:
    g = load_graph(args.graph)
    print(f"vertices={g.vertex_count}")
    print(f"edges={g.edge_count}")
    print(f"labels={g.label_count}")
    print(f"classes={len(g.schema.classes)}")
    print(f"fingerprint={g.fingerprint():016x}")
    return 0


def cmd_index_build(args) -> int:
    g = load_graph(args.graph)
    ix = build_index(g, k=args.k, seed=args.seed)
    size = save_index(ix, args.out)
    print(f"landmarks={len(ix.landmarks)}")
    print(f"build_time_s={ix.build_time:.3f}")
    print(f"size_bytes={size}")
    return 0


def cmd_index_stats(args) -> int:
    g = load_graph(args.graph)
    ix = load_index(args.index, g)
    rows = index_stats(ix)
    cols = list(rows[0]) if rows else ["landmark"]
    print("\t".join(cols))
    for row in rows:
        row = dict(row, landmark=g.vertex_names[row["landmark"]])
        print("\t".join(str(row[c]) for c in cols))
    return 0


def _vertex(g: KnowledgeGraph, name: str) -> int:
    try:
        return g.vertex_ids[name]
    except KeyError:
        raise UsageError(f"unknown vertex {name!r}") from None


def cmd_query(args) -> int:
    if args.algo == "ins" and not args.index:
        raise UsageError("--algo ins requires --index")
    g = load_graph(args.graph)
    constraint = parse_constraint(Path(args.constraint).read_text(encoding="utf-8"), g)
    names = [x for x in args.labels.split(",") if x] if args.labels else []
    q = LscrQuery(_vertex(g, args.source), _vertex(g, args.target), label_set(g, names), constraint)
    ix = load_index(args.index, g) if args.index else None
    vsg = match_all(g, constraint) if args.algo != "uis" else []
    ans = run_algo(args.algo, g, q, vsg, ix, args.rho_invert)
    print(ans.render())
    return EXIT_TRUE if ans.value else EXIT_FALSE


def cmd_bench(args) -> int:
    algos = [a for a in args.algo.split(",") if a]
    for a in algos:
        if a not in ALGOS:
            raise UsageError(f"unknown algorithm {a!r}")
    if "ins" in algos and not args.index:
        raise UsageError("benchmarking ins requires --index")
    g = load_graph(args.graph)
    ix = load_index(args.index, g) if args.index else None
    items = read_queryset(args.queryset, g)
    report = run_bench(g, [q for q, _, _ in items], algos, ix, args.rho_invert)
    text = report.table() + "\n" + report.machine_lines()
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    bad = report.disagreements()
    for algo, rows in report.rows.items():
        for row, (_, expected, _) in zip(rows, items):
            if expected is not None and row.answer != expected:
                bad.append(row.q)
    if bad:
        print(f"answer mismatch on queries {sorted(set(bad))}", file=sys.stderr)
        return EXIT_DISAGREE
    return 0


def cmd_gen_graph(args) -> int:
    spec = GraphGenSpec(
        vertex_count=args.vertices,
        density=args.density,
        label_universe=args.label_universe,
        class_count=args.classes,
        instances_per_class=args.instances,
        seed=args.seed,
    )
    g = gen_graph(spec)
    g.dump(args.out)
    print(f"vertices={g.vertex_count} edges={g.edge_count} labels={g.label_count}")
    return 0


def cmd_gen_queries(args) -> int:
    g = load_graph(args.graph)
    out = Path(args.out)
    if args.constraint:
        constraint = parse_constraint(Path(args.constraint).read_text(encoding="utf-8"), g)
        spec = QueryGenSpec(args.true_count, args.false_count, constraint=constraint, seed=args.seed)
        ref = str(Path(args.constraint).resolve())
    else:
        if args.magnitude is None:
            raise UsageError("gen queries needs --constraint or a magnitude")
        spec = QueryGenSpec(args.true_count, args.false_count, magnitude=args.magnitude, seed=args.seed)
        ref = None
    qs = gen_queries(g, spec)
    if ref is None:
        cpath = out.with_suffix(".q")
        cpath.write_text(qs.constraint.render(g) + "\n", encoding="utf-8")
        ref = cpath.name
    write_queryset(out, g, [(x.query, x.expected) for x in qs.all], ref)
    print(f"true={len(qs.true_queries)} false={len(qs.false_queries)} constraint={ref}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lscr", description="Label and substructure constrained reachability")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="load a triple file and print its summary")
    s.add_argument("--graph", required=True)
    s.set_defaults(func=cmd_ingest)

    ix = sub.add_parser("index", help="build or inspect a local index").add_subparsers(dest="action", required=True)
    s = ix.add_parser("build")
    s.add_argument("--graph", required=True)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_index_build)
    s = ix.add_parser("stats")
    s.add_argument("--graph", required=True)
    s.add_argument("--index", required=True)
    s.set_defaults(func=cmd_index_stats)

    s = sub.add_parser("query", help="answer a single query")
    s.add_argument("--graph", required=True)
    s.add_argument("--index")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--labels", default="")
    s.add_argument("--constraint", required=True)
    s.add_argument("--algo", choices=ALGOS, default="uis-star")
    s.add_argument("--rho-invert", action="store_true")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("bench", help="run a query set through one or more algorithms")
    s.add_argument("queryset")
    s.add_argument("--graph", required=True)
    s.add_argument("--index")
    s.add_argument("--algo", default=",".join(ALGOS), help="comma list of algorithms")
    s.add_argument("--out")
    s.add_argument("--rho-invert", action="store_true")
    s.set_defaults(func=cmd_bench)

    gen = sub.add_parser("gen", help="generate graphs or query sets").add_subparsers(dest="what", required=True)
    s = gen.add_parser("graph")
    s.add_argument("vertices", type=int)
    s.add_argument("density", type=float)
    s.add_argument("label_universe", type=int)
    s.add_argument("classes", type=int, nargs="?", default=10)
    s.add_argument("instances", type=int, nargs="?", default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_graph)
    s = gen.add_parser("queries")
    s.add_argument("true_count", type=int)
    s.add_argument("false_count", type=int)
    s.add_argument("magnitude", type=int, nargs="?")
    s.add_argument("--graph", required=True)
    s.add_argument("--constraint")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_queries)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0
    try:
        return args.func(args)
    except (LscrError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e, UsageError):
            parser.print_usage(sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
