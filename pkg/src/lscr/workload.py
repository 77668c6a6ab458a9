"""Synthetic graphs, controlled query workloads, and an independent brute-force oracle."""
from __future__ import annotations

import itertools
import math
import os
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import SpecInvalid, Timeout, Unachievable
from .graph import KnowledgeGraph
from .labels import label_names, label_set
from .pattern import SubstructureConstraint, TriplePattern, Var, match_all, parse_constraint, satisfies
from .search import LscrQuery, uis_query

if TYPE_CHECKING:
    pass

TYPE_PREDICATE = "rdf:type"
SUBCLASS_PREDICATE = "rdfs:subClassOf"
ZIPF_EXPONENT = 1.1

BANDS = ((0.2, 0.4), (0.4, 0.6), (0.6, 0.8))
FALSE_TYPES = ("label", "substructure", "both")
LABEL_REDRAWS = 5


# ---------------------------------------------------------------------------
# graph generation


@dataclass(frozen=True)
class GraphGenSpec:
    vertex_count: int
    density: float
    label_universe: int
    class_count: int = 10
    instances_per_class: int = 10
    seed: int = 0
    blocks: int | None = None
    locality: float = 0.9


def gen_graph(spec: GraphGenSpec) -> KnowledgeGraph:
    """Schema-bearing scale-free digraph.

    Instances point at their class with ``rdf:type``; classes form a random
    ``rdfs:subClassOf`` tree; every other edge has a uniformly random source, a
    preferential-attachment target and a Zipf-distributed label.

    Entities are split into consecutive blocks.  An edge stays inside its
    source's block with probability ``locality`` and otherwise points to a
    later block, never an earlier one, so reach sets vary widely in size.
    """
    n, c, ipc = spec.vertex_count, spec.class_count, spec.instances_per_class
    if n <= 0 or c <= 0 or ipc <= 0 or spec.density <= 0:
        raise SpecInvalid("counts and density must be positive")
    if not 2 <= spec.label_universe <= 64:
        raise SpecInvalid("label universe must be in [2, 64]")
    entities = n - c
    if entities < c * ipc or entities < 2:
        raise SpecInvalid("not enough vertices for the requested classes and instances")
    schema_labels = 2 if c > 1 else 1
    plain = spec.label_universe - schema_labels
    if plain < 1:
        raise SpecInvalid("label universe leaves no room for non-schema labels")
    target_edges = round(spec.density * n)
    mandatory = (c - 1) + entities
    if target_edges < mandatory:
        raise SpecInvalid(f"density too low: need at least {mandatory} edges, got {target_edges}")
    blocks = spec.blocks or max(1, round(math.sqrt(entities) / 8))
    if not 1 <= blocks <= entities or not 0.0 <= spec.locality <= 1.0:
        raise SpecInvalid("blocks must be in [1, entities] and locality in [0, 1]")

    rng = random.Random(spec.seed)
    cls = [f"C{i}" for i in range(c)]
    ent = [f"e{i}" for i in range(entities)]
    predicates = [f"p{i}" for i in range(plain)]
    cum, acc = [], 0.0
    for i in range(plain):
        acc += 1.0 / (i + 1) ** ZIPF_EXPONENT
        cum.append(acc)

    seen: set[tuple[str, str, str]] = set()
    triples: list[tuple[str, str, str]] = []

    def add(s: str, p: str, o: str) -> bool:
        key = (s, p, o)
        if key in seen:
            return False
        seen.add(key)
        triples.append(key)
        return True

    for i in range(1, c):
        add(cls[i], SUBCLASS_PREDICATE, cls[rng.randrange(i)])
    typed = rng.sample(range(entities), c * ipc)
    for j, e in enumerate(typed):
        add(ent[e], TYPE_PREDICATE, cls[j // ipc])

    block_of = [e * blocks // entities for e in range(entities)]
    # preferential attachment: one slot per in-edge plus one, kept per block
    pools: list[list[int]] = [[] for _ in range(blocks)]
    for e in range(entities):
        pools[block_of[e]].append(e)
    untyped = sorted(set(range(entities)) - set(typed))
    forced_labels = iter(range(plain))

    def random_edge(src: int) -> bool:
        lab = next(forced_labels, None)
        if lab is None:
            lab = rng.choices(range(plain), cum_weights=cum)[0]
        b = block_of[src]
        if rng.random() >= spec.locality:
            b = rng.randrange(b, blocks)
        pool = pools[b]
        dst = pool[rng.randrange(len(pool))]
        if dst == src:
            return False
        if add(ent[src], predicates[lab], ent[dst]):
            pool.append(dst)
            return True
        return False

    for e in untyped:
        while not random_edge(e):
            pass
    attempts = 0
    while len(triples) < target_edges:
        random_edge(rng.randrange(entities))
        attempts += 1
        if attempts > 50 * target_edges:
            raise SpecInvalid("could not place the requested number of distinct edges")
    return KnowledgeGraph.from_triples(triples)


# ---------------------------------------------------------------------------
# independent oracle


def lcr_reachable_set(g: KnowledgeGraph, s: int, mask: int) -> set[int]:
    seen = {s}
    queue = deque([s])
    out = g.out_adjacency
    while queue:
        u = queue.popleft()
        for l, w in out[u]:
            if mask >> l & 1 and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def lcr_bfs(g: KnowledgeGraph, s: int, t: int, mask: int) -> tuple[bool, set[int]]:
    """Plain label-constrained BFS; returns (reached, visited)."""
    if s == t:
        return True, {s}
    seen = {s}
    queue = deque([s])
    out = g.out_adjacency
    while queue:
        u = queue.popleft()
        for l, w in out[u]:
            if mask >> l & 1 and w not in seen:
                if w == t:
                    seen.add(w)
                    return True, seen
                seen.add(w)
                queue.append(w)
    return False, seen


def oracle_lscr(g: KnowledgeGraph, q: LscrQuery, vsg: Sequence[int] | None = None) -> bool:
    """Two-procedure check: some V(S,G) vertex reachable from s that reaches t.

    ``vsg`` defaults to a per-vertex evaluation of the constraint.  A failed
    BFS towards t rules out every vertex it visited, so those candidates are
    skipped.
    """
    s, t, mask = q.source, q.target, q.labels
    if vsg is None:
        vsg = [v for v in range(g.vertex_count) if satisfies(g, v, q.constraint)]
    if s == t:
        return s in set(vsg)
    from_s = lcr_reachable_set(g, s, mask)
    dead: set[int] = set()
    for v in vsg:
        if v not in from_s or v in dead:
            continue
        ok, visited = lcr_bfs(g, v, t, mask)
        if ok:
            return True
        dead |= visited
    return False


def _reverse_reachable(g: KnowledgeGraph, t: int, mask: int) -> set[int]:
    seen = {t}
    queue = deque([t])
    inn = g.in_adjacency
    while queue:
        u = queue.popleft()
        for l, w in inn[u]:
            if mask >> l & 1 and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _structure_reachable(g: KnowledgeGraph, s: int, t: int, vsg: Sequence[int]) -> bool:
    fwd = lcr_reachable_set(g, s, g.full_mask)
    if not any(v in fwd for v in vsg):
        return False
    bwd = _reverse_reachable(g, t, g.full_mask)
    return any(v in fwd and v in bwd for v in vsg)


def _false_kind(label_ok: bool, struct_ok: bool) -> str:
    if not label_ok:
        return "label" if struct_ok else "both"
    return "mixed" if struct_ok else "substructure"


def classify_false(g: KnowledgeGraph, q: LscrQuery, vsg: Sequence[int]) -> str:
    """Which way a false query fails.

    ``"mixed"`` marks queries where both a label-valid path and a path
    through V(S,G) exist but never coincide; they fit none of the three
    balanced types.
    """
    label_ok = q.target in lcr_reachable_set(g, q.source, q.labels)
    return _false_kind(label_ok, _structure_reachable(g, q.source, q.target, vsg))


# ---------------------------------------------------------------------------
# constraints of controlled magnitude


def _incident_patterns(g: KnowledgeGraph, v: int, focus: Var) -> list[TriplePattern]:
    pats: dict[TriplePattern, None] = {}
    for i, (l, w) in enumerate(g.out_adjacency[v]):
        if w != v:
            pats[TriplePattern(focus, l, w)] = None
        pats[TriplePattern(focus, l, Var(f"o{l}"))] = None
    for l, u in g.in_adjacency[v]:
        if u != v:
            pats[TriplePattern(u, l, focus)] = None
        pats[TriplePattern(Var(f"i{l}"), l, focus)] = None
    return list(pats)


def gen_constraint_with_magnitude(
    g: KnowledgeGraph, m: int, seed: int = 0, restarts: int = 300, steps: int = 30
) -> SubstructureConstraint:
    """Random constraint whose match count falls in [0.8m, 1.2m]."""
    if m >= g.vertex_count or m <= 0:
        raise Unachievable(m)
    lo, hi = 0.8 * m, 1.2 * m
    rng = random.Random(seed)
    focus = Var("x")
    instances = sorted(g.schema.instance_of) or list(range(g.vertex_count))
    cache: dict[frozenset, int] = {}

    def count(pats: list[TriplePattern]) -> int:
        key = frozenset(pats)
        if key not in cache:
            cache[key] = len(match_all(g, SubstructureConstraint(focus, list(pats))))
        return cache[key]

    for _ in range(restarts):
        v = rng.choice(instances)
        options = _incident_patterns(g, v, focus)
        if not options:
            continue
        singles = sorted(options, key=lambda p: (count([p]), str(p)))
        current = [singles[0]]
        for _ in range(steps):
            c = count(current)
            if lo <= c <= hi:
                return SubstructureConstraint(focus, list(current))
            if c < lo:
                if len(current) > 1:
                    current.pop(rng.randrange(len(current)))
                else:
                    looser = [p for p in singles if count([p]) > c]
                    if not looser:
                        break
                    # prefer the smallest step upwards, with some randomness
                    current = [rng.choice(looser[: max(1, len(looser) // 3)])]
            else:
                extra = [p for p in options if p not in current]
                if not extra:
                    break
                current.append(rng.choice(extra))
    raise Unachievable(m)


# ---------------------------------------------------------------------------
# query generation


@dataclass(frozen=True)
class QueryGenSpec:
    count_true: int
    count_false: int
    constraint: SubstructureConstraint | None = None
    magnitude: int | None = None
    seed: int = 0
    budget_factor: int = 1000


@dataclass
class GeneratedQuery:
    query: LscrQuery
    expected: bool
    band: int
    tree_size: int
    min_threshold: float
    false_type: str | None = None


@dataclass
class GeneratedQuerySet:
    constraint: SubstructureConstraint | None
    true_queries: list[GeneratedQuery] = field(default_factory=list)
    false_queries: list[GeneratedQuery] = field(default_factory=list)

    @property
    def all(self) -> list[GeneratedQuery]:
        return self.true_queries + self.false_queries


def band_sizes(label_count: int) -> list[list[int]]:
    """Integer label-constraint sizes falling in each of the three bands."""
    out = []
    for i, (a, b) in enumerate(BANDS):
        lo, hi = a * label_count, b * label_count
        last = i == len(BANDS) - 1
        sizes = [k for k in range(1, label_count + 1) if lo <= k and (k <= hi if last else k < hi)]
        out.append(sizes)
    return out


def _quotas(n: int) -> list[int]:
    return [n // 3 + (1 if b < n % 3 else 0) for b in range(3)]


def _false_type_open(counts: dict[str, int], kind: str, total: int) -> bool:
    base, extra = divmod(total, 3)
    c = counts[kind]
    if c < base:
        return True
    if c == base and extra:
        return sum(1 for k in FALSE_TYPES if counts[k] > base) < extra
    return False


def target_bfs_explored(g: KnowledgeGraph, s: int, iterations: int) -> set[int]:
    """Vertices touched by a label-free BFS from ``s`` that dequeues ``iterations`` vertices."""
    seen = {s}
    queue = deque([s])
    out = g.out_adjacency
    for _ in range(iterations):
        if not queue:
            break
        u = queue.popleft()
        for _, w in out[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def gen_queries(g: KnowledgeGraph, spec: QueryGenSpec) -> GeneratedQuerySet:
    constraint = spec.constraint
    if spec.count_true == 0 and spec.count_false == 0:
        return GeneratedQuerySet(constraint)
    if constraint is None:
        if spec.magnitude is None:
            raise SpecInvalid("either a constraint or a magnitude is required")
        constraint = gen_constraint_with_magnitude(g, spec.magnitude, spec.seed)
    rng = random.Random(spec.seed)
    n = g.vertex_count
    vsg = match_all(g, constraint)
    if spec.count_true and not vsg:
        raise Timeout("no vertex satisfies the constraint, so no true query exists")

    sizes = band_sizes(g.label_count)
    total = spec.count_true + spec.count_false
    want_true = _quotas(spec.count_true)
    want_all = _quotas(total)
    want = {True: want_true, False: [a - b for a, b in zip(want_all, want_true)]}
    for b in range(3):
        if (want[True][b] or want[False][b]) and not sizes[b]:
            raise SpecInvalid(f"label universe of {g.label_count} leaves band {b} empty")
    have = {True: [0, 0, 0], False: [0, 0, 0]}
    false_counts = {k: 0 for k in FALSE_TYPES}
    out = GeneratedQuerySet(constraint)

    log_n = math.log2(max(n, 2))
    iterations = math.ceil(log_n)
    lo_min, hi_min = sorted((10 * log_n, n / (10 * log_n)))
    labels_all = list(range(g.label_count))
    budget = spec.budget_factor * total

    def full() -> bool:
        return len(out.true_queries) == spec.count_true and len(out.false_queries) == spec.count_false

    draws = 0
    while not full():
        s = rng.randrange(n)
        explored = target_bfs_explored(g, s, iterations)
        if len(explored) >= n:
            draws += 1
            if draws >= budget:
                break
            continue
        while True:
            t = rng.randrange(n)
            if t not in explored:
                break
        struct_ok = None
        # a pair that does not fit any open slot gets a few fresh label sets
        for _ in range(LABEL_REDRAWS):
            if full() or draws >= budget:
                break
            draws += 1
            open_bands = [b for b in range(3) if have[True][b] < want[True][b] or have[False][b] < want[False][b]]
            band = rng.choice(open_bands)
            mask = 0
            for l in rng.sample(labels_all, rng.choice(sizes[band])):
                mask |= 1 << l
            q = LscrQuery(s, t, mask, constraint)
            ans = uis_query(g, q)
            tree = ans.stats.total_pops
            threshold = rng.uniform(lo_min, hi_min)
            if tree < threshold or have[ans.value][band] >= want[ans.value][band]:
                continue
            false_type = None
            if not ans.value:
                if struct_ok is None:
                    struct_ok = _structure_reachable(g, s, t, vsg)
                false_type = _false_kind(t in lcr_reachable_set(g, s, mask), struct_ok)
                if false_type not in FALSE_TYPES or not _false_type_open(false_counts, false_type, spec.count_false):
                    continue
                false_counts[false_type] += 1
            have[ans.value][band] += 1
            item = GeneratedQuery(q, ans.value, band, tree, threshold, false_type)
            (out.true_queries if ans.value else out.false_queries).append(item)
            break
        if draws >= budget:
            break
    if not full():
        raise Timeout(
            f"candidate budget {budget} exhausted with {len(out.true_queries)} true / "
            f"{len(out.false_queries)} false queries"
        )
    return out


def check_distribution(qs: GeneratedQuerySet) -> None:
    """Raise AssertionError unless band and false-type splits are balanced to within one."""
    for group in (qs.all, qs.true_queries, qs.false_queries):
        counts = [sum(1 for q in group if q.band == b) for b in range(3)]
        assert max(counts) - min(counts) <= 1, f"band counts {counts}"
    ft = [sum(1 for q in qs.false_queries if q.false_type == k) for k in FALSE_TYPES]
    assert max(ft) - min(ft) <= 1, f"false-type counts {ft}"


# ---------------------------------------------------------------------------
# query set files


def write_queryset(
    path: str | Path,
    g: KnowledgeGraph,
    items: Iterable[tuple[LscrQuery, bool]],
    constraint_ref: str,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q, expected in items:
            labels = ",".join(label_names(g, q.labels))
            fh.write(
                f"{g.vertex_names[q.source]}\t{g.vertex_names[q.target]}\t{labels}\t"
                f"{constraint_ref}\t{'T' if expected else 'F'}\n"
            )


def read_queryset(path: str | Path, g: KnowledgeGraph) -> list[tuple[LscrQuery, bool | None, str]]:
    base = Path(path).parent
    constraints: dict[str, SubstructureConstraint] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            s, t, labels, ref, *rest = line.split("\t")
            if ref not in constraints:
                cpath = Path(ref) if os.path.isabs(ref) else base / ref
                constraints[ref] = parse_constraint(cpath.read_text(encoding="utf-8"), g)
            expected = None
            if rest and rest[0] in ("T", "F"):
                expected = rest[0] == "T"
            q = LscrQuery(g.vertex_ids[s], g.vertex_ids[t], label_set(g, labels.split(",")), constraints[ref])
            rows.append((q, expected, ref))
    return rows


# ---------------------------------------------------------------------------
# random small instances for differential testing


def random_graph(rng: random.Random, n: int, labels: int, density: float) -> KnowledgeGraph:
    names = [f"n{i}" for i in range(n)]
    preds = [f"l{i}" for i in range(labels)]
    triples = []
    # every label and every vertex shows up at least once
    for i in range(n):
        triples.append((names[i], preds[i % labels], names[rng.randrange(n)]))
    for _ in range(max(0, int(density * n) - n)):
        triples.append((names[rng.randrange(n)], rng.choice(preds), names[rng.randrange(n)]))
    return KnowledgeGraph.from_triples(triples)


def random_constraint(rng: random.Random, g: KnowledgeGraph) -> SubstructureConstraint:
    ln = g.label_names
    vn = g.vertex_names
    l1, l2 = rng.choice(ln), rng.choice(ln)
    c = rng.choice(vn)
    shape = rng.randrange(6)
    body = [
        f"?x {l1} {c}",
        f"{c} {l1} ?x",
        f"?x {l1} ?y",
        f"?x {l1} ?y . ?y {l2} {c}",
        f"?x {l1} ?y . ?z {l2} ?y",
        f"?x {l1} {c} . {c} {l2} ?y",
    ][shape]
    return parse_constraint(f"SELECT ?x WHERE {{ {body} }}", g)


def random_instance(
    seed: int,
    n_range: tuple[int, int] = (20, 300),
    label_range: tuple[int, int] = (3, 8),
) -> tuple[KnowledgeGraph, LscrQuery]:
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    labels = rng.randint(*label_range)
    g = random_graph(rng, n, labels, rng.uniform(1.5, 4.0))
    constraint = random_constraint(rng, g)
    keep = rng.uniform(0.3, 0.95)
    mask = 0
    while not mask:
        mask = sum(1 << l for l in range(g.label_count) if rng.random() < keep)
    q = LscrQuery(rng.randrange(g.vertex_count), rng.randrange(g.vertex_count), mask, constraint)
    return g, q


def all_pairs(n: int) -> Iterable[tuple[int, int]]:
    return itertools.product(range(n), repeat=2)
