"""Immutable edge-labeled knowledge graph with interned vertex and label names.

Triples are read from a TAB separated file, one ``subject predicate object``
per line.  Vertex and label ids are dense integers assigned in order of first
appearance, so loading the same file twice always yields the same ids.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import EmptyGraph, MalformedLine, TooManyLabels, UnknownClass

MAX_LABELS = 64


@dataclass(frozen=True)
class IngestOptions:
    type_predicate: str = "rdf:type"
    subclass_predicate: str = "rdfs:subClassOf"


@dataclass
class SchemaInfo:
    classes: set[int] = field(default_factory=set)
    instance_of: dict[int, set[int]] = field(default_factory=dict)
    subclass_of: dict[int, set[int]] = field(default_factory=dict)


class KnowledgeGraph:
    """Vertex/edge store.  Do not mutate after construction."""

    def __init__(
        self,
        vertex_names: list[str],
        label_names: list[str],
        edges: list[tuple[int, int, int]],
        schema: SchemaInfo,
    ):
        self.vertex_names = vertex_names
        self.label_names = label_names
        self.edges = edges
        self.schema = schema
        self.vertex_count = len(vertex_names)
        self.label_count = len(label_names)
        self.full_mask = (1 << self.label_count) - 1

        self.out_adjacency: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        self.in_adjacency: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for s, l, t in edges:
            self.out_adjacency[s].append((l, t))
            self.in_adjacency[t].append((l, s))
        self.edge_set = frozenset(edges)

        self.vertex_ids = {name: i for i, name in enumerate(vertex_names)}
        self.label_ids = {name: i for i, name in enumerate(label_names)}
        self._fingerprint: int | None = None
        self._sources_by_label: list[list[int]] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(|V|={self.vertex_count}, |E|={self.edge_count}, "
            f"labels={self.label_count})"
        )

    # construction ---------------------------------------------------------

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[tuple[str, str, str]],
        options: IngestOptions | None = None,
    ) -> "KnowledgeGraph":
        options = options or IngestOptions()
        vertex_ids: dict[str, int] = {}
        label_ids: dict[str, int] = {}
        edges: list[tuple[int, int, int]] = []
        seen: set[tuple[int, int, int]] = set()

        for s_name, p_name, o_name in triples:
            s = vertex_ids.setdefault(s_name, len(vertex_ids))
            if p_name not in label_ids:
                label_ids[p_name] = len(label_ids)
                if len(label_ids) > MAX_LABELS:
                    # keep counting so the error reports the real total
                    continue
            p = label_ids[p_name]
            o = vertex_ids.setdefault(o_name, len(vertex_ids))
            edge = (s, p, o)
            if edge not in seen:
                seen.add(edge)
                edges.append(edge)

        if len(label_ids) > MAX_LABELS:
            raise TooManyLabels(len(label_ids))
        if not edges:
            raise EmptyGraph("graph has no edges")

        schema = SchemaInfo()
        type_id = label_ids.get(options.type_predicate)
        sub_id = label_ids.get(options.subclass_predicate)
        for s, p, o in edges:
            if p == type_id:
                schema.classes.add(o)
                schema.instance_of.setdefault(s, set()).add(o)
            elif p == sub_id:
                schema.classes.add(s)
                schema.classes.add(o)
                schema.subclass_of.setdefault(s, set()).add(o)

        return cls(list(vertex_ids), list(label_ids), edges, schema)

    # queries --------------------------------------------------------------

    def out_edges(self, v: int, mask: int) -> Iterator[tuple[int, int]]:
        """Out-edges of ``v`` whose label bit is set in ``mask``, in stored order."""
        for l, w in self.out_adjacency[v]:
            if mask >> l & 1:
                yield l, w

    def has_edge(self, s: int, l: int, t: int) -> bool:
        return (s, l, t) in self.edge_set

    def instances_of_class(self, c: int) -> list[int]:
        if c not in self.schema.classes:
            raise UnknownClass(f"vertex {c} is not a schema class")
        return sorted(v for v, cs in self.schema.instance_of.items() if c in cs)

    def sources_with_label(self, l: int) -> list[int]:
        """Sorted distinct sources of edges labeled ``l``."""
        if self._sources_by_label is None:
            buckets: list[set[int]] = [set() for _ in range(self.label_count)]
            for s, p, _ in self.edges:
                buckets[p].add(s)
            self._sources_by_label = [sorted(b) for b in buckets]
        return self._sources_by_label[l]

    def vertex(self, name: str) -> int:
        return self.vertex_ids[name]

    def label(self, name: str) -> int:
        return self.label_ids[name]

    # serialization --------------------------------------------------------

    def iter_triple_lines(self) -> Iterator[str]:
        vn, ln = self.vertex_names, self.label_names
        for s, l, t in self.edges:
            yield f"{vn[s]}\t{ln[l]}\t{vn[t]}\n"

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.writelines(self.iter_triple_lines())

    def fingerprint(self) -> int:
        """64-bit hash of the canonical triple serialization."""
        if self._fingerprint is None:
            h = hashlib.blake2b(digest_size=8)
            for line in self.iter_triple_lines():
                h.update(line.encode("utf-8"))
            self._fingerprint = int.from_bytes(h.digest(), "little")
        return self._fingerprint


def parse_triple_lines(lines: Iterable[str]) -> Iterator[tuple[str, str, str]]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not all(parts):
            raise MalformedLine(lineno, line)
        yield parts[0], parts[1], parts[2]


def load_graph(path: str | Path, options: IngestOptions | None = None) -> KnowledgeGraph:
    with open(path, encoding="utf-8") as fh:
        return KnowledgeGraph.from_triples(parse_triple_lines(fh), options)


def graph_from_text(text: str, options: IngestOptions | None = None) -> KnowledgeGraph:
    return KnowledgeGraph.from_triples(parse_triple_lines(text.splitlines()), options)


def out_edges(g: KnowledgeGraph, v: int, mask: int) -> list[tuple[int, int]]:
    return list(g.out_edges(v, mask))


def instances_of_class(g: KnowledgeGraph, c: int) -> list[int]:
    return g.instances_of_class(c)


def triples_of(g: KnowledgeGraph) -> Sequence[tuple[str, str, str]]:
    vn, ln = g.vertex_names, g.label_names
    return [(vn[s], ln[l], vn[t]) for s, l, t in g.edges]
