"""Local landmark index.

Landmarks are picked from schema class instances, then a round-robin
multi-source BFS hands every reachable vertex to exactly one landmark.  Each
landmark ``u`` then stores, restricted to the vertices it owns:

* ``internal[v]``: minimal label sets of paths ``u -> v`` inside its subgraph,
* ``external_t[L]``: vertices outside the subgraph reachable with label set ``L``,
* ``correlation[w]``: how many of those outside vertices belong to landmark ``w``.
"""
from __future__ import annotations

import io
import math
import random
import struct
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from .errors import FingerprintMismatch, FormatError, KTooLarge
from .labels import LabelSetFamily

if TYPE_CHECKING:
    from .graph import KnowledgeGraph

UNOWNED = -1
MAGIC = b"LSCRIDX1"
_END = b"LSCREND1"


def default_landmark_count(n: int) -> int:
    if n <= 1:
        return n
    return min(n, math.ceil(math.log2(n) * math.sqrt(n)))


@dataclass
class LandmarkAssignment:
    landmarks: list[int]
    owner: list[int]

    def owned_by(self, u: int) -> list[int]:
        return [v for v, o in enumerate(self.owner) if o == u]


@dataclass
class LandmarkEntry:
    internal: dict[int, LabelSetFamily] = field(default_factory=dict)
    external_t: dict[int, list[int]] = field(default_factory=dict)
    correlation: dict[int, int] = field(default_factory=dict)

    def stored_label_sets(self) -> int:
        return sum(len(f) for f in self.internal.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LandmarkEntry):
            return NotImplemented
        return (
            self.internal == other.internal
            and self.external_t == other.external_t
            and self.correlation == other.correlation
        )


@dataclass
class LocalIndex:
    assignment: LandmarkAssignment
    entries: dict[int, LandmarkEntry]
    k: int
    seed: int
    fingerprint: int
    build_time: float = 0.0

    def __post_init__(self):
        self.is_landmark = bytearray(len(self.assignment.owner))
        for u in self.assignment.landmarks:
            self.is_landmark[u] = 1

    @property
    def landmarks(self) -> list[int]:
        return self.assignment.landmarks

    @property
    def owner(self) -> list[int]:
        return self.assignment.owner

    def rho(self, a: int, b: int) -> float:
        """Correlation count between the subgraphs owning ``a`` and ``b``; inf if either is unowned."""
        oa, ob = self.assignment.owner[a], self.assignment.owner[b]
        if oa == UNOWNED or ob == UNOWNED:
            return math.inf
        return self.entries[oa].correlation.get(ob, 0)

    def structurally_equal(self, other: "LocalIndex") -> bool:
        return (
            self.assignment == other.assignment
            and self.entries == other.entries
            and (self.k, self.seed, self.fingerprint) == (other.k, other.seed, other.fingerprint)
        )


# ---------------------------------------------------------------------------
# construction


def select_landmarks(
    g: "KnowledgeGraph", k: int | None = None, seed: int = 0, class_count: int | None = None
) -> list[int]:
    """Pick ``k`` landmarks round-robin from the instances of a random subset of classes.

    Remaining slots (no schema, or too few instances) are filled with random
    vertices.
    """
    n = g.vertex_count
    if k is None:
        k = default_landmark_count(n)
    if k > n:
        raise KTooLarge(f"k={k} exceeds |V|={n}")
    if k <= 0:
        return []
    rng = random.Random(seed)
    chosen: list[int] = []
    marked: set[int] = set()

    classes = sorted(c for c in g.schema.classes if g.instances_of_class(c))
    if classes:
        m = class_count or math.ceil(math.sqrt(len(classes)))
        picked = rng.sample(classes, min(m, len(classes)))
        pools = []
        for c in picked:
            inst = g.instances_of_class(c)
            rng.shuffle(inst)
            pools.append(deque(inst))
        while len(chosen) < k and pools:
            nxt = []
            for pool in pools:
                while pool and pool[0] in marked:
                    pool.popleft()
                if pool and len(chosen) < k:
                    v = pool.popleft()
                    marked.add(v)
                    chosen.append(v)
                if pool:
                    nxt.append(pool)
            pools = nxt

    if len(chosen) < k:
        rest = [v for v in range(n) if v not in marked]
        chosen.extend(rng.sample(rest, k - len(chosen)))
    return chosen


def bfs_partition(g: "KnowledgeGraph", landmarks: Sequence[int]) -> LandmarkAssignment:
    owner = [UNOWNED] * g.vertex_count
    for u in landmarks:
        owner[u] = u
    out = g.out_adjacency
    rotation = deque((u, deque([u])) for u in landmarks)
    while rotation:
        u, frontier = rotation.popleft()
        v = frontier.popleft()
        for _, w in out[v]:
            if owner[w] == UNOWNED:
                owner[w] = u
                frontier.append(w)
        if frontier:
            rotation.append((u, frontier))
    return LandmarkAssignment(list(landmarks), owner)


def local_full_index(g: "KnowledgeGraph", u: int, assignment: LandmarkAssignment) -> LandmarkEntry:
    owner = assignment.owner
    out = g.out_adjacency
    internal: dict[int, LabelSetFamily] = {}
    external: dict[int, LabelSetFamily] = {}
    queue = deque([(u, 0)])
    while queue:
        v, labels = queue.popleft()
        if v == u:
            # (u, {}) is the root; any longer cycle back to u is dominated by it
            if labels:
                continue
        else:
            fam = internal.get(v)
            if fam is None:
                internal[v] = LabelSetFamily([labels])
            elif not fam.insert(labels):
                continue
        for l, w in out[v]:
            nxt = labels | (1 << l)
            if owner[w] == u:
                queue.append((w, nxt))
            else:
                fam = external.get(w)
                if fam is None:
                    external[w] = LabelSetFamily([nxt])
                else:
                    fam.insert(nxt)

    external_t: dict[int, list[int]] = {}
    correlation: dict[int, int] = {}
    for w, fam in external.items():
        for labels in fam:
            external_t.setdefault(labels, []).append(w)
        o = owner[w]
        if o != UNOWNED:
            correlation[o] = correlation.get(o, 0) + 1
    for vs in external_t.values():
        vs.sort()
    return LandmarkEntry(internal, external_t, correlation)


def build_index(
    g: "KnowledgeGraph",
    k: int | None = None,
    seed: int = 0,
    landmarks: Sequence[int] | None = None,
) -> LocalIndex:
    start = time.perf_counter()
    if landmarks is None:
        landmarks = select_landmarks(g, k, seed)
    else:
        landmarks = list(dict.fromkeys(landmarks))
    assignment = bfs_partition(g, landmarks)
    entries = {u: local_full_index(g, u, assignment) for u in landmarks}
    return LocalIndex(
        assignment,
        entries,
        k=len(landmarks),
        seed=seed,
        fingerprint=g.fingerprint(),
        build_time=time.perf_counter() - start,
    )


def index_check(internal: dict[int, LabelSetFamily], t_star: int, mask: int) -> bool:
    fam = internal.get(t_star)
    return fam is not None and fam.admits(mask)


# ---------------------------------------------------------------------------
# persistence: fixed-width little-endian records


def serialize_index(ix: LocalIndex) -> bytes:
    buf = io.BytesIO()
    w = buf.write
    owner = ix.assignment.owner
    w(MAGIC)
    w(struct.pack("<QIQ", ix.fingerprint, ix.k, ix.seed & 0xFFFFFFFFFFFFFFFF))
    w(struct.pack("<II", len(owner), len(ix.landmarks)))
    w(struct.pack(f"<{len(ix.landmarks)}I", *ix.landmarks))
    w(struct.pack(f"<{len(owner)}i", *owner))
    for u in ix.landmarks:
        e = ix.entries[u]
        w(struct.pack("<II", u, len(e.internal)))
        for v in sorted(e.internal):
            sets = sorted(e.internal[v])
            w(struct.pack(f"<II{len(sets)}Q", v, len(sets), *sets))
        w(struct.pack("<I", len(e.external_t)))
        for labels in sorted(e.external_t):
            vs = e.external_t[labels]
            w(struct.pack(f"<QI{len(vs)}I", labels, len(vs), *vs))
        w(struct.pack("<I", len(e.correlation)))
        for o in sorted(e.correlation):
            w(struct.pack("<II", o, e.correlation[o]))
    w(_END)
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise FormatError("index file is truncated")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("index file is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def deserialize_index(data: bytes, g: "KnowledgeGraph | None" = None) -> LocalIndex:
    r = _Reader(data)
    if r.raw(len(MAGIC)) != MAGIC:
        raise FormatError("not an lscr index file")
    fingerprint, k, seed = r.take("<QIQ")
    if g is not None and fingerprint != g.fingerprint():
        raise FingerprintMismatch(
            f"index built for graph {fingerprint:016x}, loaded against {g.fingerprint():016x}"
        )
    n, nl = r.take("<II")
    landmarks = list(r.take(f"<{nl}I"))
    owner = list(r.take(f"<{n}i"))
    entries = {}
    for _ in range(nl):
        u, n_int = r.take("<II")
        e = LandmarkEntry()
        for _ in range(n_int):
            v, cnt = r.take("<II")
            e.internal[v] = LabelSetFamily(r.take(f"<{cnt}Q"))
        (n_ext,) = r.take("<I")
        for _ in range(n_ext):
            labels, cnt = r.take("<QI")
            e.external_t[labels] = list(r.take(f"<{cnt}I"))
        (n_d,) = r.take("<I")
        for _ in range(n_d):
            o, c = r.take("<II")
            e.correlation[o] = c
        entries[u] = e
    if r.raw(len(_END)) != _END or r.pos != len(data):
        raise FormatError("trailing or corrupt data after index records")
    if set(entries) != set(landmarks):
        raise FormatError("landmark records do not match the landmark list")
    return LocalIndex(LandmarkAssignment(landmarks, owner), entries, k, seed, fingerprint)


def save_index(ix: LocalIndex, path: str | Path) -> int:
    data = serialize_index(ix)
    Path(path).write_bytes(data)
    return len(data)


def load_index(path: str | Path, g: "KnowledgeGraph") -> LocalIndex:
    return deserialize_index(Path(path).read_bytes(), g)


def index_stats(ix: LocalIndex) -> list[dict[str, int]]:
    rows = []
    for u in ix.landmarks:
        e = ix.entries[u]
        rows.append(
            {
                "landmark": u,
                "owned": 0,
                "internal_vertices": len(e.internal),
                "internal_label_sets": e.stored_label_sets(),
                "external_keys": len(e.external_t),
                "external_refs": sum(len(v) for v in e.external_t.values()),
                "correlated": len(e.correlation),
            }
        )
    owned: dict[int, int] = {}
    for o in ix.owner:
        if o != UNOWNED:
            owned[o] = owned.get(o, 0) + 1
    for row in rows:
        row["owned"] = owned.get(row["landmark"], 0)
    return rows
