"""Label sets as 64-bit masks, antichains of minimal label sets, and a brute-force CMS oracle.

A label set is a plain ``int`` whose bit ``i`` is set when label id ``i`` is a
member.  A :class:`LabelSetFamily` keeps only minimal members: adding a set
that already has a subset in the family is a no-op, and adding a new set
evicts every strict superset.
"""
from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import BudgetExceeded, UnknownLabelName

if TYPE_CHECKING:
    from .graph import KnowledgeGraph

ORACLE_STATE_BUDGET = 1 << 24


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def label_set(g: "KnowledgeGraph", names: Iterable[str]) -> int:
    mask = 0
    for name in names:
        name = name.strip()
        if not name:
            continue
        try:
            mask |= 1 << g.label_ids[name]
        except KeyError:
            raise UnknownLabelName(name) from None
    return mask


def label_names(g: "KnowledgeGraph", mask: int) -> list[str]:
    return sorted(g.label_names[i] for i in range(g.label_count) if mask >> i & 1)


def format_label_set(g: "KnowledgeGraph", mask: int) -> str:
    return "{" + ",".join(label_names(g, mask)) + "}"


class LabelSetFamily:
    """Antichain of label sets under inclusion."""

    __slots__ = ("sets",)

    def __init__(self, sets: Iterable[int] = ()):
        self.sets: list[int] = []
        for s in sets:
            self.insert(s)

    def insert(self, new: int) -> bool:
        sets = self.sets
        for s in sets:
            if s & ~new == 0:
                return False
        # nothing below ``new``, so drop whatever sits strictly above it
        self.sets = [s for s in sets if new & ~s != 0]
        self.sets.append(new)
        return True

    def admits(self, mask: int) -> bool:
        for s in self.sets:
            if s & ~mask == 0:
                return True
        return False

    def __iter__(self) -> Iterator[int]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __contains__(self, s: int) -> bool:
        return s in self.sets

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LabelSetFamily):
            return sorted(self.sets) == sorted(other.sets)
        if isinstance(other, (set, frozenset, list, tuple)):
            return sorted(self.sets) == sorted(set(other))
        return NotImplemented

    def __repr__(self) -> str:
        return f"LabelSetFamily({sorted(self.sets)!r})"

    def as_frozenset(self) -> frozenset[int]:
        return frozenset(self.sets)

    def format(self, g: "KnowledgeGraph") -> str:
        parts = sorted(format_label_set(g, s) for s in self.sets)
        return "{" + ",".join(parts) + "}"


def family_insert(fam: LabelSetFamily, labels: int) -> bool:
    return fam.insert(labels)


def family_admits(fam: LabelSetFamily, labels: int) -> bool:
    return fam.admits(labels)


# ---------------------------------------------------------------------------
# brute-force oracle


def _reachable_states(
    g: "KnowledgeGraph", s: int, scope: set[int] | frozenset[int] | None
) -> dict[tuple[int, int], tuple[int, int, int] | None]:
    """BFS over (vertex, exact path label set) states reachable from (s, {}).

    Returns a parent map ``(v, L) -> (u, L_u, label)`` usable for witness paths.
    """
    if g.vertex_count * (1 << g.label_count) > ORACLE_STATE_BUDGET:
        raise BudgetExceeded(
            f"|V| * 2^labels = {g.vertex_count * (1 << g.label_count)} exceeds budget"
        )
    if scope is not None and s not in scope:
        return {(s, 0): None}
    parent: dict[tuple[int, int], tuple[int, int, int] | None] = {(s, 0): None}
    queue = deque([(s, 0)])
    out = g.out_adjacency
    while queue:
        v, labels = queue.popleft()
        for l, w in out[v]:
            if scope is not None and w not in scope:
                continue
            state = (w, labels | (1 << l))
            if state not in parent:
                parent[state] = (v, labels, l)
                queue.append(state)
    return parent


def cms_oracle_all(
    g: "KnowledgeGraph", s: int, scope: set[int] | frozenset[int] | None = None
) -> dict[int, LabelSetFamily]:
    """Minimal sufficient label sets from ``s`` to every vertex it reaches."""
    per_vertex: dict[int, list[int]] = {}
    for v, labels in _reachable_states(g, s, scope):
        per_vertex.setdefault(v, []).append(labels)
    result = {}
    for v, sets in per_vertex.items():
        # insert smallest first so the family never has to evict anything
        result[v] = LabelSetFamily(sorted(sets, key=lambda m: (bin(m).count("1"), m)))
    return result


def cms_oracle(
    g: "KnowledgeGraph", s: int, t: int, scope: set[int] | frozenset[int] | None = None
) -> LabelSetFamily:
    return cms_oracle_all(g, s, scope).get(t, LabelSetFamily())


def cms_oracle_witnesses(
    g: "KnowledgeGraph", s: int, t: int, scope: set[int] | frozenset[int] | None = None
) -> dict[int, list[tuple[int, int, int]]]:
    """One concrete path (list of edges) for every member of M(s, t)."""
    parent = _reachable_states(g, s, scope)
    fam = LabelSetFamily(labels for v, labels in parent if v == t)
    witnesses = {}
    for labels in fam:
        path = []
        state = (t, labels)
        while parent[state] is not None:
            u, lu, l = parent[state]
            path.append((u, l, state[0]))
            state = (u, lu)
        path.reverse()
        witnesses[labels] = path
    return witnesses
