"""Uninformed LSCR search: UIS (per-vertex SCck) and UIS* (match V(S,G) first).

Both strategies keep a per-query ``close`` map with three states:

* ``N`` - not reached yet,
* ``F`` - reached from the source under the label constraint,
* ``T`` - reached through some vertex satisfying the substructure constraint.

A vertex only ever moves N->F, N->T or F->T, which bounds every vertex to at
most two expansions per query.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .errors import InconsistentVSG
from .pattern import SubstructureConstraint, satisfies

if TYPE_CHECKING:
    from .graph import KnowledgeGraph

N, F, T = 0, 1, 2
STATE_NAMES = "NFT"


class CloseMap:
    """Per-query vertex states; refuses any demotion."""

    __slots__ = ("state",)

    def __init__(self, n: int):
        self.state = bytearray(n)

    def __getitem__(self, v: int) -> int:
        return self.state[v]

    def set(self, v: int, value: int) -> None:
        if value < self.state[v]:
            raise AssertionError(
                f"close[{v}] demoted {STATE_NAMES[self.state[v]]}->{STATE_NAMES[value]}"
            )
        self.state[v] = value

    def passed(self) -> int:
        return len(self.state) - self.state.count(0)


@dataclass(frozen=True)
class LscrQuery:
    source: int
    target: int
    labels: int
    constraint: SubstructureConstraint


@dataclass
class SearchStats:
    passed_vertices: int = 0
    scck_calls: int = 0
    edges_scanned: int = 0
    lcs_invocations: int = 0
    wall_time: float = 0.0
    total_pops: int = 0
    max_pops_per_vertex: int = 0
    # N->* changes made by F-phase LCS calls after one of them returned false
    changes_after_exhaustion: int = 0

    def render(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.__dict__.items())


@dataclass
class QueryAnswer:
    value: bool
    stats: SearchStats
    witness: list[tuple[int, int, int]] | None = None

    def render(self) -> str:
        return ("true" if self.value else "false") + "\n" + self.stats.render()


class PopCounter:
    __slots__ = ("counts", "total")

    def __init__(self, n: int):
        self.counts = bytearray(n)
        self.total = 0

    def hit(self, v: int) -> None:
        c = self.counts[v]
        if c < 255:
            self.counts[v] = c + 1
        self.total += 1

    def finish(self, stats: SearchStats, close: CloseMap) -> None:
        stats.total_pops = self.total
        stats.max_pops_per_vertex = max(self.counts) if self.counts else 0
        stats.passed_vertices = close.passed()


def _trivial_answer(g: "KnowledgeGraph", q: LscrQuery, sat: bool, start: float) -> QueryAnswer:
    # s == t: the empty path meets any label constraint
    stats = SearchStats(scck_calls=1, passed_vertices=1, wall_time=time.perf_counter() - start)
    return QueryAnswer(sat, stats, [] if sat else None)


# ---------------------------------------------------------------------------
# UIS


def uis_query(g: "KnowledgeGraph", q: LscrQuery, witness: bool = False) -> QueryAnswer:
    start = time.perf_counter()
    s, t, mask, constraint = q.source, q.target, q.labels, q.constraint
    if s == t:
        return _trivial_answer(g, q, satisfies(g, s, constraint), start)

    stats = SearchStats()
    close = CloseMap(g.vertex_count)
    pops = PopCounter(g.vertex_count)
    parents: dict[tuple[int, int], tuple[int, int, int]] | None = {} if witness else None
    out = g.out_adjacency

    stats.scck_calls += 1
    close.set(s, T if satisfies(g, s, constraint) else F)
    stack = [(s, close[s])]
    found = False
    while stack and not found:
        u, su = stack.pop()
        if close[u] != su:
            continue  # superseded by a later T entry
        pops.hit(u)
        for l, v in out[u]:
            if not mask >> l & 1:
                continue
            stats.edges_scanned += 1
            cv = close[v]
            if su == T and cv != T:
                close.set(v, T)
                stack.append((v, T))
                if parents is not None:
                    parents[(v, T)] = (u, su, l)
            elif cv == N:
                stats.scck_calls += 1
                nv = T if satisfies(g, v, constraint) else F
                close.set(v, nv)
                stack.append((v, nv))
                if parents is not None:
                    parents[(v, nv)] = (u, su, l)
            if v == t and close[v] == T:
                found = True
                break

    pops.finish(stats, close)
    stats.wall_time = time.perf_counter() - start
    path = None
    if found and parents is not None:
        path = []
        node = (t, T)
        while node in parents:
            u, su, l = parents[node]
            path.append((u, l, node[0]))
            node = (u, su)
        path.reverse()
    return QueryAnswer(found, stats, path)


# ---------------------------------------------------------------------------
# UIS*


@dataclass
class StackSearchState:
    """Shared mutable state for one UIS* run."""

    close: CloseMap
    pops: PopCounter
    stats: SearchStats = field(default_factory=SearchStats)
    stack: list[tuple[int, int]] = field(default_factory=list)
    exhausted: bool = False

    @classmethod
    def fresh(cls, n: int) -> "StackSearchState":
        return cls(CloseMap(n), PopCounter(n))


def lcs_stack(
    g: "KnowledgeGraph", s_star: int, t_star: int, mask: int, b: int, st: StackSearchState
) -> bool:
    """Continue the shared search and report whether ``t_star`` is reached.

    With ``b == T`` the caller guarantees ``s_star`` is already reached from the
    query source; only entries in state T are expanded and leftover T entries
    are swept from the top of the stack on exit.
    """
    close, stack, stats = st.close, st.stack, st.stats
    stats.lcs_invocations += 1
    if b == T:
        close.set(s_star, T)
        stack.append((s_star, T))
    if s_star == t_star:
        return True

    out = g.out_adjacency
    counting = b == F and st.exhausted
    while stack and (b == F or close[stack[-1][0]] == T):
        u, su = stack.pop()
        if close[u] != su or (b == F and su == T):
            continue
        st.pops.hit(u)
        found = False
        for l, w in out[u]:
            if not mask >> l & 1:
                continue
            stats.edges_scanned += 1
            cw = close[w]
            if (b == T and cw != T) or (b == F and cw == N):
                if counting:
                    stats.changes_after_exhaustion += 1
                close.set(w, b)
                stack.append((w, b))
            if w == t_star:
                found = True
        # the full edge list of u is scanned before returning so that no
        # neighbour is lost for later calls
        if found:
            return True

    while stack and close[stack[-1][0]] == T:
        stack.pop()
    if b == F:
        st.exhausted = True
    return False


def _check_vsg(g, vsg: Sequence[int], constraint: SubstructureConstraint, sample: int = 16):
    step = max(1, len(vsg) // sample)
    for v in list(vsg)[::step]:
        if not satisfies(g, v, constraint):
            raise InconsistentVSG(f"vertex {v} listed in V(S,G) does not satisfy the constraint")


def uis_star_query(
    g: "KnowledgeGraph", q: LscrQuery, vsg: Sequence[int], check_vsg: bool = False
) -> QueryAnswer:
    start = time.perf_counter()
    if check_vsg:
        _check_vsg(g, vsg, q.constraint)
    s, t, mask = q.source, q.target, q.labels
    if s == t:
        return _trivial_answer(g, q, s in set(vsg), start)

    st = StackSearchState.fresh(g.vertex_count)
    st.close.set(s, F)
    st.stack.append((s, F))
    answer = False
    for v in vsg:
        cv = st.close[v]
        if cv == N:
            if v == s or v == t:
                answer = lcs_stack(g, s, t, mask, F, st)
                break
            if lcs_stack(g, s, v, mask, F, st) and lcs_stack(g, v, t, mask, T, st):
                answer = True
                break
        elif cv == F:
            if lcs_stack(g, v, t, mask, T, st):
                answer = True
                break

    st.pops.finish(st.stats, st.close)
    st.stats.wall_time = time.perf_counter() - start
    return QueryAnswer(answer, st.stats)
