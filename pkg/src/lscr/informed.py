"""INS: index-guided LSCR search.

Same skeleton as UIS*, with three changes:

* candidates from V(S,G) are consumed best-first instead of in match order,
* the shared frontier is a deduplicating priority queue instead of a stack,
* reaching a landmark consults its local index: a direct hit answers the
  reachability sub-question, otherwise the landmark's internal vertices are
  marked wholesale and its exit vertices are enqueued.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .errors import IndexGraphMismatch
from .index import UNOWNED, LocalIndex, LandmarkEntry
from .labels import LabelSetFamily
from .search import (
    F, N, T,
    CloseMap,
    LscrQuery,
    PopCounter,
    QueryAnswer,
    SearchStats,
    _check_vsg,
    _trivial_answer,
)

if TYPE_CHECKING:
    from .graph import KnowledgeGraph

INF = math.inf


RHO_BITS = 24
RHO_WORST = (1 << RHO_BITS) - 1
SEQ_BITS = 32
SEQ_MASK = (1 << SEQ_BITS) - 1
V_BITS = 32
V_MASK = (1 << V_BITS) - 1


class FrontierQueue:
    """Priority queue of vertices with at most one live entry per vertex.

    Keys follow, in order: T before F; same subgraph as the current target;
    landmarks first; smaller correlation estimate to the target; vertices whose
    owning landmark is still unexplored; insertion order.  Each key is packed
    into one int (vertex id in the low bits) so heap entries compare cheaply;
    stale heap entries are skipped lazily.
    """

    def __init__(self, ix: LocalIndex, close: CloseMap, rho_invert: bool = False):
        self.ix = ix
        self.close = close
        self.rho_invert = rho_invert
        self.owner = ix.assignment.owner
        self.is_landmark = ix.is_landmark
        self.target = -1
        self.target_owner = UNOWNED
        self.heap: list[int] = []
        self.live: dict[int, int] = {}  # vertex -> packed key of its live entry
        self._seq = 0
        self._rho: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.live)

    def __contains__(self, v: int) -> bool:
        return v in self.live

    def rho_part(self, ov: int) -> int:
        """Correlation of subgraph ``ov`` to the target's, as a sort component."""
        r = self._rho.get(ov)
        if r is None:
            if ov == UNOWNED or self.target_owner == UNOWNED:
                r = RHO_WORST
            else:
                r = min(self.ix.entries[ov].correlation.get(self.target_owner, 0), RHO_WORST - 1)
                if self.rho_invert:
                    r = RHO_WORST - 1 - r
            self._rho[ov] = r
        return r

    def key(self, v: int, seq: int) -> int:
        state = self.close.state
        ov = self.owner[v]
        landmark = self.is_landmark[v]
        k = 0 if state[v] == T else 1
        k = k << 1 | (0 if ov != UNOWNED and ov == self.target_owner else 1)
        k = k << 1 | (0 if landmark else 1)
        k = k << RHO_BITS | self.rho_part(ov)
        k = k << 1 | (0 if landmark or (ov != UNOWNED and state[ov] == N) else 1)
        return ((k << SEQ_BITS | seq) << V_BITS) | v

    def push(self, v: int) -> None:
        # re-insertion discards the earlier entry
        self._seq += 1
        k = self.key(v, self._seq)
        self.live[v] = k
        heapq.heappush(self.heap, k)

    def touch(self, v: int) -> None:
        """Re-key a queued vertex after its close state changed."""
        old = self.live.get(v)
        if old is not None:
            k = self.key(v, (old >> V_BITS) & SEQ_MASK)
            if k != old:
                self.live[v] = k
                heapq.heappush(self.heap, k)

    def retarget(self, t: int) -> None:
        if t == self.target:
            return
        self.target = t
        self.target_owner = self.owner[t] if t >= 0 else UNOWNED
        self._rho = {}
        live = self.live
        for v, old in live.items():
            live[v] = self.key(v, (old >> V_BITS) & SEQ_MASK)
        self.heap = list(live.values())
        heapq.heapify(self.heap)

    def _clean(self) -> None:
        heap, live = self.heap, self.live
        while heap:
            top = heap[0]
            if live.get(top & V_MASK) == top:
                return
            heapq.heappop(heap)

    def front(self) -> int | None:
        self._clean()
        return self.heap[0] & V_MASK if self.heap else None

    def pop(self) -> int:
        self._clean()
        v = heapq.heappop(self.heap) & V_MASK
        del self.live[v]
        return v

    def check(self) -> None:
        in_heap = set(self.heap)
        assert all(k in in_heap and k & V_MASK == v for v, k in self.live.items())


def frontier_compare(u: int, v: int, queue: FrontierQueue) -> int:
    """-1 if ``u`` is served before ``v``, 1 if after (never 0 for distinct queued vertices)."""
    ku, kv = queue.live[u] >> V_BITS, queue.live[v] >> V_BITS
    return -1 if ku < kv else (1 if kv < ku else 0)


@dataclass
class InformedSearchState:
    close: CloseMap
    pops: PopCounter
    queue: FrontierQueue
    stats: SearchStats = field(default_factory=SearchStats)
    exhausted: bool = False
    debug: bool = False

    @classmethod
    def fresh(cls, n: int, ix: LocalIndex, rho_invert: bool = False, debug: bool = False):
        close = CloseMap(n)
        return cls(close, PopCounter(n), FrontierQueue(ix, close, rho_invert), debug=debug)


def cut_internal(
    internal: dict[int, LabelSetFamily], mask: int, b: int, close: CloseMap,
    queue: FrontierQueue | None = None,
) -> int:
    changed = 0
    for x, fam in internal.items():
        cx = close[x]
        if cx != T and cx != b and fam.admits(mask):
            close.set(x, b)
            changed += 1
            if queue is not None:
                queue.touch(x)
    return changed


def push_external(
    external_t: dict[int, list[int]], mask: int, b: int, close: CloseMap, queue
) -> int:
    pushed = 0
    for labels, vs in external_t.items():
        if labels & ~mask:
            continue
        for v in vs:
            cv = close[v]
            if (b == T and cv != T) or (b == F and cv == N):
                close.set(v, b)
                queue.push(v)
                pushed += 1
    return pushed


def lcs_informed(
    g: "KnowledgeGraph",
    ix: LocalIndex,
    s_star: int,
    t_star: int,
    mask: int,
    b: int,
    st: InformedSearchState,
) -> bool:
    close, queue, stats = st.close, st.queue, st.stats
    stats.lcs_invocations += 1
    queue.retarget(t_star)
    if b == T:
        close.set(s_star, T)
        queue.push(s_star)
    if s_star == t_star:
        return True

    out = g.out_adjacency
    owner = ix.assignment.owner
    is_landmark = ix.is_landmark
    entries = ix.entries
    t_owner = owner[t_star]
    counting = b == F and st.exhausted
    cstate = close.state
    heap, live = queue.heap, queue.live
    counts = st.pops.counts
    heappush, heappop = heapq.heappush, heapq.heappop
    debug = st.debug

    # the part of a frontier key fixed by (owner, b, target), see FrontierQueue.key
    tbit = 0 if b == T else 1
    prefixes: dict[int, int] = {}

    def prefix(ov: int) -> int:
        same = 0 if ov != UNOWNED and ov == t_owner else 1
        p = (((tbit << 1 | same) << 1 | 1) << RHO_BITS) | queue.rho_part(ov)
        prefixes[ov] = p
        return p

    pops = scanned = changes = 0
    found = False
    while live:
        top = heap[0]
        while live.get(top & V_MASK) != top:
            heappop(heap)
            top = heap[0]
        u = top & V_MASK
        if b == T and cstate[u] != T:
            break
        heappop(heap)
        del live[u]
        pops += 1
        c = counts[u]
        if c < 255:
            counts[u] = c + 1
        if debug:
            queue.check()
        if not mask:
            continue
        for l, w in out[u]:
            if not mask >> l & 1:
                continue
            scanned += 1
            if is_landmark[w]:
                entry: LandmarkEntry = entries[w]
                if t_owner == w and not found:
                    fam = entry.internal.get(t_star)
                    if fam is not None and fam.admits(mask):
                        found = True
                cw = cstate[w]
                if (b == T and cw != T) or (b == F and cw == N):
                    # the landmark itself is covered by its index; mark without enqueueing
                    close.set(w, b)
                    queue.touch(w)
                    changes += 1
                    changes += cut_internal(entry.internal, mask, b, close, queue)
                    changes += push_external(entry.external_t, mask, b, close, queue)
                    # t* may have been one of the exit vertices just pushed
                    ct = cstate[t_star]
                    if ct == T or (b == F and ct == F):
                        found = True
            else:
                cw = cstate[w]
                if cw == N or (cw == F and b == T):
                    changes += 1
                    cstate[w] = b  # only ever raises the state, per the guard above
                    queue._seq += 1
                    ov = owner[w]
                    p = prefixes.get(ov)
                    if p is None:
                        p = prefix(ov)
                    fresh = 0 if ov != UNOWNED and cstate[ov] == N else 1
                    k = (((p << 1 | fresh) << SEQ_BITS | queue._seq) << V_BITS) | w
                    live[w] = k
                    heappush(heap, k)
            if w == t_star:
                found = True
        if found:
            break

    st.pops.total += pops
    stats.edges_scanned += scanned
    if counting:
        stats.changes_after_exhaustion += changes
    if found:
        return True
    if b == F:
        st.exhausted = True
    return False


def _heap_key(v: int, s: int, t: int, ix: LocalIndex, close: CloseMap, rho_invert: bool):
    cv = close[v]
    landmark = 0 if ix.is_landmark[v] else 1
    if cv == F:
        rho = ix.rho(v, t)
        rank = 0
    elif cv == N:
        rho = ix.rho(s, v)
        rank = 1
    else:
        return (2, 0, 0, v)
    if rho_invert and rho != INF:
        rho = -rho
    return (rank, rho, landmark, v)


def ins_query(
    g: "KnowledgeGraph",
    ix: LocalIndex,
    q: LscrQuery,
    vsg: Sequence[int],
    rho_invert: bool = False,
    check_vsg: bool = False,
    debug: bool = False,
) -> QueryAnswer:
    start = time.perf_counter()
    if ix.fingerprint != g.fingerprint() or len(ix.owner) != g.vertex_count:
        raise IndexGraphMismatch("index was built for a different graph")
    if check_vsg:
        _check_vsg(g, vsg, q.constraint)
    s, t, mask = q.source, q.target, q.labels
    if s == t:
        return _trivial_answer(g, q, s in set(vsg), start)

    st = InformedSearchState.fresh(g.vertex_count, ix, rho_invert, debug)
    st.close.set(s, F)
    st.queue.retarget(t)
    st.queue.push(s)
    candidates = list(dict.fromkeys(vsg))
    answer = False
    while candidates:
        # close states move during the run, so pick the best candidate by a fresh scan
        best = min(
            range(len(candidates)),
            key=lambda i: _heap_key(candidates[i], s, t, ix, st.close, rho_invert),
        )
        v = candidates[best]
        candidates[best] = candidates[-1]
        candidates.pop()
        cv = st.close[v]
        if cv == N:
            if v == s or v == t:
                answer = lcs_informed(g, ix, s, t, mask, F, st)
                break
            if lcs_informed(g, ix, s, v, mask, F, st) and lcs_informed(g, ix, v, t, mask, T, st):
                answer = True
                break
        elif cv == F:
            if lcs_informed(g, ix, v, t, mask, T, st):
                answer = True
                break

    st.pops.finish(st.stats, st.close)
    st.stats.wall_time = time.perf_counter() - start
    return QueryAnswer(answer, st.stats)
