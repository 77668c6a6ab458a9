"""Substructure constraints: a tiny SELECT/WHERE pattern language and a backtracking matcher.

A constraint is a list of triple patterns ``term label term`` where each term
is a concrete vertex or a ``?variable``.  A vertex ``v`` satisfies the
constraint when binding the focus variable to ``v`` lets every pattern map
onto an edge of the graph with consistent variable bindings.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

from .errors import ConstraintSyntaxError, FocusUnused, UnknownLabelName, UnknownVertexName

if TYPE_CHECKING:
    from .graph import KnowledgeGraph


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


Term = Union[int, Var]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: int
    object: Term


@dataclass
class SubstructureConstraint:
    focus: Var
    patterns: list[TriplePattern]
    concrete_vertices: frozenset[int] = field(default=frozenset())
    text: str = ""

    def __post_init__(self):
        if not self.concrete_vertices:
            concrete = set()
            for p in self.patterns:
                for term in (p.subject, p.object):
                    if not isinstance(term, Var):
                        concrete.add(term)
            self.concrete_vertices = frozenset(concrete)
        if not any(self.focus in (p.subject, p.object) for p in self.patterns):
            raise FocusUnused(f"focus {self.focus} does not appear in any pattern")
        _check_connected(self)

    def render(self, g: "KnowledgeGraph") -> str:
        def term(t: Term) -> str:
            return str(t) if isinstance(t, Var) else g.vertex_names[t]

        body = " . ".join(
            f"{term(p.subject)} {g.label_names[p.predicate]} {term(p.object)}"
            for p in self.patterns
        )
        return f"SELECT {self.focus} WHERE {{ {body} }}"


def _check_connected(s: SubstructureConstraint) -> None:
    nodes: dict[Term, set[Term]] = {}
    for p in s.patterns:
        nodes.setdefault(p.subject, set()).add(p.object)
        nodes.setdefault(p.object, set()).add(p.subject)
    seen = {s.focus}
    stack = [s.focus]
    while stack:
        for nxt in nodes[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != len(nodes):
        raise ConstraintSyntaxError("pattern graph is not connected")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r'"[^"]*"|\'[^\']*\'|<[^>]*>|[{}]|[^\s{}]+')


def _unquote(tok: str) -> str:
    if len(tok) >= 2 and tok[0] == tok[-1] and tok[0] in "\"'":
        return tok[1:-1]
    if len(tok) >= 2 and tok[0] == "<" and tok[-1] == ">":
        return tok[1:-1]
    return tok


def parse_constraint(text: str, g: "KnowledgeGraph") -> SubstructureConstraint:
    tokens = _TOKEN.findall(text)
    if len(tokens) < 4 or tokens[0].upper() != "SELECT":
        raise ConstraintSyntaxError("expected 'SELECT ?x WHERE { ... }'")
    focus_tok = tokens[1]
    if not focus_tok.startswith("?") or len(focus_tok) < 2:
        raise ConstraintSyntaxError(f"focus must be a variable, got {focus_tok!r}")
    if tokens[2].upper() != "WHERE" or tokens[3] != "{":
        raise ConstraintSyntaxError("expected 'WHERE {'")
    if tokens[-1] != "}":
        raise ConstraintSyntaxError("missing closing '}'")
    body = tokens[4:-1]
    if "{" in body or "}" in body:
        raise ConstraintSyntaxError("nested braces are not supported")

    triples: list[list[str]] = []
    current: list[str] = []
    for tok in body:
        if tok == ".":
            if current:
                raise ConstraintSyntaxError(f"incomplete triple {' '.join(current)!r}")
            continue
        trailing_dot = len(current) == 2 and tok.endswith(".") and len(tok) > 1
        current.append(tok[:-1] if trailing_dot else tok)
        if len(current) == 3:
            triples.append(current)
            current = []
    if current:
        raise ConstraintSyntaxError(f"incomplete triple {' '.join(current)!r}")

    def term(tok: str) -> Term:
        if tok.startswith("?"):
            if len(tok) < 2:
                raise ConstraintSyntaxError("empty variable name")
            return Var(tok[1:])
        name = _unquote(tok)
        try:
            return g.vertex_ids[name]
        except KeyError:
            raise UnknownVertexName(name) from None

    patterns = []
    for s_tok, p_tok, o_tok in triples:
        label = _unquote(p_tok)
        if label not in g.label_ids:
            raise UnknownLabelName(label)
        patterns.append(TriplePattern(term(s_tok), g.label_ids[label], term(o_tok)))

    return SubstructureConstraint(Var(focus_tok[1:]), patterns, text=text.strip())


# ---------------------------------------------------------------------------
# matching


def _candidates(g: "KnowledgeGraph", p: TriplePattern, binding: dict[Var, int]):
    """Yield (subject, object) pairs matching ``p`` given current bindings."""
    s = p.subject if not isinstance(p.subject, Var) else binding.get(p.subject)
    o = p.object if not isinstance(p.object, Var) else binding.get(p.object)
    l = p.predicate
    if s is not None and o is not None:
        if (s, l, o) in g.edge_set:
            yield s, o
    elif s is not None:
        for lab, w in g.out_adjacency[s]:
            if lab == l:
                yield s, w
    elif o is not None:
        for lab, u in g.in_adjacency[o]:
            if lab == l:
                yield u, o
    else:
        for u in g.sources_with_label(l):
            for lab, w in g.out_adjacency[u]:
                if lab == l:
                    yield u, w


def _cost(g: "KnowledgeGraph", p: TriplePattern, binding: dict[Var, int]) -> int:
    s_bound = not isinstance(p.subject, Var) or p.subject in binding
    o_bound = not isinstance(p.object, Var) or p.object in binding
    if s_bound and o_bound:
        return 0
    if s_bound:
        s = p.subject if not isinstance(p.subject, Var) else binding[p.subject]
        return 1 + len(g.out_adjacency[s])
    if o_bound:
        o = p.object if not isinstance(p.object, Var) else binding[p.object]
        return 1 + len(g.in_adjacency[o])
    return 1 << 62


def _bind(binding: dict[Var, int], term: Term, value: int) -> bool:
    """Bind a variable term, returning False on a conflicting earlier binding."""
    if not isinstance(term, Var):
        return term == value
    bound = binding.get(term)
    if bound is None:
        binding[term] = value
        return True
    return bound == value


def _join(g: "KnowledgeGraph", remaining: list[TriplePattern], binding: dict[Var, int]) -> bool:
    if not remaining:
        return True
    best = min(range(len(remaining)), key=lambda i: _cost(g, remaining[i], binding))
    p = remaining[best]
    rest = remaining[:best] + remaining[best + 1:]
    for s, o in _candidates(g, p, binding):
        trial = dict(binding)
        if _bind(trial, p.subject, s) and _bind(trial, p.object, o) and _join(g, rest, trial):
            return True
    return False


def satisfies(g: "KnowledgeGraph", v: int, s: SubstructureConstraint) -> bool:
    return _join(g, list(s.patterns), {s.focus: v})


def match_all(g: "KnowledgeGraph", s: SubstructureConstraint) -> list[int]:
    """Sorted list of every vertex satisfying ``s``."""
    best: list[int] | None = None
    for p in s.patterns:
        if p.subject == s.focus and p.object == s.focus:
            seeds = {u for u, o in _candidates(g, p, {}) if u == o}
        elif p.subject == s.focus:
            seeds = {u for u, _ in _candidates(g, p, {})}
        elif p.object == s.focus:
            seeds = {o for _, o in _candidates(g, p, {})}
        else:
            continue
        if best is None or len(seeds) < len(best):
            best = sorted(seeds)
    assert best is not None  # focus is always used
    return [v for v in best if satisfies(g, v, s)]
