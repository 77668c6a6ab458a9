"""Reachability queries with label and substructure constraints on edge-labeled graphs."""
from .graph import IngestOptions, KnowledgeGraph, graph_from_text, load_graph
from .index import LocalIndex, build_index, load_index, save_index
from .informed import ins_query
from .labels import LabelSetFamily, cms_oracle, label_set
from .pattern import SubstructureConstraint, match_all, parse_constraint, satisfies
from .search import LscrQuery, QueryAnswer, SearchStats, uis_query, uis_star_query
from .workload import GraphGenSpec, QueryGenSpec, gen_graph, gen_queries, oracle_lscr

__all__ = [
    "IngestOptions", "KnowledgeGraph", "graph_from_text", "load_graph",
    "LocalIndex", "build_index", "load_index", "save_index",
    "ins_query",
    "LabelSetFamily", "cms_oracle", "label_set",
    "SubstructureConstraint", "match_all", "parse_constraint", "satisfies",
    "LscrQuery", "QueryAnswer", "SearchStats", "uis_query", "uis_star_query",
    "GraphGenSpec", "QueryGenSpec", "gen_graph", "gen_queries", "oracle_lscr",
]
