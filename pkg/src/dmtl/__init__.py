"""Materialisation-based reasoning for DatalogMTL over the rational timeline."""

from .analysis import optimised, recursive_predicates, split_fragments
from .dataset import Dataset, Fact, coalesce_merge, semantic_diff
from .reasoner import naive, seminaive
from .syntax import parse_fact, parse_facts, parse_metric, parse_program, parse_rule
from .temporal import Interval, normalize

__all__ = [
    "Dataset", "Fact", "Interval", "coalesce_merge", "naive", "normalize", "optimised",
    "parse_fact", "parse_facts", "parse_metric", "parse_program", "parse_rule",
    "recursive_predicates", "semantic_diff", "seminaive", "split_fragments",
]
