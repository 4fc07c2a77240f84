from .counts import SyntacticCounts, syntactic_counts, tree_counts
from .patterns import (
    Pattern,
    PatternSet,
    compile_pattern,
    load_pattern_set,
    match_count,
    match_nodes,
)
from .tree import PUNCT_TAGS, TreeNode, parse_ptb, to_string, word_count

__all__ = [
    "PUNCT_TAGS",
    "Pattern",
    "PatternSet",
    "SyntacticCounts",
    "TreeNode",
    "compile_pattern",
    "load_pattern_set",
    "match_count",
    "match_nodes",
    "parse_ptb",
    "syntactic_counts",
    "to_string",
    "tree_counts",
    "word_count",
]
