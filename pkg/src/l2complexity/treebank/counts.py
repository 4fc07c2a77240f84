from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from functools import lru_cache

from .patterns import PatternSet, load_pattern_set
from .tree import TreeNode, word_count

PATTERN_COUNTERS = (
    "clause",
    "t_unit",
    "dependent_clause",
    "complex_t_unit",
    "coordinate_phrase",
    "complex_nominal",
    "noun_phrase",
    "np_premodifier",
    "np_postmodifier",
)


@dataclass(frozen=True)
class SyntacticCounts:
    """Production-unit counts summed over a run of sentences."""

    words: int = 0
    sentences: int = 0
    clauses: int = 0
    t_units: int = 0
    dependent_clauses: int = 0
    complex_t_units: int = 0
    coordinate_phrases: int = 0
    complex_nominals: int = 0
    noun_phrases: int = 0
    np_premodifiers: int = 0
    np_postmodifiers: int = 0

    def __add__(self, other: SyntacticCounts) -> SyntacticCounts:
        return SyntacticCounts(*(a + b for a, b in zip(astuple(self), astuple(other))))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@lru_cache(maxsize=1)
def default_patterns() -> PatternSet:
    return load_pattern_set()


def tree_counts(tree: TreeNode, patterns: PatternSet | None = None) -> SyntacticCounts:
    patterns = patterns or default_patterns()
    c = patterns.count_all(tree, PATTERN_COUNTERS)
    return SyntacticCounts(
        words=word_count(tree),
        sentences=1,
        clauses=c["clause"],
        t_units=c["t_unit"],
        dependent_clauses=c["dependent_clause"],
        complex_t_units=c["complex_t_unit"],
        coordinate_phrases=c["coordinate_phrase"],
        complex_nominals=c["complex_nominal"],
        noun_phrases=c["noun_phrase"],
        np_premodifiers=c["np_premodifier"],
        np_postmodifiers=c["np_postmodifier"],
    )


def syntactic_counts(trees, patterns: PatternSet | None = None) -> SyntacticCounts:
    """Sum of :func:`tree_counts` over ``trees``; one tree is one sentence."""
    total = SyntacticCounts()
    for tree in trees:
        total = total + tree_counts(tree, patterns)
    return total
