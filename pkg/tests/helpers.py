"""Shared builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from l2complexity.measures import Window
from l2complexity.synth import Generator, sentence_from_tree
from l2complexity.transcript_io import Sentence, Token
from l2complexity.treebank import TreeNode, to_string

DATA = Path(__file__).parent / "data"

COUNT_FIELDS = (
    "words", "sentences", "clauses", "t_units", "dependent_clauses", "complex_t_units",
    "coordinate_phrases", "complex_nominals", "noun_phrases", "np_premodifiers", "np_postmodifiers",
)


def flat_sentence(tokens) -> Sentence:
    """Sentence whose tree is just the preterminals under one FRAG."""
    tree = TreeNode("ROOT", (TreeNode("FRAG", tuple(TreeNode.pre(t.pos, t.form) for t in tokens)),))
    return Sentence(tuple(tokens), to_string(tree), tree)


def tokens(text: str) -> list[Token]:
    """``"The/DT dog/NN"`` style tokens; lemma is the lower-cased form."""
    out = []
    for item in text.split():
        form, _, pos = item.rpartition("/")
        out.append(Token(form, form.lower(), pos))
    return out


def random_window(rng: random.Random) -> Window:
    gen = Generator(rng.randrange(1 << 30), level=rng.random())
    return Window(tuple(sentence_from_tree(gen.sentence()) for _ in range(rng.randint(1, 5))))


def syntactic_fixture():
    """[(expected counts dict, parse)] from the shipped hand-counted fixture."""
    rows = []
    for line in (DATA / "syntactic_fixture.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        rows.append((dict(zip(COUNT_FIELDS, map(int, cols[:-1]))), cols[-1]))
    return rows
