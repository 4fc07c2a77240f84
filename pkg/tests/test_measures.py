from __future__ import annotations

import math
import random
import string

import pytest

from helpers import flat_sentence, random_window, tokens
from l2complexity.errors import RegistryError
from l2complexity.lexres import FrequencyList, NgramTable, default_resource_dir, load_resources
from l2complexity.measures import (
    Window,
    basic_lexical_scores,
    deflate_ratio,
    koldef_score,
    load_registry,
    ngram_scores,
    parse_registry,
    score_window,
    sophistication,
    syntactic_scores,
)
from l2complexity.transcript_io import Sentence, Token
from l2complexity.treebank import SyntacticCounts

RESOURCES = load_resources(default_resource_dir())
REGISTRY = load_registry()


def counts(**kw):
    base = dict.fromkeys(SyntacticCounts.__dataclass_fields__, 0)
    base.update(kw)
    return SyntacticCounts(**base)


def window_of(text: str) -> Window:
    return Window((flat_sentence(tokens(text)),))


# --- registry ---------------------------------------------------------------------


def test_default_registry_shape():
    cats = [m.category for m in REGISTRY]
    assert len(REGISTRY.names) == 30
    assert cats.count("syntactic") == 12
    assert cats.count("lexical") == 11
    assert cats.count("ngram") == 6
    assert cats.count("information") == 1


def test_unknown_measure_is_registry_error():
    with pytest.raises(RegistryError):
        REGISTRY["XYZ"]
    with pytest.raises(RegistryError):
        REGISTRY.restrict(["TTR", "XYZ"])


def test_registry_rejects_unknown_formula():
    with pytest.raises(RegistryError):
        parse_registry("version\t1\nFOO\tlexical\tmystery\t-\n")


# --- syntactic ------------------------------------------------------------------


def test_direct_ratios():
    s = syntactic_scores(counts(words=10, clauses=2, sentences=1))
    assert s["MLC"] == 5.0
    assert s["C/S"] == 2.0


def test_zero_denominator_is_missing():
    s = syntactic_scores(counts(words=4, sentences=1))
    assert s["MLC"] is None
    assert s["DepC/C"] is None
    assert s["T/S"] == 0.0


def test_npmod_normalisation_switch():
    c = counts(sentences=2, noun_phrases=4, np_premodifiers=2, np_postmodifiers=1)
    assert syntactic_scores(c)["NP.PreMod"] == 0.5
    assert syntactic_scores(c, npmod_per="sentences")["NP.PreMod"] == 1.0


# --- lexical --------------------------------------------------------------------


def test_basic_lexical_example():
    s = basic_lexical_scores(tokens("The/DT dog/NN barked/VBD loudly/RB"))
    assert s["TTR"] == 1.0
    assert s["LD"] == 0.75
    assert s["MLWc"] == 4.5


def test_cttr_formula():
    toks = [Token(f"w{k % 20}", f"w{k % 20}", "NN") for k in range(50)]
    assert basic_lexical_scores(toks)["cTTR"] == pytest.approx(2.0, abs=1e-12)


def test_auxiliaries_and_punctuation():
    toks = tokens("She/PRP has/VBZ eaten/VBN ./.")
    toks[1] = Token("has", "have", "VBZ")
    s = basic_lexical_scores(toks)
    assert s["LD"] == pytest.approx(1 / 3)
    assert s["TTR"] == 1.0


def test_sophistication_example():
    fl = FrequencyList("F", {"the": 1, "dog": 500, "sesquipedalian": 30000}, 2000)
    toks = tokens("the/DT dog/NN sesquipedalian/JJ dog/NN")
    assert sophistication(toks, fl) == 0.5


def test_duplicated_window():
    rng = random.Random(9)
    for _ in range(30):
        w = random_window(rng)
        twice = Window(w.sentences + w.sentences)
        a = score_window(w, REGISTRY, RESOURCES)
        b = score_window(twice, REGISTRY, RESOURCES)
        assert b["TTR"] < a["TTR"]
        assert b["LD"] == pytest.approx(a["LD"])
        for name in ("ANC", "BNC", "NGSL"):
            assert b[name] == a[name]


# --- n-grams --------------------------------------------------------------------


def table(grams, n=3, register="academic"):
    return NgramTable("T", register, n, frozenset(grams))


def test_ngram_coverage_example():
    w = window_of("I/PRP think/VBP that/IN he/PRP")
    w3 = window_of("I/PRP think/VBP that/IN")
    assert ngram_scores(w3, [table({"i think that"})]) == {"trigram.acad": 100.0}
    scores = ngram_scores(window_of("I/PRP think/VBP that/IN he/PRP"), [table({"i think that"})])
    assert scores["trigram.acad"] == 50.0
    assert ngram_scores(w, [table(set())])["trigram.acad"] == 0.0


def test_ngram_missing_when_sentence_too_short():
    w = window_of("I/PRP think/VBP that/IN he/PRP")
    assert ngram_scores(w, [table(set(), n=5, register="spoken")])["fivegram.spok"] is None


def test_ngrams_do_not_cross_sentences():
    s1, s2 = flat_sentence(tokens("a/DT b/NN")), flat_sentence(tokens("c/DT d/NN"))
    assert ngram_scores(Window((s1, s2)), [table({"a b c", "b c d"})])["trigram.acad"] is None


# --- KolDef ---------------------------------------------------------------------


def test_deflate_repetitive():
    assert deflate_ratio("a " * 1000) < 0.05


def test_deflate_random_above_repetitive():
    rng = random.Random(0)
    noise = "".join(rng.choice(string.ascii_lowercase) for _ in range(2000))
    assert deflate_ratio(noise) > deflate_ratio("a " * 1000)


def test_deflate_single_char_overhead():
    assert deflate_ratio("a") > 1


def test_deflate_empty_is_missing():
    assert deflate_ratio("") is None


def test_koldef_uses_lowercased_space_joined_text():
    w = window_of("The/DT Dog/NN")
    assert koldef_score(w) == deflate_ratio("the dog")


def test_deflate_level_changes_nothing_for_same_level():
    text = "the dog barked " * 40
    assert deflate_ratio(text, 6) == deflate_ratio(text, 6)
    assert deflate_ratio(text, 0) > deflate_ratio(text, 9)


# --- dispatch -------------------------------------------------------------------


def test_score_window_has_thirty_entries():
    w = random_window(random.Random(1))
    assert list(score_window(w, REGISTRY, RESOURCES)) == REGISTRY.names


def test_restricted_registry():
    w = random_window(random.Random(1))
    assert list(score_window(w, REGISTRY.restrict(["TTR"]), RESOURCES)) == ["TTR"]


def test_fragment_window():
    s = Sentence(tuple(tokens("the/DT political/JJ system/NN ./.")),
                 "(ROOT (FRAG (NP (DT the) (JJ political) (NN system)) (. .)))")
    scores = score_window(Window((s,)), REGISTRY, RESOURCES)
    assert scores["MLC"] is None and scores["DepC/C"] is None
    assert scores["TTR"] == 1.0
    assert math.isfinite(scores["KolDef"])
