from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from l2complexity.errors import ResourceError, UndefinedWordError
from l2complexity.lexres import (
    FrequencyList,
    NgramTable,
    SyllableCounter,
    default_resource_dir,
    load_resources,
    syllables,
)


def write_bundle(d, extra_manifest="", files=None):
    files = files or {
        "f.tsv": "the\t1\ndog\t500\nsesquipedalian\t30000\n",
        "p.tsv": "the\t10.5\nDog\t3.25\n",
        "g.tsv": "i think that\t12\nthink that he\t3\n",
        "s.tsv": "people\t2\n",
    }
    for name, text in files.items():
        (d / name).write_text(text, encoding="utf-8")
    (d / "manifest.tsv").write_text(
        "F\tfrequency\tf.tsv\tcutoff=2000\nP\tprevalence\tp.tsv\n"
        "G\tngram\tg.tsv\tregister=academic\tn=3\nsyl\tsyllables\ts.tsv\n" + extra_manifest,
        encoding="utf-8",
    )
    return d


def test_shipped_bundle_has_twelve_named_resources():
    bundle = load_resources(default_resource_dir())
    assert len(bundle) == 12
    assert len(bundle.frequency) == 3 and len(bundle.prevalence) == 3 and len(bundle.ngrams) == 6


def test_lookups_are_case_insensitive(tmp_path):
    b = load_resources(write_bundle(tmp_path))
    assert b.get("P").score("DOG") == b.get("P").score("dog") == 3.25
    assert b.get("F").rank("The") == 1
    assert ("I", "Think", "THAT") in b.get("G")
    assert "i  think   that" in b.get("G")
    assert "think that she" not in b.get("G")


def test_missing_file_is_listed(tmp_path):
    write_bundle(tmp_path, extra_manifest="Q\tprevalence\tmissing.tsv\n")
    with pytest.raises(ResourceError, match="missing.tsv"):
        load_resources(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(ResourceError, match="does not exist"):
        load_resources(tmp_path / "nope")


def test_short_gram_rejected(tmp_path):
    (tmp_path / "g.tsv").write_text("the of\t4\n", encoding="utf-8")
    with pytest.raises(ResourceError, match="2 items, need 3"):
        NgramTable.from_tsv("G", tmp_path / "g.tsv", "academic", 3)


def test_duplicate_frequency_word_named(tmp_path):
    (tmp_path / "f.tsv").write_text("dog\t1\ncat\t2\nDog\t3\n", encoding="utf-8")
    with pytest.raises(ResourceError, match="'dog'"):
        FrequencyList.from_tsv("F", tmp_path / "f.tsv")


def test_malformed_row_names_file_and_line(tmp_path):
    (tmp_path / "p.tsv").write_text("the\t1.0\ndog\tlots\n", encoding="utf-8")
    with pytest.raises(ResourceError, match=r"p\.tsv:2"):
        load_resources(write_bundle(tmp_path, files={
            "f.tsv": "the\t1\n", "p.tsv": "the\t1.0\ndog\tlots\n", "g.tsv": "a b c\t1\n", "s.tsv": "",
        }))


def test_sophistication_cutoff():
    fl = FrequencyList("F", {"the": 1, "dog": 500, "sesquipedalian": 30000}, 2000)
    assert not fl.is_sophisticated("dog")
    assert fl.is_sophisticated("sesquipedalian")
    assert fl.is_sophisticated("unlisted")


@pytest.mark.parametrize("word,count", [("dog", 1), ("banana", 3), ("make", 1), ("the", 1),
                                        ("be", 1), ("table", 1), ("queue", 1), ("rhythm", 1)])
def test_syllable_heuristic(word, count):
    assert syllables(word) == count


def test_exceptions_win():
    counter = SyllableCounter({"table": 2, "dog": 4})
    assert counter.count("Table") == 2
    assert counter.count("dog") == 4


@pytest.mark.parametrize("word", ["", "can't", "42", "e-mail"])
def test_non_alphabetic_is_undefined(word):
    with pytest.raises(UndefinedWordError):
        syllables(word)


@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ", min_size=1, max_size=20))
def test_syllables_at_least_one_and_case_blind(word):
    assert syllables(word) >= 1
    assert syllables(word) == syllables(word.lower())
