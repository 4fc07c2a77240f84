"""The complexity measures, computed over a window of sentences.

Scores are floats; ``None`` marks a score that is undefined on the window (a
zero denominator, no n-grams of the required order, empty text).
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Callable

from .errors import RegistryError, ResourceError
from .lexres import NgramTable, ResourceBundle, SyllableCounter
from .transcript_io import Sentence, Token
from .treebank import PUNCT_TAGS, SyntacticCounts, TreeNode, syntactic_counts
from .treebank.counts import default_patterns

CATEGORIES = ("syntactic", "lexical", "ngram", "information")
DEFAULT_DEFLATE_LEVEL = 6
AUXILIARY_LEMMAS = frozenset({"be", "have", "do"})
LEXICAL_POS_PREFIXES = ("NN", "VB", "JJ", "RB")

REGISTER_ABBREV = {
    "academic": "acad", "fiction": "fic", "magazine": "mag", "spoken": "spok", "news": "news",
}
ORDER_NAMES = {2: "bigram", 3: "trigram", 4: "fourgram", 5: "fivegram"}


@dataclass(frozen=True)
class MeasureId:
    name: str
    category: str
    formula: str
    argument: str = "-"


@dataclass
class MeasureRegistry:
    version: str
    measures: dict[str, MeasureId]

    def __iter__(self):
        return iter(self.measures.values())

    def __len__(self):
        return len(self.measures)

    def __contains__(self, name):
        return name in self.measures

    @property
    def names(self) -> list[str]:
        return list(self.measures)

    def __getitem__(self, name: str) -> MeasureId:
        try:
            return self.measures[name]
        except KeyError:
            raise RegistryError(f"unknown measure {name!r}") from None

    def restrict(self, names) -> MeasureRegistry:
        return MeasureRegistry(self.version, {n: self[n] for n in names})

    def by_category(self, category: str) -> list[MeasureId]:
        return [m for m in self if m.category == category]

    def required_resources(self) -> list[str]:
        return [m.argument for m in self if m.formula in ("sophistication", "prevalence")]


_FORMULAS = {
    "syntactic": {"ratio"},
    "lexical": {"ttr", "cttr", "ld", "mlws", "mlwc", "sophistication", "prevalence"},
    "ngram": {"coverage"},
    "information": {"deflate"},
}


def parse_registry(text: str, origin: str = "<registry>") -> MeasureRegistry:
    version = "unversioned"
    measures: dict[str, MeasureId] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if cols[0] == "version" and len(cols) == 2:
            version = cols[1].strip()
            continue
        if len(cols) != 4:
            raise RegistryError(f"{origin}:{lineno}: expected name, category, formula, argument")
        name, category, formula, arg = (c.strip() for c in cols)
        if category not in _FORMULAS or formula not in _FORMULAS[category]:
            raise RegistryError(f"{origin}:{lineno}: unknown {category}/{formula}")
        if name in measures:
            raise RegistryError(f"{origin}:{lineno}: measure {name!r} listed twice")
        if formula == "ratio":
            num, sep, den = arg.partition("/")
            known = SyntacticCounts.__dataclass_fields__
            if not sep or num not in known or den not in known:
                raise RegistryError(f"{origin}:{lineno}: bad ratio {arg!r}")
        if formula == "coverage":
            register, _, n = arg.partition(":")
            if register not in REGISTER_ABBREV or not n.isdigit():
                raise RegistryError(f"{origin}:{lineno}: bad n-gram binding {arg!r}")
        measures[name] = MeasureId(name, category, formula, arg)
    return MeasureRegistry(version, measures)


def load_registry(path: str | Path | None = None) -> MeasureRegistry:
    if path is None:
        text = importlib_resources.files("l2complexity").joinpath("data/registry.tsv").read_text("utf-8")
        return parse_registry(text, "registry.tsv")
    return parse_registry(Path(path).read_text(encoding="utf-8"), str(path))


@dataclass(frozen=True)
class Window:
    """A contiguous run of sentences from one document."""

    sentences: tuple[Sentence, ...]
    start: int = 0

    def __post_init__(self):
        if not self.sentences:
            raise ValueError("a window needs at least one sentence")

    @property
    def tokens(self) -> list[Token]:
        return [t for s in self.sentences for t in s.tokens]

    @property
    def trees(self) -> list[TreeNode]:
        return [s.tree for s in self.sentences]


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


# --- syntactic ---------------------------------------------------------------

SYNTACTIC_RATIOS = {
    "C/S": ("clauses", "sentences"),
    "MLC": ("words", "clauses"),
    "T/S": ("t_units", "sentences"),
    "DepC/C": ("dependent_clauses", "clauses"),
    "DepC/T": ("dependent_clauses", "t_units"),
    "CompT/T": ("complex_t_units", "t_units"),
    "CoordP/C": ("coordinate_phrases", "clauses"),
    "CoordP/T": ("coordinate_phrases", "t_units"),
    "CompN/C": ("complex_nominals", "clauses"),
    "CompN/T": ("complex_nominals", "t_units"),
    "NP.PreMod": ("np_premodifiers", "noun_phrases"),
    "NP.PostMod": ("np_postmodifiers", "noun_phrases"),
}
NP_MOD_MEASURES = ("NP.PreMod", "NP.PostMod")


def syntactic_scores(counts: SyntacticCounts, ratios=None, npmod_per: str = "noun_phrases") -> dict:
    """Ratio measures from production-unit counts.

    ``npmod_per`` switches the denominator of NP.PreMod/NP.PostMod; it is
    ``noun_phrases`` by default and may be ``sentences``.
    """
    if npmod_per not in ("noun_phrases", "sentences"):
        raise ValueError(f"npmod_per must be 'noun_phrases' or 'sentences', not {npmod_per!r}")
    ratios = dict(ratios or SYNTACTIC_RATIOS)
    for name in NP_MOD_MEASURES:
        if name in ratios and ratios[name][1] == "noun_phrases":
            ratios[name] = (ratios[name][0], npmod_per)
    return {
        name: _ratio(getattr(counts, num), getattr(counts, den))
        for name, (num, den) in ratios.items()
    }


# --- lexical -----------------------------------------------------------------


def content_tokens(tokens) -> list[Token]:
    return [t for t in tokens if t.pos not in PUNCT_TAGS]


def is_lexical(token: Token) -> bool:
    if not token.pos.startswith(LEXICAL_POS_PREFIXES):
        return False
    if token.pos.startswith("VB") and token.lemma.lower() in AUXILIARY_LEMMAS:
        return False
    return True


def _syllable_mean(words, counter: SyllableCounter) -> float | None:
    counts = [counter.count(w) for w in words if w.isalpha()]
    return sum(counts) / len(counts) if counts else None


def basic_lexical_scores(tokens, counter: SyllableCounter | None = None) -> dict:
    """TTR, cTTR, LD, MLWs, MLWc over the non-punctuation tokens."""
    words = content_tokens(tokens)
    n = len(words)
    if n == 0:
        return dict.fromkeys(("TTR", "cTTR", "LD", "MLWs", "MLWc"))
    forms = [t.form.lower() for t in words]
    v = len(set(forms))
    return {
        "TTR": v / n,
        "cTTR": v / math.sqrt(2 * n),
        "LD": sum(1 for t in words if is_lexical(t)) / n,
        "MLWs": _syllable_mean(forms, counter or SyllableCounter()),
        "MLWc": sum(len(t.form) for t in words) / n,
    }


def lexical_types(tokens) -> set[str]:
    return {t.form.lower() for t in content_tokens(tokens) if is_lexical(t)}


def sophistication(tokens, freq_list) -> float | None:
    """Share of lexical word types beyond the list's cutoff (or not on it)."""
    types = lexical_types(tokens)
    if not types:
        return None
    return sum(1 for w in types if freq_list.is_sophisticated(w)) / len(types)


def prevalence(tokens, table) -> tuple[float | None, float]:
    """Mean prevalence over covered tokens, and the share of tokens covered."""
    words = content_tokens(tokens)
    scores = [s for s in (table.score(t.form) for t in words) if s is not None]
    coverage = len(scores) / len(words) if words else 0.0
    return (sum(scores) / len(scores) if scores else None), coverage


def lexical_scores(window: Window, resources: ResourceBundle) -> dict:
    """Every lexical measure the bundle supports, keyed by measure/resource name."""
    tokens = window.tokens
    out = basic_lexical_scores(tokens, resources.syllables)
    for name, flist in resources.frequency.items():
        out[name] = sophistication(tokens, flist)
    for name, table in resources.prevalence.items():
        out[name] = prevalence(tokens, table)[0]
    return out


# --- n-grams -----------------------------------------------------------------


def ngram_measure_name(register: str, n: int) -> str:
    return f"{ORDER_NAMES.get(n, f'{n}-gram')}.{REGISTER_ABBREV[register]}"


def sentence_ngrams(window: Window, n: int) -> list[tuple[str, ...]]:
    """Lower-cased word n-grams that do not cross sentence boundaries."""
    grams = []
    for s in window.sentences:
        forms = [t.form.lower() for t in s.tokens if t.pos not in PUNCT_TAGS]
        grams.extend(tuple(forms[i : i + n]) for i in range(len(forms) - n + 1))
    return grams


def coverage_percent(grams, table: NgramTable) -> float | None:
    if not grams:
        return None
    return 100.0 * sum(1 for g in grams if g in table) / len(grams)


NgramAggregate = Callable[[list, NgramTable], "float | None"]


def ngram_scores(window: Window, tables, aggregate: NgramAggregate = coverage_percent) -> dict:
    out = {}
    cache: dict[int, list] = {}
    for table in tables:
        if table.n not in cache:
            cache[table.n] = sentence_ngrams(window, table.n)
        out[ngram_measure_name(table.register, table.n)] = aggregate(cache[table.n], table)
    return out


# --- information-theoretic -----------------------------------------------------


def window_text(window: Window) -> str:
    return " ".join(t.form.lower() for t in window.tokens)


def deflate_ratio(text: str, level: int = DEFAULT_DEFLATE_LEVEL) -> float | None:
    """Raw Deflate size over UTF-8 size; ``None`` for empty text."""
    data = text.encode("utf-8")
    if not data:
        return None
    comp = zlib.compressobj(level, zlib.DEFLATED, -15)
    packed = comp.compress(data) + comp.flush()
    return len(packed) / len(data)


def koldef_score(window: Window, level: int = DEFAULT_DEFLATE_LEVEL) -> float | None:
    return deflate_ratio(window_text(window), level)


# --- dispatch ----------------------------------------------------------------


def score_window(
    window: Window,
    registry: MeasureRegistry,
    resources: ResourceBundle,
    *,
    deflate_level: int = DEFAULT_DEFLATE_LEVEL,
    npmod_per: str = "noun_phrases",
    patterns=None,
) -> dict[str, float | None]:
    """One score per registered measure, in registry order."""
    out: dict[str, float | None] = {}
    measures = list(registry)
    cats = {m.category for m in measures}
    tokens = window.tokens

    if "syntactic" in cats:
        counts = syntactic_counts(window.trees, patterns or default_patterns())
        ratios = {m.name: tuple(m.argument.split("/")) for m in measures if m.formula == "ratio"}
        synt = syntactic_scores(counts, ratios, npmod_per)
    basic = basic_lexical_scores(tokens, resources.syllables) if "lexical" in cats else {}
    gram_cache: dict[int, list] = {}

    for m in measures:
        if m.formula == "ratio":
            out[m.name] = synt[m.name]
        elif m.formula in ("ttr", "cttr", "ld", "mlws", "mlwc"):
            key = {"ttr": "TTR", "cttr": "cTTR", "ld": "LD", "mlws": "MLWs", "mlwc": "MLWc"}[m.formula]
            out[m.name] = basic[key]
        elif m.formula == "sophistication":
            if m.argument not in resources.frequency:
                raise ResourceError(f"measure {m.name} needs frequency list {m.argument!r}")
            out[m.name] = sophistication(tokens, resources.frequency[m.argument])
        elif m.formula == "prevalence":
            if m.argument not in resources.prevalence:
                raise ResourceError(f"measure {m.name} needs prevalence table {m.argument!r}")
            out[m.name] = prevalence(tokens, resources.prevalence[m.argument])[0]
        elif m.formula == "coverage":
            register, _, n = m.argument.partition(":")
            n = int(n)
            table = resources.ngram_table(register, n)
            if n not in gram_cache:
                gram_cache[n] = sentence_ngrams(window, n)
            out[m.name] = coverage_percent(gram_cache[n], table)
        elif m.formula == "deflate":
            out[m.name] = koldef_score(window, deflate_level)
        else:
            raise RegistryError(f"measure {m.name}: unknown formula {m.formula!r}")
    return out


def check_resources(registry: MeasureRegistry, resources: ResourceBundle) -> None:
    """Raise ``ResourceError`` naming every resource the registry needs but lacks."""
    missing = []
    for m in registry:
        if m.formula == "sophistication" and m.argument not in resources.frequency:
            missing.append(m.argument)
        elif m.formula == "prevalence" and m.argument not in resources.prevalence:
            missing.append(m.argument)
        elif m.formula == "coverage":
            register, _, n = m.argument.partition(":")
            try:
                resources.ngram_table(register, int(n))
            except ResourceError:
                missing.append(f"{register} {n}-grams")
    if missing:
        raise ResourceError(f"resources missing for the registry: {', '.join(missing)}")
