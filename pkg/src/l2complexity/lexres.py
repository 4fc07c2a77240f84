"""External lexical resources: frequency lists, prevalence tables, register n-gram
tables and syllable exceptions.

A resource directory holds a ``manifest.tsv`` with one resource per line::

    id<TAB>kind<TAB>filename[<TAB>key=value ...]

``kind`` is ``frequency`` (option ``cutoff``, default 2000), ``prevalence``,
``ngram`` (options ``register`` and ``n``) or ``syllables``. Resource files are
two-column TSVs (``word<TAB>rank``, ``word<TAB>score``, ``gram<TAB>frequency``,
``word<TAB>count``). Lookups are case-insensitive.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ResourceError, UndefinedWordError

MANIFEST = "manifest.tsv"
REGISTERS = ("spoken", "magazine", "fiction", "news", "academic")
DEFAULT_CUTOFF = 2000


def _rows(path: Path):
    """Yield (lineno, fields) for non-blank, non-comment lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line.split("\t")


def _two_col(path: Path, convert):
    for lineno, cols in _rows(path):
        if len(cols) != 2 or not cols[0].strip():
            raise ResourceError(f"{path}:{lineno}: expected 2 tab-separated columns")
        try:
            value = convert(cols[1])
        except ValueError:
            raise ResourceError(f"{path}:{lineno}: bad value {cols[1]!r}") from None
        yield lineno, cols[0].strip().lower(), value


def _normalize_gram(gram: str) -> str:
    return " ".join(gram.lower().split())


@dataclass
class FrequencyList:
    name: str
    ranked_words: dict[str, int]
    sophistication_cutoff: int = DEFAULT_CUTOFF

    def rank(self, word: str) -> int | None:
        return self.ranked_words.get(word.lower())

    def is_sophisticated(self, word: str) -> bool:
        """Beyond the cutoff rank, or not on the list at all."""
        r = self.rank(word)
        return r is None or r > self.sophistication_cutoff

    @classmethod
    def from_tsv(cls, name, path, cutoff=DEFAULT_CUTOFF):
        if cutoff < 1:
            raise ResourceError(f"{name}: cutoff must be >= 1, got {cutoff}")
        ranks: dict[str, int] = {}
        for lineno, word, rank in _two_col(Path(path), int):
            if rank < 1:
                raise ResourceError(f"{path}:{lineno}: rank must be positive")
            if word in ranks:
                raise ResourceError(f"{path}:{lineno}: duplicate word {word!r} in {name}")
            ranks[word] = rank
        return cls(name, ranks, cutoff)


@dataclass
class PrevalenceTable:
    name: str
    values: dict[str, float]

    def score(self, word: str) -> float | None:
        return self.values.get(word.lower())

    @classmethod
    def from_tsv(cls, name, path):
        values: dict[str, float] = {}
        for lineno, word, score in _two_col(Path(path), float):
            if not math.isfinite(score):
                raise ResourceError(f"{path}:{lineno}: non-finite score")
            if word in values:
                raise ResourceError(f"{path}:{lineno}: duplicate word {word!r} in {name}")
            values[word] = score
        return cls(name, values)


@dataclass
class NgramTable:
    name: str
    register: str
    n: int
    grams: frozenset[str]
    frequencies: dict[str, float] = field(default_factory=dict, repr=False)

    def __contains__(self, gram) -> bool:
        if not isinstance(gram, str):
            gram = " ".join(gram)
        return _normalize_gram(gram) in self.grams

    @classmethod
    def from_tsv(cls, name, path, register, n):
        if register not in REGISTERS:
            raise ResourceError(f"{name}: unknown register {register!r}")
        freqs: dict[str, float] = {}
        for lineno, cols in _rows(Path(path)):
            if len(cols) not in (1, 2):
                raise ResourceError(f"{path}:{lineno}: expected gram<TAB>frequency")
            gram = _normalize_gram(cols[0])
            if len(gram.split(" ")) != n or not gram:
                raise ResourceError(
                    f"{path}:{lineno}: {cols[0]!r} has {len(gram.split())} items, need {n}"
                )
            try:
                freqs[gram] = float(cols[1]) if len(cols) == 2 else 0.0
            except ValueError:
                raise ResourceError(f"{path}:{lineno}: bad frequency {cols[1]!r}") from None
        return cls(name, register, n, frozenset(freqs), freqs)


_VOWEL_GROUP = re.compile(r"[aeiouy]+")


@dataclass
class SyllableCounter:
    exceptions: dict[str, int] = field(default_factory=dict)

    def __call__(self, word: str) -> int:
        return self.count(word)

    def count(self, word: str) -> int:
        w = word.lower()
        if not w or not w.isalpha():
            raise UndefinedWordError(f"cannot count syllables of {word!r}")
        if w in self.exceptions:
            return self.exceptions[w]
        n = len(_VOWEL_GROUP.findall(w))
        if n > 1 and len(w) >= 2 and w.endswith("e") and w[-2] not in "aeiouy":
            n -= 1
        return max(n, 1)

    @classmethod
    def from_tsv(cls, path):
        table: dict[str, int] = {}
        for lineno, word, count in _two_col(Path(path), int):
            if count < 1:
                raise ResourceError(f"{path}:{lineno}: syllable count must be >= 1")
            table[word] = count
        return cls(table)


_default_counter = SyllableCounter()


def syllables(word: str, counter: SyllableCounter | None = None) -> int:
    """Syllables in ``word``: exceptions first, then vowel groups with a silent-e rule.

    >>> syllables("banana"), syllables("make")
    (3, 1)
    """
    return (counter or _default_counter).count(word)


@dataclass
class ResourceBundle:
    frequency: dict[str, FrequencyList] = field(default_factory=dict)
    prevalence: dict[str, PrevalenceTable] = field(default_factory=dict)
    ngrams: dict[str, NgramTable] = field(default_factory=dict)
    syllables: SyllableCounter = field(default_factory=SyllableCounter)
    source: str = ""

    @property
    def names(self) -> list[str]:
        return sorted([*self.frequency, *self.prevalence, *self.ngrams])

    def __len__(self):
        return len(self.names)

    def get(self, name: str):
        for table in (self.frequency, self.prevalence, self.ngrams):
            if name in table:
                return table[name]
        raise ResourceError(f"resource {name!r} not loaded (have: {', '.join(self.names)})")

    def ngram_table(self, register: str, n: int) -> NgramTable:
        for table in self.ngrams.values():
            if table.register == register and table.n == n:
                return table
        raise ResourceError(f"no {n}-gram table for register {register!r}")


def _options(cols, path, lineno):
    opts = {}
    for item in cols:
        key, sep, value = item.partition("=")
        if not sep:
            raise ResourceError(f"{path}:{lineno}: option {item!r} is not key=value")
        opts[key.strip()] = value.strip()
    return opts


def load_resources(directory: str | Path) -> ResourceBundle:
    """Read every resource named in ``directory/manifest.tsv``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ResourceError(f"resource directory {directory} does not exist")
    manifest = directory / MANIFEST
    if not manifest.is_file():
        raise ResourceError(f"resource directory {directory} has no {MANIFEST}")

    entries = []
    missing = []
    for lineno, cols in _rows(manifest):
        if len(cols) < 3:
            raise ResourceError(f"{manifest}:{lineno}: expected id<TAB>kind<TAB>file")
        rid, kind, fname = (c.strip() for c in cols[:3])
        opts = _options(cols[3:], manifest, lineno)
        path = directory / fname
        if not path.is_file():
            missing.append(f"{rid} ({fname})")
        entries.append((lineno, rid, kind, path, opts))
    if missing:
        raise ResourceError(f"missing resource files in {directory}: {', '.join(missing)}")

    bundle = ResourceBundle(source=str(directory))
    seen = set()
    for lineno, rid, kind, path, opts in entries:
        if rid in seen:
            raise ResourceError(f"{manifest}:{lineno}: resource id {rid!r} listed twice")
        seen.add(rid)
        try:
            if kind == "frequency":
                cutoff = int(opts.get("cutoff", DEFAULT_CUTOFF))
                bundle.frequency[rid] = FrequencyList.from_tsv(rid, path, cutoff)
            elif kind == "prevalence":
                bundle.prevalence[rid] = PrevalenceTable.from_tsv(rid, path)
            elif kind == "ngram":
                register, n = opts.get("register"), int(opts.get("n", 0))
                if n < 1:
                    raise ResourceError(f"{manifest}:{lineno}: ngram needs n=<order>")
                bundle.ngrams[rid] = NgramTable.from_tsv(rid, path, register, n)
            elif kind == "syllables":
                bundle.syllables = SyllableCounter.from_tsv(path)
            else:
                raise ResourceError(f"{manifest}:{lineno}: unknown resource kind {kind!r}")
        except ValueError as exc:
            raise ResourceError(f"{manifest}:{lineno}: {exc}") from None
    return bundle


def default_resource_dir() -> Path:
    """The small synthetic resource set shipped with the package."""
    return Path(str(resources.files("l2complexity").joinpath("data/resources")))
