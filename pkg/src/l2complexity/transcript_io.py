"""Annotated transcripts in, score tables out.

Corpus files are JSON Lines, one recording per line::

    {"id": "s01", "speaker_id": "spk1", "subgroup": "school",
     "sentences": [{"tokens": [{"form": "I", "lemma": "I", "pos": "PRP"}, ...],
                    "parse": "(ROOT (S (NP (PRP I)) ...))"}]}
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError, ValidationError
from .treebank import TreeNode, parse_ptb

# Parsers escape brackets in leaves; tokens usually carry the raw character.
_PTB_ESCAPES = {
    "-LRB-": "(", "-RRB-": ")", "-LSB-": "[", "-RSB-": "]", "-LCB-": "{", "-RCB-": "}",
}


def _unescape(leaf: str) -> str:
    return _PTB_ESCAPES.get(leaf, leaf)


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    pos: str

    def __post_init__(self):
        if not self.form:
            raise ValueError("token form must be non-empty")
        if not self.pos:
            raise ValueError(f"token {self.form!r} has an empty POS tag")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    parse: str
    tree: TreeNode = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.tree is None:
            object.__setattr__(self, "tree", parse_ptb(self.parse))
        leaves = self.tree.leaves()
        if len(leaves) != len(self.tokens):
            raise ValidationError(
                f"parse has {len(leaves)} leaves but sentence has {len(self.tokens)} tokens"
            )
        for k, (leaf, tok) in enumerate(zip(leaves, self.tokens)):
            if leaf != tok.form and _unescape(leaf) != tok.form:
                raise ValidationError(f"leaf {k} is {leaf!r} but token {k} is {tok.form!r}")

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True)
class Document:
    id: str
    speaker_id: str
    subgroup: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        if not self.sentences:
            raise ValidationError(f"document {self.id!r} has no sentences")

    @property
    def tokens(self) -> list[Token]:
        return [t for s in self.sentences for t in s.tokens]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "speaker_id": self.speaker_id,
            "subgroup": self.subgroup,
            "sentences": [
                {
                    "tokens": [{"form": t.form, "lemma": t.lemma, "pos": t.pos} for t in s.tokens],
                    "parse": s.parse,
                }
                for s in self.sentences
            ],
        }


def document_from_json(obj: dict) -> Document:
    """Build a :class:`Document`; raises ``CorpusFormatError`` naming the sentence at fault."""
    if not isinstance(obj, dict):
        raise CorpusFormatError("document must be a JSON object")
    try:
        doc_id = str(obj["id"])
        sentences_raw = obj["sentences"]
    except KeyError as exc:
        raise CorpusFormatError(f"document is missing field {exc.args[0]!r}") from None
    sentences = []
    for k, s in enumerate(sentences_raw):
        try:
            tokens = tuple(Token(t["form"], t.get("lemma", t["form"]), t["pos"]) for t in s["tokens"])
            sentences.append(Sentence(tokens, s["parse"]))
        except (KeyError, TypeError) as exc:
            raise CorpusFormatError(
                f"document {doc_id!r}, sentence {k}: malformed sentence ({exc})"
            ) from None
        except (ValueError, ValidationError) as exc:
            raise CorpusFormatError(f"document {doc_id!r}, sentence {k}: {exc}") from None
    try:
        return Document(doc_id, str(obj.get("speaker_id", doc_id)), str(obj.get("subgroup", "")),
                        tuple(sentences))
    except ValidationError as exc:
        raise CorpusFormatError(str(exc)) from None


def load_corpus(path: str | Path) -> list[Document]:
    """Read a JSON-Lines corpus in file order. Blank lines are skipped."""
    docs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            try:
                doc = document_from_json(obj)
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            if doc.id in seen:
                raise CorpusFormatError(f"{path}:{lineno}: duplicate document id {doc.id!r}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


def dump_corpus(docs, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), ensure_ascii=False) + "\n")


@dataclass
class ScoreTable:
    """Rows are recordings, columns are measures; NaN marks a missing score."""

    row_ids: list[str]
    columns: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_ids), len(self.columns)):
            raise ValidationError(
                f"values have shape {self.values.shape}, expected "
                f"{(len(self.row_ids), len(self.columns))}"
            )
        if len(set(self.columns)) != len(self.columns):
            raise ValidationError("score table column names must be unique")

    @classmethod
    def from_rows(cls, rows: dict[str, dict[str, float | None]], columns) -> ScoreTable:
        columns = list(columns)
        values = np.full((len(rows), len(columns)), np.nan)
        for i, row in enumerate(rows.values()):
            for j, col in enumerate(columns):
                v = row.get(col)
                if v is not None:
                    values[i, j] = v
        return cls(list(rows), columns, values)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, columns) -> ScoreTable:
        idx = [self.columns.index(c) for c in columns]
        return ScoreTable(list(self.row_ids), list(columns), self.values[:, idx])


def format_score(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.6g}"


def score_table_csv(table: ScoreTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id", *table.columns])
    for rid, row in zip(table.row_ids, table.values):
        writer.writerow([rid, *(format_score(float(v)) for v in row)])
    return buf.getvalue()


def write_score_table(table: ScoreTable, path: str | Path) -> None:
    """CSV with header ``doc_id,<measures...>``; 6 significant digits; missing is empty."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(score_table_csv(table))


def read_score_table(path: str | Path) -> ScoreTable:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty score table") from None
        if not header or header[0] != "doc_id":
            raise ValidationError(f"{path}: header must start with 'doc_id'")
        columns = header[1:]
        row_ids, rows = [], []
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            row_ids.append(rec[0])
            try:
                rows.append([float(v) if v.strip() else np.nan for v in rec[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if len(set(row_ids)) != len(row_ids):
        raise ValidationError(f"{path}: duplicate doc_id")
    values = np.array(rows, dtype=float).reshape(len(row_ids), len(columns))
    return ScoreTable(row_ids, columns, values)
