"""Sliding-window complexity contours."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .measures import DEFAULT_DEFLATE_LEVEL, MeasureRegistry, Window, score_window
from .transcript_io import Document, ScoreTable, format_score

AGGREGATES = ("mean", "median")


@dataclass(frozen=True)
class ContourConfig:
    ws: int = 5
    step: int = 1
    aggregate: str = "mean"

    def __post_init__(self):
        if self.ws < 1 or self.step < 1:
            raise ConfigError(f"window size and step must be >= 1 (got ws={self.ws}, step={self.step})")
        if self.aggregate not in AGGREGATES:
            raise ConfigError(f"aggregate must be one of {AGGREGATES}, not {self.aggregate!r}")


@dataclass(frozen=True)
class Contour:
    measure: str
    doc_id: str
    series: tuple[float | None, ...]
    aggregate: float | None


def window_count(n_sentences: int, ws: int, step: int) -> int:
    if n_sentences < ws:
        return 1
    return (n_sentences - ws) // step + 1


def windows(doc: Document, cfg: ContourConfig) -> list[Window]:
    """Sentence slices [i, i+ws) for i = 0, step, ... while they fit.

    A document shorter than the window yields one window covering all of it.
    """
    sents = doc.sentences
    if len(sents) < cfg.ws:
        return [Window(tuple(sents), 0)]
    return [
        Window(tuple(sents[i : i + cfg.ws]), i)
        for i in range(0, len(sents) - cfg.ws + 1, cfg.step)
    ]


def aggregate(series, how: str = "mean") -> float | None:
    vals = [v for v in series if v is not None]
    if not vals:
        return None
    if how == "median":
        return statistics.median(vals)
    return statistics.fmean(vals)


def score_document(
    doc: Document,
    cfg: ContourConfig,
    registry: MeasureRegistry,
    resources,
    *,
    deflate_level: int = DEFAULT_DEFLATE_LEVEL,
    npmod_per: str = "noun_phrases",
    patterns=None,
) -> list[Contour]:
    """One contour per registered measure, in registry order."""
    per_window = [
        score_window(w, registry, resources, deflate_level=deflate_level,
                     npmod_per=npmod_per, patterns=patterns)
        for w in windows(doc, cfg)
    ]
    contours = []
    for name in registry.names:
        series = tuple(scores[name] for scores in per_window)
        contours.append(Contour(name, doc.id, series, aggregate(series, cfg.aggregate)))
    return contours


def contours_to_table(per_doc: list[list[Contour]], columns) -> ScoreTable:
    rows = {}
    for contours in per_doc:
        if not contours:
            continue
        rows[contours[0].doc_id] = {c.measure: c.aggregate for c in contours}
    return ScoreTable.from_rows(rows, columns)


def contour_csv(per_doc: list[list[Contour]]) -> str:
    """Long format: ``doc_id,measure,window_index,score``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id", "measure", "window_index", "score"])
    for contours in per_doc:
        for c in contours:
            for k, v in enumerate(c.series):
                writer.writerow([c.doc_id, c.measure, k, format_score(v)])
    return buf.getvalue()


def write_contours(per_doc: list[list[Contour]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(contour_csv(per_doc))
