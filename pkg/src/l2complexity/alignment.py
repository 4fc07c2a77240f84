"""Reference/hypothesis word alignment and WER analysis.

Transcript files have one recording per line: ``doc_id<TAB>space-separated words``.
"""

from __future__ import annotations

import statistics
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import AlignmentMismatchError, UndefinedWERError, ValidationError

MATCH, SUB, INS, DEL = "match", "substitution", "insertion", "deletion"
DEFAULT_HESITATIONS = frozenset({"uh", "uhm", "um", "er", "eh", "mhm", "hm"})
WORD_CLASSES = ("hesitation", "function", "content")
SPEAKER_METRICS = ("WER", "Substitutions", "Deletions", "Insertions")


@dataclass(frozen=True)
class EditOp:
    kind: str
    ref_word: str | None = None
    hyp_word: str | None = None

    def __post_init__(self):
        has_ref, has_hyp = self.ref_word is not None, self.hyp_word is not None
        ok = {
            MATCH: has_ref and has_hyp,
            SUB: has_ref and has_hyp,
            INS: has_hyp and not has_ref,
            DEL: has_ref and not has_hyp,
        }.get(self.kind)
        if not ok:
            raise ValueError(f"inconsistent edit op {self}")


@dataclass(frozen=True)
class AlignmentReport:
    doc_id: str
    ops: tuple[EditOp, ...]
    n_ref: int
    sub: int
    ins: int
    dels: int

    @property
    def errors(self) -> int:
        return self.sub + self.ins + self.dels

    @property
    def matches(self) -> int:
        return self.n_ref - self.sub - self.dels

    @property
    def wer(self) -> float:
        return 100.0 * self.errors / self.n_ref

    def as_dict(self) -> dict:
        return {
            "n_ref": self.n_ref,
            "Sub": self.sub,
            "Ins": self.ins,
            "Del": self.dels,
            "WER": self.wer,
        }


def edit_table(ref, hyp) -> list[list[int]]:
    """Wagner-Fischer table of unit edit costs."""
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            row[j] = min(prev[j - 1] + (ri != hyp[j - 1]), prev[j] + 1, row[j - 1] + 1)
    return d


def edit_distance(ref, hyp) -> int:
    return edit_table([w.lower() for w in ref], [w.lower() for w in hyp])[-1][-1]


def _ranked_table(r, h):
    # cost = edits * k + substitutions: minimal edits first, then most matches
    n, m = len(r), len(h)
    k = n + m + 1
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i * k
    for j in range(1, m + 1):
        d[0][j] = j * k
    for i in range(1, n + 1):
        ri = r[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (0 if ri == h[j - 1] else k + 1)
            row[j] = min(diag, prev[j] + k, row[j - 1] + k)
    return d, k


def align(ref, hyp, doc_id: str = "") -> AlignmentReport:
    """Minimum-edit alignment of two word lists, compared case-insensitively.

    The total number of edits is always the unit-cost optimum. Among optimal
    alignments the one with the most matches wins; remaining ties are broken
    match, then substitution, then deletion, then insertion, walking back from
    the end, so op sequences are deterministic.
    """
    if not ref:
        raise UndefinedWERError(f"{doc_id or 'recording'}: empty reference, WER undefined")
    r = [w.lower() for w in ref]
    h = [w.lower() for w in hyp]
    d, k = _ranked_table(r, h)
    ops = []
    i, j = len(r), len(h)
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0 and r[i - 1] == h[j - 1] and d[i - 1][j - 1] == here:
            ops.append(EditOp(MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and r[i - 1] != h[j - 1] and d[i - 1][j - 1] + k + 1 == here:
            ops.append(EditOp(SUB, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and d[i - 1][j] + k == here:
            ops.append(EditOp(DEL, ref[i - 1], None))
            i -= 1
        else:
            ops.append(EditOp(INS, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    n_sub = sum(op.kind == SUB for op in ops)
    n_ins = sum(op.kind == INS for op in ops)
    n_del = sum(op.kind == DEL for op in ops)
    return AlignmentReport(doc_id, tuple(ops), len(r), n_sub, n_ins, n_del)


@dataclass(frozen=True)
class WerSummary:
    n_ref: int
    sub: int
    ins: int
    dels: int

    def _pct(self, k):
        return 100.0 * k / self.n_ref if self.n_ref else None

    @property
    def wer(self):
        return self._pct(self.sub + self.ins + self.dels)

    def as_dict(self) -> dict:
        return {
            "n_ref": self.n_ref,
            "Sub": self._pct(self.sub),
            "Ins": self._pct(self.ins),
            "Del": self._pct(self.dels),
            "WER": self.wer,
        }


def corpus_wer(reports) -> WerSummary:
    """Micro-averaged rates: error totals over the total reference length."""
    reports = list(reports)
    if not reports:
        raise ValidationError("corpus_wer needs at least one report")
    return WerSummary(
        sum(r.n_ref for r in reports),
        sum(r.sub for r in reports),
        sum(r.ins for r in reports),
        sum(r.dels for r in reports),
    )


@dataclass(frozen=True)
class SpeakerStats:
    metric: str
    mean: float
    sd: float | None
    min: float
    max: float

    def as_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "min": self.min, "max": self.max}


def speaker_stats(reports_by_speaker: dict) -> dict[str, SpeakerStats]:
    """Mean, sample SD, min and max over speakers of each speaker's micro rates."""
    if not reports_by_speaker:
        raise ValidationError("speaker_stats needs at least one speaker")
    per_metric = defaultdict(list)
    for spk in sorted(reports_by_speaker):
        s = corpus_wer(reports_by_speaker[spk]).as_dict()
        per_metric["WER"].append(s["WER"])
        per_metric["Substitutions"].append(s["Sub"])
        per_metric["Deletions"].append(s["Del"])
        per_metric["Insertions"].append(s["Ins"])
    out = {}
    for metric in SPEAKER_METRICS:
        vals = per_metric[metric]
        sd = statistics.stdev(vals) if len(vals) > 1 else None
        out[metric] = SpeakerStats(metric, statistics.fmean(vals), sd, min(vals), max(vals))
    return out


def format_speaker_table(stats_by_group: dict[str, dict[str, SpeakerStats]]) -> str:
    """Plain-text table with Mean/SD/Min/Max columns, one block per group."""
    lines = ["\tMean\tSD\tMin\tMax"]
    for group, stats in stats_by_group.items():
        lines.append(group)
        for metric in SPEAKER_METRICS:
            s = stats[metric]
            sd = "-" if s.sd is None else f"{s.sd:.1f}"
            lines.append(f"{metric}\t{s.mean:.1f}\t{sd}\t{s.min:.1f}\t{s.max:.1f}")
    return "\n".join(lines) + "\n"


class WordClassifier:
    """Maps a word to ``hesitation``, ``function`` or ``content``."""

    def __init__(self, hesitations=DEFAULT_HESITATIONS, function_words=None):
        self.hesitations = frozenset(w.lower() for w in hesitations)
        if function_words is None:
            function_words = load_word_list(None)
        self.function_words = frozenset(w.lower() for w in function_words)

    def __call__(self, word: str) -> str:
        w = word.lower()
        if w in self.hesitations:
            return "hesitation"
        if w in self.function_words:
            return "function"
        return "content"


def load_word_list(path: str | Path | None) -> list[str]:
    """One word per line, ``#`` comments; ``None`` loads the shipped function-word list."""
    if path is None:
        text = resources.files("l2complexity").joinpath("data/function_words.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return [ln.strip().lower() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


@dataclass(frozen=True)
class WordClassErrorProfile:
    word_class: str
    sub_pct: float | None
    ins_pct: float | None
    del_pct: float | None

    def as_dict(self) -> dict:
        return {"sub_pct": self.sub_pct, "ins_pct": self.ins_pct, "del_pct": self.del_pct}


def error_profile(reports, classifier, classes=WORD_CLASSES) -> list[WordClassErrorProfile]:
    """Share of each error kind falling in each word class.

    Substitutions and deletions are classified by the reference word, insertions
    by the hypothesis word. A kind that never occurs gets ``None`` everywhere.
    """
    counts = {kind: dict.fromkeys(classes, 0) for kind in (SUB, INS, DEL)}
    for rep in reports:
        for op in rep.ops:
            if op.kind == MATCH:
                continue
            word = op.hyp_word if op.kind == INS else op.ref_word
            cls = classifier(word)
            if cls not in counts[op.kind]:
                raise ValidationError(f"classifier returned unknown class {cls!r} for {word!r}")
            counts[op.kind][cls] += 1

    def pct(kind, cls):
        total = sum(counts[kind].values())
        return 100.0 * counts[kind][cls] / total if total else None

    return [WordClassErrorProfile(c, pct(SUB, c), pct(INS, c), pct(DEL, c)) for c in classes]


def read_transcripts(path: str | Path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            doc_id, sep, words = line.partition("\t")
            if not sep or not doc_id:
                raise ValidationError(f"{path}:{lineno}: expected doc_id<TAB>words")
            if doc_id in out:
                raise ValidationError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            out[doc_id] = words.split()
    return out


def write_transcripts(transcripts: dict[str, list[str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, words in transcripts.items():
            fh.write(f"{doc_id}\t{' '.join(words)}\n")


def read_speaker_map(path: str | Path) -> dict[str, tuple[str, str]]:
    """``doc_id<TAB>speaker_id[<TAB>subgroup]`` lines to {doc_id: (speaker, subgroup)}."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            cols = line.rstrip("\n").split("\t")
            if not line.strip():
                continue
            if len(cols) < 2:
                raise ValidationError(f"{path}:{lineno}: expected doc_id<TAB>speaker_id[<TAB>subgroup]")
            out[cols[0]] = (cols[1], cols[2] if len(cols) > 2 else "all")
    return out


def wer_report(
    ref: dict[str, list[str]],
    hyp: dict[str, list[str]],
    speakers: dict[str, tuple[str, str]] | None = None,
    *,
    classifier: WordClassifier | None = None,
    filter_hesitations: bool = False,
) -> dict:
    """Per-recording, per-subgroup, per-speaker and word-class sections as one dict."""
    unmatched = sorted(set(ref) ^ set(hyp))
    if unmatched:
        raise AlignmentMismatchError(f"doc_ids not present in both files: {', '.join(unmatched)}")
    classifier = classifier or WordClassifier()
    speakers = speakers or {}

    def keep(words):
        if not filter_hesitations:
            return words
        return [w for w in words if w.lower() not in classifier.hesitations]

    reports = {}
    for doc_id in sorted(ref):
        reports[doc_id] = align(keep(ref[doc_id]), keep(hyp[doc_id]), doc_id)

    groups = defaultdict(list)
    by_speaker = defaultdict(lambda: defaultdict(list))
    for doc_id, rep in reports.items():
        spk, group = speakers.get(doc_id, (doc_id, "all"))
        groups[group].append(rep)
        by_speaker[group][spk].append(rep)

    return {
        "filter_hesitations": filter_hesitations,
        "recordings": {d: r.as_dict() for d, r in reports.items()},
        "corpus": corpus_wer(reports.values()).as_dict(),
        "by_subgroup": {g: corpus_wer(rs).as_dict() for g, rs in sorted(groups.items())},
        "speakers": {
            g: {m: s.as_dict() for m, s in speaker_stats(spk).items()}
            for g, spk in sorted(by_speaker.items())
        },
        "word_classes": {p.word_class: p.as_dict() for p in error_profile(reports.values(), classifier)},
    }
