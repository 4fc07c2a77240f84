"""Command-line interface: ``l2complexity {analyze,wer,agree,select,rank,report}``.

Exit codes: 0 success, 1 validation or domain error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import DEFAULT_HESITATIONS, WordClassifier, load_word_list, read_speaker_map, read_transcripts, wer_report
from .contour import AGGREGATES, ContourConfig, contours_to_table, score_document, write_contours
from .errors import ConfigError, L2ComplexityError, ValidationError
from .lexres import default_resource_dir, load_resources
from .measures import DEFAULT_DEFLATE_LEVEL, check_resources, load_registry
from .stats import (
    MODERATE_BAND,
    STRONG_BAND,
    agreement_analysis,
    rank_features,
    select_measures,
)
from .transcript_io import ScoreTable, format_score, load_corpus, read_score_table, write_score_table
from .treebank import load_pattern_set

log = logging.getLogger("l2complexity")

NPMOD_CHOICES = ("noun_phrases", "sentences")


@dataclass
class RunConfig:
    resources: str | None = None
    ws: int = 5
    step: int = 1
    aggregate: str = "mean"
    npmod_per: str = "noun_phrases"
    r_threshold: float = 0.9
    strong: float = STRONG_BAND
    moderate: float = MODERATE_BAND
    hesitations: str | None = None
    deflate_level: int = DEFAULT_DEFLATE_LEVEL
    jobs: int | None = None
    out: str | None = None

    def validate(self) -> RunConfig:
        if self.resources is not None and not Path(self.resources).is_dir():
            raise ConfigError(f"resource directory {self.resources} does not exist")
        if self.hesitations is not None and not Path(self.hesitations).is_file():
            raise ConfigError(f"hesitation lexicon {self.hesitations} does not exist")
        if self.ws < 1 or self.step < 1:
            raise ConfigError("ws and step must be >= 1")
        if self.aggregate not in AGGREGATES:
            raise ConfigError(f"aggregate must be one of {', '.join(AGGREGATES)}")
        if self.npmod_per not in NPMOD_CHOICES:
            raise ConfigError(f"npmod_per must be one of {', '.join(NPMOD_CHOICES)}")
        if not 0.0 < self.r_threshold <= 1.0:
            raise ConfigError("r_threshold must be in (0, 1]")
        if not -1.0 <= self.moderate <= self.strong <= 1.0:
            raise ConfigError("bands need -1 <= moderate <= strong <= 1")
        if not 0 <= self.deflate_level <= 9:
            raise ConfigError("deflate_level must be in 0..9")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key, raw, origin):
    kind = _CONFIG_TYPES[key]
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{origin}: {key} = {raw!r} is not a valid number") from None
    return raw


def read_config(path: str | Path) -> dict:
    """``key = value`` lines; ``#`` comments; unknown keys are errors."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _convert(key, value.strip(), f"{path}:{lineno}")
    return out


def build_config(args) -> RunConfig:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key in _CONFIG_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(**values).validate()


def version_string() -> str:
    registry = load_registry()
    patterns = load_pattern_set()
    return (
        f"l2complexity {__version__} (registry v{registry.version}, "
        f"patterns v{patterns.version}, deflate level {DEFAULT_DEFLATE_LEVEL})"
    )


# --- analyze --------------------------------------------------------------------

_worker_state: dict = {}


def _init_worker(resource_dir, cfg_dict):
    _worker_state["registry"] = load_registry()
    _worker_state["resources"] = load_resources(resource_dir)
    _worker_state["patterns"] = load_pattern_set()
    _worker_state["cfg"] = cfg_dict


def _score_one(doc):
    st = _worker_state
    cfg = st["cfg"]
    return score_document(
        doc,
        ContourConfig(cfg["ws"], cfg["step"], cfg["aggregate"]),
        st["registry"],
        st["resources"],
        deflate_level=cfg["deflate_level"],
        npmod_per=cfg["npmod_per"],
        patterns=st["patterns"],
    )


def analyze(corpus_path, cfg: RunConfig, out_dir) -> tuple[ScoreTable, list]:
    """Score every document; results come back in corpus order whatever the job count."""
    docs = load_corpus(corpus_path)
    registry = load_registry()
    resource_dir = cfg.resources or str(default_resource_dir())
    check_resources(registry, load_resources(resource_dir))
    cfg_dict = asdict(cfg)
    jobs = min(cfg.jobs or os.cpu_count() or 1, len(docs))
    if jobs <= 1:
        _init_worker(resource_dir, cfg_dict)
        per_doc = [_score_one(d) for d in docs]
    else:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(resource_dir, cfg_dict)) as pool:
            per_doc = list(pool.map(_score_one, docs, chunksize=max(1, len(docs) // (4 * jobs))))
    table = contours_to_table(per_doc, registry.names)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_score_table(table, out / "scores.csv")
    write_contours(per_doc, out / "contours.csv")
    meta = {
        "version": __version__,
        "registry_version": registry.version,
        "pattern_version": load_pattern_set().version,
        "deflate_level": cfg.deflate_level,
        "ws": cfg.ws,
        "step": cfg.step,
        "aggregate": cfg.aggregate,
        "npmod_per": cfg.npmod_per,
        "resources": load_resources(resource_dir).names,
        "documents": len(docs),
    }
    _write_json(meta, out / "scores.meta.json")
    return table, per_doc


# --- helpers --------------------------------------------------------------------


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_json_text(obj))


def _emit(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _classifier(cfg: RunConfig) -> WordClassifier:
    hes = load_word_list(cfg.hesitations) if cfg.hesitations else DEFAULT_HESITATIONS
    return WordClassifier(hesitations=hes)


def read_labels(path) -> dict[str, float]:
    """``doc_id,label`` CSV with a header; labels must be numeric and ordered."""
    labels = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise ValidationError(f"{path}: expected a doc_id,label header")
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            if len(rec) < 2:
                raise ValidationError(f"{path}:{lineno}: expected doc_id,label")
            try:
                labels[rec[0]] = float(rec[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: label {rec[1]!r} is not numeric") from None
    return labels


def _labelled_rows(table: ScoreTable, labels: dict) -> ScoreTable:
    unknown = sorted(set(labels) - set(table.row_ids))
    if unknown:
        raise ValidationError(f"labels name documents absent from the score table: {', '.join(unknown)}")
    idx = [i for i, r in enumerate(table.row_ids) if r in labels]
    return ScoreTable([table.row_ids[i] for i in idx], list(table.columns), table.values[idx])


def _subgroups(path) -> dict[str, str] | None:
    if path is None:
        return None
    return {doc: group for doc, (_, group) in read_speaker_map(path).items()}


def ranking_csv(ranking) -> str:
    rows = [
        (e.measure, format_score(e.fi), format_score(e.beta), str(e.converged).lower(),
         str(ranking.above_mean(e)).lower())
        for e in ranking.entries
    ]
    return _csv_text(["measure", "fi", "beta", "converged", "above_mean"], rows)


def agreement_outputs(report) -> dict[str, str]:
    long = _csv_text(["measure", "subgroup", "rho"],
                     [(m, g, format_score(r)) for m, g, r in report.long_rows()])
    manual = {d.measure: d for d in report.manual}
    desc_rows = []
    for d in report.asr:
        m = manual[d.measure]
        desc_rows.append((d.measure, format_score(m.mean), format_score(m.sd),
                          format_score(d.mean), format_score(d.sd)))
    desc = _csv_text(["measure", "manual_mean", "manual_sd", "asr_mean", "asr_sd"], desc_rows)
    return {
        "agreement.json": _json_text(report.as_dict()),
        "agreement_long.csv": long,
        "descriptive.csv": desc,
    }


# --- subcommands ----------------------------------------------------------------


def cmd_analyze(args, cfg):
    out = cfg.out or "."
    table, _ = analyze(args.corpus, cfg, out)
    log.info("scored %d documents into %s", len(table.row_ids), out)


def cmd_wer(args, cfg):
    report = wer_report(
        read_transcripts(args.ref),
        read_transcripts(args.hyp),
        read_speaker_map(args.speakers) if args.speakers else None,
        classifier=_classifier(cfg),
        filter_hesitations=args.filter_hesitations,
    )
    _emit(_json_text(report), cfg.out)


def _agree_report(manual_path, asr_path, speakers, cfg):
    return agreement_analysis(
        read_score_table(manual_path),
        read_score_table(asr_path),
        _subgroups(speakers),
        strong=cfg.strong,
        moderate=cfg.moderate,
    )


def _write_outputs(outputs: dict[str, str], out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        _emit(text, out / name)


def cmd_agree(args, cfg):
    report = _agree_report(args.manual, args.asr, args.speakers, cfg)
    _write_outputs(agreement_outputs(report), cfg.out or ".")


def cmd_select(args, cfg):
    table = read_score_table(args.scores)
    result = select_measures(table, cfg.r_threshold)
    _emit(_json_text({"r_threshold": cfg.r_threshold, **result.as_dict()}), cfg.out)


def cmd_rank(args, cfg):
    table = _labelled_rows(read_score_table(args.scores), read_labels(args.labels))
    _emit(ranking_csv(rank_features(table, read_labels(args.labels))), cfg.out)


def cmd_report(args, cfg):
    """Agreement tables, measure selection and the importance ranking in one directory."""
    report = _agree_report(args.manual, args.asr, args.speakers, cfg)
    outputs = agreement_outputs(report)
    manual = read_score_table(args.manual)
    selection = select_measures(manual, cfg.r_threshold)
    outputs["selection.json"] = _json_text({"r_threshold": cfg.r_threshold, **selection.as_dict()})
    labels = read_labels(args.labels)
    ranked = _labelled_rows(manual.select(selection.retained), labels)
    outputs["ranking.csv"] = ranking_csv(rank_features(ranked, labels))
    _write_outputs(outputs, cfg.out or "report")


# --- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation errors, not I/O errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p, *, analysis=False):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("-o", "--out", help="output file or directory")
    if analysis:
        p.add_argument("--resources", help="resource directory with manifest.tsv")
        p.add_argument("--ws", type=int, help="window size in sentences (default 5)")
        p.add_argument("--step", type=int, help="window step in sentences (default 1)")
        p.add_argument("--aggregate", choices=AGGREGATES, help="contour aggregate (default mean)")
        p.add_argument("--npmod-per", dest="npmod_per", choices=NPMOD_CHOICES,
                       help="denominator for NP modifier measures")
        p.add_argument("--deflate-level", dest="deflate_level", type=int, help="zlib level 0..9 (default 6)")
        p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")


def _bands(p):
    p.add_argument("--strong", type=float, help="strong agreement band (default 0.7)")
    p.add_argument("--moderate", type=float, help="moderate agreement band (default 0.6)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="l2complexity", description="Complexity measures for transcribed learner speech.")
    ap.add_argument("--version", action="version", version=version_string())
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="score a JSONL corpus")
    p.add_argument("corpus")
    _common(p, analysis=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("wer", help="align reference and recognizer transcripts")
    p.add_argument("ref")
    p.add_argument("hyp")
    p.add_argument("--speakers", help="doc_id<TAB>speaker<TAB>subgroup map")
    p.add_argument("--filter-hesitations", action="store_true", help="drop hesitations before aligning")
    p.add_argument("--hesitations", help="hesitation lexicon, one word per line")
    _common(p)
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("agree", help="Spearman agreement between two score tables")
    p.add_argument("manual")
    p.add_argument("asr")
    p.add_argument("--speakers", help="doc_id<TAB>speaker<TAB>subgroup map for subgroup rho")
    _bands(p)
    _common(p)
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("select", help="near-zero-variance and collinearity filtering")
    p.add_argument("scores")
    p.add_argument("--r-threshold", dest="r_threshold", type=float, help="|r| cutoff (default 0.9)")
    _common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("rank", help="ordinal-model feature importance against labels")
    p.add_argument("scores")
    p.add_argument("labels")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", help="agreement, selection and ranking into one directory")
    p.add_argument("manual")
    p.add_argument("asr")
    p.add_argument("labels")
    p.add_argument("--speakers")
    p.add_argument("--r-threshold", dest="r_threshold", type=float)
    _bands(p)
    _common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        args.func(args, cfg)
    except L2ComplexityError as exc:
        print(f"l2complexity: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"l2complexity: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
