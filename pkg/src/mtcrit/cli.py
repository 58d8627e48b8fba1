"""Command-line entry point wiring the pipeline stages together.

Stages are separate subcommands connected by files, so expensive external
calls are resumable and each stage is independently testable:

    mtcrit translate    populate mt_text via the translator client
    mtcrit classify     populate predicted_label via the classifier client
    mtcrit extract      apply the label-discrepancy rule
    mtcrit serve        run the annotation review service
    mtcrit export       merge an annotation log back into a corpus
    mtcrit score        compute metric vectors against corrected references
    mtcrit report       aggregate a score file into csv / table / plot data
    mtcrit gen-fixtures write the oracle-derived metric fixture file
    mtcrit validate     schema and invariant check of a corpus file

Exit codes: 0 success, 1 validation/processing failure, 2 usage error.
Config files are JSON; secrets only ever come from environment variables.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .corpus import (
    ClassifierLabel,
    CorpusError,
    SourceLabel,
    load_corpus,
    save_corpus,
)
from .metrics import EmbeddingSidecar, MetricError, score_corpus
from .oracles import generate_derived_fixtures
from .pipeline import (
    DiscrepancyRule,
    HttpClassifier,
    HttpClientConfig,
    HttpTranslator,
    PipelineError,
    ResponseCache,
    StubClassifier,
    StubTranslator,
    classify_corpus,
    extract_discrepancies,
    translate_corpus,
)
from .report import (
    EXPORT_FORMATS,
    NORMALIZATION_ID,
    ReportError,
    ScoreRow,
    aggregate_rows,
    export_report,
    load_score_file,
    write_score_file,
)
from .review import AnnotationLog, ReviewStore, export_annotated


class CliError(Exception):
    """Fatal CLI failure; message goes to stderr, exit code 1."""


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _client_from_config(config: dict, role: str):
    """Build a translator/classifier client from its config section.

    ``kind`` selects the transport: "http" (base_url, path, auth_env, field
    mapping) or "stub" (mapping/default, test determinism).
    """
    section = config.get(role)
    if section is None:
        raise CliError(f"config has no {role!r} section")
    kind = section.get("kind", "http")
    if kind == "http":
        http_config = HttpClientConfig.from_dict(section)
        return HttpTranslator(http_config) if role == "translator" else HttpClassifier(http_config)
    if kind == "stub":
        if role == "translator":
            return StubTranslator(
                mapping=section.get("mapping"),
                default=section.get("default"),
                fail_times=int(section.get("fail_times", 0)),
            )
        default = section.get("default", "non_mental")
        return StubClassifier(
            mapping={k: ClassifierLabel(v) for k, v in section.get("mapping", {}).items()},
            default=ClassifierLabel(default),
            fail_times=int(section.get("fail_times", 0)),
        )
    raise CliError(f"unknown client kind {kind!r} for {role}")


def _rule_from_args(args, config: dict) -> DiscrepancyRule:
    if getattr(args, "gold_trigger", None):
        gold = frozenset(SourceLabel(g) for g in args.gold_trigger)
        predicted = ClassifierLabel(args.predicted_trigger)
        return DiscrepancyRule(gold_trigger=gold, predicted_trigger=predicted)
    if "rule" in config:
        return DiscrepancyRule.from_dict(config["rule"])
    return DiscrepancyRule()


def _cache_from_config(args, config: dict) -> ResponseCache | None:
    cache_dir = getattr(args, "cache_dir", None) or config.get("cache_dir")
    return ResponseCache(cache_dir) if cache_dir else None


# ---------------------------------------------------------------------------
# Subcommand implementations

def _cmd_pipeline_stage(args, action: str) -> int:
    config = _load_config(args.config)
    role = "translator" if action == "translate" else "classifier"
    client = _client_from_config(config, role)
    cache = _cache_from_config(args, config)
    corpus = load_corpus(args.infile)
    run = translate_corpus if action == "translate" else classify_corpus
    result = run(
        corpus,
        client,
        cache=cache,
        force=args.force,
        max_retries=int(config.get("max_retries", 3)),
        backoff=float(config.get("backoff", 0.5)),
        workers=args.workers,
    )
    save_corpus(result.corpus, args.outfile)
    if args.run_log:
        result.write_log(args.run_log)
    failed = result.failed_ids()
    if failed:
        print(f"{action}: {len(failed)} record(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_extract(args) -> int:
    config = _load_config(args.config)
    rule = _rule_from_args(args, config)
    corpus = load_corpus(args.infile)
    flagged = extract_discrepancies(corpus, rule)
    save_corpus(flagged, args.outfile)
    print(f"extract: flagged {len(flagged)} of {len(corpus)} records", file=sys.stderr)
    return 0


def _cmd_score(args) -> int:
    corpus = load_corpus(args.infile)
    sidecar = EmbeddingSidecar.load(args.embeddings) if args.embeddings else None
    pairs = score_corpus(corpus, sidecar, workers=args.workers)
    rows = [ScoreRow(rec.id, rec.error_type, rec.critical, vector) for rec, vector in pairs]
    header = {"normalization": NORMALIZATION_ID, "bleu": {"max_n": 4, "smoothing": "add_one_on_zero"}}
    if sidecar is not None:
        header["embeddings_dim"] = sidecar.dim
        if sidecar.rescale_baseline is not None:
            header["rescale_baseline"] = sidecar.rescale_baseline
    write_score_file(args.outfile, rows, header)
    skipped = len(corpus) - len(rows)
    print(f"score: scored {len(rows)} record(s), skipped {skipped} without reference_text", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    header, rows = load_score_file(args.infile)
    report = aggregate_rows(rows, config=header)
    export_report(report, args.format, args.outfile)
    return 0


def _cmd_serve(args) -> int:
    from .review.service import serve

    corpus = load_corpus(args.corpus)
    store = ReviewStore(corpus, AnnotationLog(args.log), lock_timeout=args.lock_timeout)
    print(f"serving review queue of {len(corpus)} records on {args.host}:{args.port}", file=sys.stderr)
    serve(store, host=args.host, port=args.port)
    return 0


def _cmd_export(args) -> int:
    corpus = load_corpus(args.corpus)
    events = AnnotationLog(args.log).load()
    merged, exceptions = export_annotated(corpus, events)
    save_corpus(merged, args.outfile)
    for line in exceptions:
        print(f"export: {line}", file=sys.stderr)
    return 0


def _cmd_gen_fixtures(args) -> int:
    fixtures = generate_derived_fixtures()
    with open(args.outfile, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(fixtures, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_validate(args) -> int:
    corpus = load_corpus(args.infile)
    print(f"validate: {len(corpus)} record(s) ok", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtcrit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"mtcrit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, infile="--in", outfile="--out"):
        p.add_argument(infile, dest="infile", required=True, help="input corpus/score file")
        p.add_argument(outfile, dest="outfile", required=True, help="output file")

    for action in ("translate", "classify"):
        p = sub.add_parser(action, help=f"{action} records through the configured client")
        add_io(p)
        p.add_argument("--config", required=True, help="JSON config with client sections")
        p.add_argument("--force", action="store_true", help="re-process already-populated records")
        p.add_argument("--workers", type=int, default=1, help="bounded client fan-out")
        p.add_argument("--cache-dir", help="response cache directory (overrides config)")
        p.add_argument("--run-log", help="write per-record outcome events here")
        p.set_defaults(func=lambda a, action=action: _cmd_pipeline_stage(a, action))

    p = sub.add_parser("extract", help="apply the label-discrepancy rule")
    add_io(p)
    p.add_argument("--config", help="JSON config (rule section)")
    p.add_argument("--gold-trigger", action="append",
                   choices=[l.value for l in SourceLabel],
                   help="gold labels that trigger extraction (repeatable)")
    p.add_argument("--predicted-trigger", default=ClassifierLabel.NON_MENTAL.value,
                   choices=[l.value for l in ClassifierLabel],
                   help="predicted label that triggers extraction")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("score", help="compute metric vectors against corrected references")
    add_io(p)
    p.add_argument("--embeddings", help="embedding sidecar file for BERTScore")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("report", help="aggregate a score file")
    add_io(p)
    p.add_argument("--format", default="csv", choices=EXPORT_FORMATS)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the annotation review service")
    p.add_argument("--corpus", required=True, help="queue corpus (extract output)")
    p.add_argument("--log", required=True, help="append-only annotation log path")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--lock-timeout", type=float, default=600.0,
                   help="seconds before an idle assignment returns to the queue")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="merge an annotation log into a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("gen-fixtures", help="write the oracle-derived metric fixtures")
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_gen_fixtures)

    p = sub.add_parser("validate", help="schema and invariant check of a corpus file")
    p.add_argument("infile", help="corpus file to check")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, MetricError, PipelineError, ReportError, CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
